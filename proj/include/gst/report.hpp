#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gst/harness.hpp"

namespace gst {

struct LoadedLog {
  std::string name;
  std::vector<RunRow> rows;
};

// Reads a runlog CSV produced by `train` (documented column order).
LoadedLog load_runlog_csv(const std::string& path);

// One line per run: rows, average CR (mean of the cr_formula column over the
// uniform log grid), final sparsity and threshold, last evaluation.
std::string report_summary_csv(const std::vector<LoadedLog>& logs);

struct Series {
  std::string label;
  // x, y pairs; gaps (missing cells) are simply skipped
  std::vector<std::pair<double, double>> points;
};

struct Band {
  // x, lo, hi triples rendered as a translucent region
  std::vector<std::tuple<double, double, double>> region;
};

// Standalone SVG line chart: axes, ticks, legend, one polyline per series,
// optional min/max band behind a mean line.
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series,
                           const Band* band = nullptr, int width = 860, int height = 420);

// summary.csv, reward.svg (eval return vs timestep) and cr.svg
// (compression ratio vs timestep); with several runs the charts add a mean
// line and a min/max band over the common grid.
void write_report(const std::vector<LoadedLog>& logs, const std::string& out_dir);

}  // namespace gst
