#include "gst/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gst/schedule.hpp"

namespace gst {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Phase phase_from_name(const std::string& s) {
  if (s == "grouped") return Phase::Grouped;
  if (s == "converted") return Phase::Converted;
  if (s == "released") return Phase::Released;
  throw std::runtime_error("unknown phase '" + s + "'");
}

std::string base_name(const std::string& path) {
  size_t slash = path.find_last_of('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  size_t dot = name.rfind(".csv");
  return dot == std::string::npos ? name : name.substr(0, dot);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

LoadedLog load_runlog_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open runlog '" + path + "'");
  LoadedLog log;
  log.name = base_name(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty runlog '" + path + "'");
  if (split_csv(line) != split_csv(csv_header()))
    throw std::runtime_error("runlog '" + path + "' has an unexpected header");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != 9)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 9 columns");
    RunRow row;
    row.timestep = std::stoull(cells[0]);
    if (!cells[1].empty()) row.episode_return = std::stod(cells[1]);
    if (!cells[2].empty()) row.eval_return = std::stod(cells[2]);
    row.s_now = std::stod(cells[3]);
    row.p_th = std::stod(cells[4]);
    row.phase = phase_from_name(cells[5]);
    row.cr_formula = std::stod(cells[6]);
    row.cr_exact = std::stod(cells[7]);
    row.wall_ms = std::stod(cells[8]);
    log.rows.push_back(row);
  }
  return log;
}

std::string report_summary_csv(const std::vector<LoadedLog>& logs) {
  std::string out = "run,rows,average_cr,final_s_now,final_p_th,final_phase,last_eval\n";
  for (const auto& log : logs) {
    std::vector<double> crs;
    for (const auto& r : log.rows) crs.push_back(r.cr_formula);
    const RunRow& last = log.rows.back();
    std::optional<double> last_eval;
    for (const auto& r : log.rows)
      if (r.eval_return) last_eval = r.eval_return;
    out += log.name + "," + std::to_string(log.rows.size()) + "," + fmt(average_cr(crs)) + "," +
           fmt(last.s_now) + "," + fmt(last.p_th) + "," + phase_name(last.phase) + ",";
    if (last_eval) out += fmt(*last_eval);
    out += "\n";
  }
  return out;
}

namespace {

struct Extent {
  double lo = 0, hi = 1;
  void grow(double v) {
    if (empty) {
      lo = hi = v;
      empty = false;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (empty) return;
    if (lo == hi) {
      lo -= 1;
      hi += 1;
    } else {
      double m = (hi - lo) * 0.05;
      lo -= m;
      hi += m;
    }
  }
  bool empty = true;
};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* kPalette[] = {"#c0392b", "#2980b9", "#27ae60", "#8e44ad",
                          "#d35400", "#16a085", "#7f8c8d", "#2c3e50"};

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series,
                           const Band* band, int width, int height) {
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;

  Extent xe, ye;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      xe.grow(x);
      ye.grow(y);
    }
  if (band)
    for (auto [x, lo, hi] : band->region) {
      xe.grow(x);
      ye.grow(lo);
      ye.grow(hi);
    }
  xe.pad();
  ye.pad();
  if (xe.empty) {
    xe = Extent{0, 1, false};
    ye = Extent{0, 1, false};
  }

  auto px = [&](double x) { return ml + (x - xe.lo) / (xe.hi - xe.lo) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ye.lo) / (ye.hi - ye.lo) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"15\">" << xml_escape(title) << "</text>\n";

  // frame + ticks
  svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  char buf[64];
  for (int i = 0; i <= 5; ++i) {
    double fx = xe.lo + (xe.hi - xe.lo) * i / 5.0;
    double fy = ye.lo + (ye.hi - ye.lo) * i / 5.0;
    double gx = px(fx), gy = py(fy);
    svg << "<line x1=\"" << gx << "\" y1=\"" << mt + ph << "\" x2=\"" << gx << "\" y2=\""
        << mt + ph + 5 << "\" stroke=\"#444\"/>\n";
    std::snprintf(buf, sizeof buf, "%.4g", fx);
    svg << "<text x=\"" << gx << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << buf
        << "</text>\n";
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << gy << "\" x2=\"" << ml << "\" y2=\"" << gy
        << "\" stroke=\"#444\"/>\n";
    std::snprintf(buf, sizeof buf, "%.4g", fy);
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << gy + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf
        << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << xml_escape(x_label) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
      << mt + ph / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

  if (band && !band->region.empty()) {
    svg << "<path d=\"";
    for (size_t i = 0; i < band->region.size(); ++i) {
      auto [x, lo, hi] = band->region[i];
      svg << (i == 0 ? "M" : "L") << px(x) << " " << py(hi) << " ";
      (void)lo;
    }
    for (size_t i = band->region.size(); i-- > 0;) {
      auto [x, lo, hi] = band->region[i];
      (void)hi;
      svg << "L" << px(x) << " " << py(lo) << " ";
    }
    svg << "Z\" fill=\"#3498db\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
  }

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    if (s.points.empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[si % 8]
        << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : s.points) svg << px(x) << "," << py(y) << " ";
    svg << "\"/>\n";
    double lx = ml + pw - 150, ly = mt + 16 + 16 * static_cast<double>(si);
    svg << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 22 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << kPalette[si % 8] << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << lx + 28 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(s.label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_report(const std::vector<LoadedLog>& logs, const std::string& out_dir) {
  if (logs.empty()) throw std::runtime_error("report: no runlogs found");

  auto write_file = [](const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
  };

  write_file(out_dir + "/summary.csv", report_summary_csv(logs));

  auto chart = [&](const char* title, const char* ylab, auto cell) {
    std::vector<Series> series;
    for (const auto& log : logs) {
      Series s;
      s.label = log.name;
      for (const auto& row : log.rows) {
        std::optional<double> v = cell(row);
        if (v) s.points.push_back({static_cast<double>(row.timestep), *v});
      }
      series.push_back(std::move(s));
    }
    Band band;
    if (logs.size() > 1) {
      // min/max band plus a mean series on the common grid
      Series mean_series;
      mean_series.label = "mean";
      for (size_t r = 0; r < logs.front().rows.size(); ++r) {
        uint64_t ts = logs.front().rows[r].timestep;
        double acc = 0, lo = 0, hi = 0;
        int n = 0;
        for (const auto& log : logs) {
          if (r >= log.rows.size() || log.rows[r].timestep != ts) { n = 0; break; }
          std::optional<double> v = cell(log.rows[r]);
          if (!v) continue;
          if (n == 0) { lo = hi = *v; } else { lo = std::min(lo, *v); hi = std::max(hi, *v); }
          acc += *v;
          ++n;
        }
        if (n > 0) {
          mean_series.points.push_back({static_cast<double>(ts), acc / n});
          band.region.push_back({static_cast<double>(ts), lo, hi});
        }
      }
      series.push_back(std::move(mean_series));
    }
    return line_chart_svg(title, "timestep", ylab, series,
                          logs.size() > 1 ? &band : nullptr);
  };

  write_file(out_dir + "/reward.svg",
             chart("reward vs timestep", "eval return",
                   [](const RunRow& r) { return r.eval_return; }));
  write_file(out_dir + "/cr.svg",
             chart("compression ratio vs timestep", "compression ratio", [](const RunRow& r) {
                 return std::optional<double>(r.cr_formula);
             }));
}

}  // namespace gst
