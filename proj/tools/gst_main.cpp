// gst: group-sparse training engine CLI
//
//   gst train    --config cfg.ini [--seed N] [--out DIR]
//   gst sweep    --config cfg.ini --seeds K [--out DIR] [--jobs N]
//   gst convert  --checkpoint in.gstc --method friendly|projection
//                --target-kind KIND --target-block B --out out.gstc
//   gst measure  --checkpoint in.gstc [--export-gstb DIR]
//   gst report   --runs DIR [--out DIR]
//
// GST_THREADS caps both kernel threads and sweep parallelism.

#include <sys/stat.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "gst/harness.hpp"
#include "gst/report.hpp"

namespace fs = std::filesystem;
using namespace gst;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + dir + "': " + ec.message());
}

int cmd_train(const std::string& config_path, int64_t seed_override, const std::string& out_dir) {
  RunConfig cfg = RunConfig::from_file(config_path);
  uint64_t seed = seed_override >= 0 ? static_cast<uint64_t>(seed_override) : cfg.seed;
  std::printf("# resolved configuration\n%s# seed = %llu\n", cfg.resolved_text().c_str(),
              static_cast<unsigned long long>(seed));

  ensure_dir(out_dir);
  std::string csv_path = out_dir + "/run_seed" + std::to_string(seed) + ".csv";
  std::string ckpt_path = out_dir + "/run_seed" + std::to_string(seed) + ".gstc";

  FILE* csv = std::fopen(csv_path.c_str(), "wb");
  if (!csv) {
    std::fprintf(stderr, "error: cannot open %s for writing\n", csv_path.c_str());
    return 1;
  }
  std::string header = csv_header();
  std::fwrite(header.data(), 1, header.size(), csv);
  std::fputc('\n', csv);
  std::fflush(csv);

  Run run(cfg, seed);
  run.attach_csv(csv);
  int rc = 0;
  try {
    run.run_all();
    run.save(ckpt_path);
    std::printf("wrote %s (%zu rows) and %s\n", csv_path.c_str(), run.rows().size(),
                ckpt_path.c_str());
  } catch (const std::exception& e) {
    // rows so far are already flushed
    std::fprintf(stderr, "error at timestep %llu: %s (partial log kept at %s)\n",
                 static_cast<unsigned long long>(run.timestep()), e.what(), csv_path.c_str());
    rc = 1;
  }
  std::fclose(csv);
  return rc;
}

int cmd_sweep(const std::string& config_path, int seeds, const std::string& out_dir, int jobs) {
  RunConfig cfg = RunConfig::from_file(config_path);
  std::printf("# resolved configuration\n%s# seeds = %llu..%llu\n", cfg.resolved_text().c_str(),
              static_cast<unsigned long long>(cfg.seed),
              static_cast<unsigned long long>(cfg.seed + seeds - 1));
  ensure_dir(out_dir);

  SweepResult sw = sweep(cfg, seeds, jobs);
  for (size_t i = 0; i < sw.seeds.size(); ++i) {
    std::string path = out_dir + "/run_seed" + std::to_string(sw.seeds[i]) + ".csv";
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + path);
    std::string header = csv_header();
    std::fwrite(header.data(), 1, header.size(), f);
    std::fputc('\n', f);
    for (const auto& row : sw.per_seed[i]) {
      std::string line = csv_row(row);
      std::fwrite(line.data(), 1, line.size(), f);
      std::fputc('\n', f);
    }
    std::fclose(f);
  }
  std::string agg = aggregate_csv(aggregate(sw));
  std::string agg_path = out_dir + "/aggregate.csv";
  FILE* f = std::fopen(agg_path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot write " + agg_path);
  std::fwrite(agg.data(), 1, agg.size(), f);
  std::fclose(f);
  std::printf("wrote %d per-seed logs and %s\n", seeds, agg_path.c_str());
  return 0;
}

int cmd_convert(const std::string& ckpt_path, const std::string& method_name,
                const std::string& target_kind_name, int target_block,
                const std::string& out_path) {
  Checkpoint cp = Checkpoint::read_file(ckpt_path);
  ConvertMethod method;
  if (method_name == "friendly") method = ConvertMethod::Friendly;
  else if (method_name == "projection") method = ConvertMethod::Projection;
  else throw ConfigError("unknown conversion method '" + method_name + "'");
  PatternKind target_kind = kind_from_name(target_kind_name);

  double max_change = 0.0;
  int converted_layers = 0;
  for (const std::string& section : cp.names_with_prefix("model:")) {
    std::string name = section.substr(6);
    ByteReader r(cp.get(section));
    Mlp mlp = read_mlp(r);

    OptimState opt;
    bool has_optim = cp.has("optim:" + name);
    if (has_optim) {
      ByteReader ro(cp.get("optim:" + name));
      opt = read_optim(ro);
    }

    for (size_t l = 0; l < mlp.layers.size(); ++l) {
      auto& layer = mlp.layers[l];
      if (!layer.compressed || layer.weight.pattern->kind == PatternKind::Dense) continue;
      Matrix before = realize(layer.weight);
      auto target = build_pattern(target_kind, layer.out_dim(), layer.in_dim(), target_block);
      convert_layer(layer, target, method, has_optim ? &opt.layers[l] : nullptr);
      Matrix after = realize(layer.weight);
      for (size_t i = 0; i < before.size(); ++i)
        max_change = std::max(max_change,
                              static_cast<double>(std::fabs(before.data[i] - after.data[i])));
      ++converted_layers;
    }

    ByteWriter w;
    write_mlp(w, mlp);
    for (auto& [n, payload] : cp.sections)
      if (n == section) payload = w.take();
    if (has_optim) {
      ByteWriter wo;
      write_optim(wo, opt);
      for (auto& [n, payload] : cp.sections)
        if (n == "optim:" + name) payload = wo.take();
    }
  }
  if (converted_layers == 0)
    throw StructureError("checkpoint has no grouped compressed layers to convert");

  if (cp.has("sched")) {
    ByteReader r(cp.get("sched"));
    SchedulerState sched = read_scheduler(r);
    if (sched.phase == Phase::Grouped) sched.phase = Phase::Converted;
    sched.conversion_done = true;
    ByteWriter w;
    write_scheduler(w, sched);
    for (auto& [n, payload] : cp.sections)
      if (n == "sched") payload = w.take();
  }

  cp.write_file(out_path);
  std::printf("converted %d layers to %s (block %d) via %s\n", converted_layers,
              target_kind_name.c_str(), target_block, method_name.c_str());
  std::printf("max realized-weight change: %.10g\n", max_change);
  return 0;
}

int cmd_measure(const std::string& ckpt_path, const std::string& export_dir) {
  Checkpoint cp = Checkpoint::read_file(ckpt_path);

  // manifest: model name -> trainable
  std::vector<std::pair<std::string, bool>> manifest;
  {
    ByteReader r(cp.get("manifest"));
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
      std::string name = r.str();
      bool trainable = r.u8() != 0;
      manifest.push_back({name, trainable});
    }
  }
  if (!export_dir.empty()) ensure_dir(export_dir);

  std::vector<Mlp> models;
  std::vector<LayerView> views;
  std::printf("checkpoint: %s\n", ckpt_path.c_str());
  for (const auto& [name, trainable] : manifest) {
    ByteReader r(cp.get("model:" + name));
    models.push_back(read_mlp(r));
    if (!trainable) continue;
    for (const auto& l : models.back().layers) views.push_back({&l.weight, l.compressed});
  }

  size_t model_idx = 0;
  for (const auto& [name, trainable] : manifest) {
    const Mlp& mlp = models[model_idx++];
    std::printf("model %s%s:\n", name.c_str(), trainable ? "" : " (mirror, not counted)");
    for (size_t l = 0; l < mlp.layers.size(); ++l) {
      const auto& layer = mlp.layers[l];
      const auto& p = *layer.weight.pattern;
      std::printf("  layer %zu: %dx%d %s", l, p.rows, p.cols, kind_name(p.kind));
      if (p.kind != PatternKind::Dense) std::printf(" B=%d", p.block);
      if (layer.compressed) {
        auto blob = encode_bitmap(layer.weight);
        std::printf(", S=%.6g, bitmap %zu bytes (payload %llu bits)",
                    layer.weight.sparsity(), blob.bytes.size(),
                    static_cast<unsigned long long>(blob.payload_bits));
        if (trainable && !export_dir.empty()) {
          std::string path =
              export_dir + "/" + name + "_layer" + std::to_string(l) + ".gstb";
          FILE* f = std::fopen(path.c_str(), "wb");
          if (!f) throw std::runtime_error("cannot write " + path);
          std::fwrite(blob.bytes.data(), 1, blob.bytes.size(), f);
          std::fclose(f);
        }
      } else {
        std::printf(", uncompressed");
      }
      std::printf("\n");
    }
  }

  auto rep = measure(views);
  double frac = rep.p_total ? static_cast<double>(rep.p_comp) / rep.p_total : 0.0;
  std::printf("global: S=%.10g, effective B=%.10g, p_comp/p_total=%zu/%zu=%.10g\n",
              rep.s_global, rep.effective_block, rep.p_comp, rep.p_total, frac);
  std::printf("cr_ideal   = %.10g\n", cr_ideal(rep.effective_block, rep.s_global, frac));
  std::printf("cr_bitmap  = %.10g\n", cr_bitmap(rep.effective_block, rep.s_global, frac));
  std::printf("cr_exact   = %.10g\n", cr_exact(views));
  return 0;
}

int cmd_report(const std::string& runs_dir, const std::string& out_dir) {
  std::vector<LoadedLog> logs;
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.size() > 4 && name.substr(name.size() - 4) == ".csv" && name != "aggregate.csv" &&
        name != "summary.csv")
      paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) logs.push_back(load_runlog_csv(p));
  if (logs.empty()) throw std::runtime_error("no runlog CSVs in '" + runs_dir + "'");
  ensure_dir(out_dir);
  write_report(logs, out_dir);
  std::printf("wrote %s/summary.csv, reward.svg, cr.svg (%zu runs)\n", out_dir.c_str(),
              logs.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"group-sparse training engine"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", ckpt_path, method, target_kind, runs_dir, export_dir;
  std::string convert_out;
  int64_t seed_override = -1;
  int seeds = 5, jobs = 0, target_block = 2;

  auto* train = app.add_subcommand("train", "run one training experiment");
  train->add_option("--config", config_path, "run configuration file")->required();
  train->add_option("--seed", seed_override, "override [run] seed");
  train->add_option("--out", out_dir, "output directory");

  auto* sw = app.add_subcommand("sweep", "run several seeds and aggregate");
  sw->add_option("--config", config_path, "run configuration file")->required();
  sw->add_option("--seeds", seeds, "number of seeds")->required();
  sw->add_option("--out", out_dir, "output directory");
  sw->add_option("--jobs", jobs, "parallel runs (default GST_THREADS or cores)");

  auto* conv = app.add_subcommand("convert", "block size conversion on a checkpoint");
  conv->add_option("--checkpoint", ckpt_path, "input .gstc")->required();
  conv->add_option("--method", method, "friendly | projection")->required();
  conv->add_option("--target-kind", target_kind, "target pattern kind")->required();
  conv->add_option("--target-block", target_block, "target block size")->required();
  conv->add_option("--out", convert_out, "output .gstc")->required();

  auto* meas = app.add_subcommand("measure", "sparsity and compression report");
  meas->add_option("--checkpoint", ckpt_path, "input .gstc")->required();
  meas->add_option("--export-gstb", export_dir, "write per-layer bitmap blobs here");

  auto* rep = app.add_subcommand("report", "summarize runlogs and draw charts");
  rep->add_option("--runs", runs_dir, "directory of runlog CSVs")->required();
  rep->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, seed_override, out_dir);
    if (sw->parsed()) return cmd_sweep(config_path, seeds, out_dir, jobs);
    if (conv->parsed())
      return cmd_convert(ckpt_path, method, target_kind, target_block, convert_out);
    if (meas->parsed()) return cmd_measure(ckpt_path, export_dir);
    if (rep->parsed()) return cmd_report(runs_dir, out_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
