#pragma once

// Shared wiring for scheduler-level tests: a small model bank driven through
// gst_tick with the same hooks the training harness uses.

#include <optional>
#include <vector>

#include "gst/learners.hpp"
#include "gst/schedule.hpp"

namespace testing_fixtures {

struct TickFixture {
  std::vector<gst::Mlp> models;
  std::vector<gst::OptimState> optims;
  gst::GstConfig cfg;
  gst::SchedulerState state;
  gst::GstHooks hooks;

  TickFixture(const std::vector<std::vector<int>>& dim_sets, const gst::GstConfig& config,
              uint64_t seed = 1)
      : cfg(config) {
    gst::Rng rng(seed);
    for (const auto& dims : dim_sets) {
      std::vector<gst::Act> acts(dims.size() - 1, gst::Act::Tanh);
      acts.back() = gst::Act::Identity;
      gst::Mlp mlp = gst::make_mlp(rng, dims, acts);
      for (size_t l = 1; l + 1 < mlp.layers.size(); ++l) mlp.layers[l].compressed = true;
      models.push_back(std::move(mlp));
    }
    for (auto& m : models) optims.push_back(gst::make_optim(m, {}));

    gst::family_init_structure(families(), cfg);
    hooks.measure = [this] { return gst::measure(gst::family_views(families())); };
    hooks.release = [this] { gst::family_release(families()); };
    hooks.convert = [this] {
      if (cfg.conversion) gst::family_convert(families(), *cfg.conversion);
    };
    hooks.prune = [this](double target) { gst::family_prune(families(), target); };
  }

  std::vector<gst::NetFamily> families() {
    std::vector<gst::NetFamily> fams;
    for (size_t i = 0; i < models.size(); ++i)
      fams.push_back({&models[i], nullptr, &optims[i]});
    return fams;
  }

  void tick(std::optional<double> r_new) { gst::gst_tick(state, hooks, r_new, cfg); }
};

}  // namespace testing_fixtures
