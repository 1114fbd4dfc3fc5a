#include "gst/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace gst {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Grouped: return "grouped";
    case Phase::Converted: return "converted";
    case Phase::Released: return "released";
  }
  return "?";
}

void validate(const GstConfig& cfg) {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(cfg.p_step)) throw ConfigError("p_step must be in [0,1]");
  if (!in01(cfg.s_shift)) throw ConfigError("s_shift must be in [0,1]");
  if (!in01(cfg.s_ub)) throw ConfigError("s_ub must be in [0,1]");
  if (cfg.p_fre == 0) throw ConfigError("p_fre must be positive");
  if (cfg.block < 1) throw ConfigError("block must be >= 1");
  if (cfg.block > 1 && cfg.kind == PatternKind::Dense)
    throw ConfigError("block > 1 needs a grouped pattern kind");
  if (cfg.conversion) {
    if (!in01(cfg.conversion->at_sparsity)) throw ConfigError("convert_at must be in [0,1]");
    if (!(cfg.conversion->at_sparsity < cfg.s_shift))
      throw ConfigError("convert_at must be below s_shift");
  }
  if (cfg.scheduler == SchedulerKind::Gradual) {
    if (!in01(cfg.gradual.s_i) || !in01(cfg.gradual.s_f))
      throw ConfigError("gradual sparsities must be in [0,1]");
    if (cfg.gradual.n == 0 || cfg.gradual.delta == 0)
      throw ConfigError("gradual n and delta must be positive");
  }
}

bool grouping_enabled(const GstConfig& cfg) { return cfg.block > 1 && cfg.s_shift != 0.0; }

void init_gst(Mlp& mlp, const GstConfig& cfg) {
  if (!grouping_enabled(cfg)) return;
  for (auto& layer : mlp.layers) {
    if (!layer.compressed) continue;
    try {
      auto pattern = build_pattern(cfg.kind, layer.out_dim(), layer.in_dim(), cfg.block);
      layer.weight = project(realize(layer.weight), std::move(pattern));
    } catch (const StructureError&) {
      layer.compressed = false;  // indivisible dims: leave dense, exclude from the schedule
    }
  }
}

double gradual_target(uint64_t t, const GradualParams& g) {
  uint64_t ramp = g.n * g.delta;
  if (t <= g.t0) return g.s_i;
  if (t >= g.t0 + ramp) return g.s_f;
  double frac = static_cast<double>(t - g.t0) / static_cast<double>(ramp);
  double rem = 1.0 - frac;
  return g.s_f + (g.s_i - g.s_f) * rem * rem * rem;
}

bool rwp_step(SchedulerState& state, std::optional<double> r_new, const GstConfig& cfg,
              const std::function<void(double)>& prune) {
  if (!r_new) return false;
  if (state.r_prev && !(*r_new > *state.r_prev)) return false;
  state.p_th = std::min(1.0, state.p_th + cfg.p_step);
  if (prune) prune(state.p_th);
  return true;
}

void gst_tick(SchedulerState& state, const GstHooks& hooks, std::optional<double> r_new,
              const GstConfig& cfg) {
  // (a) measure
  state.s_now = hooks.measure().s_global;

  // (b) phase shift: fires exactly once, the first time sparsity reaches
  // s_shift; the update that follows this tick already runs ungrouped
  if (state.phase != Phase::Released && state.s_now >= cfg.s_shift) {
    if (hooks.release) hooks.release();
    state.phase = Phase::Released;
  }

  // (c) block size conversion, only reachable while still grouped
  if (cfg.conversion && !state.conversion_done && state.phase == Phase::Grouped &&
      state.s_now >= cfg.conversion->at_sparsity) {
    if (hooks.convert) hooks.convert();
    state.phase = Phase::Converted;
    state.conversion_done = true;
  }

  // (d) pruning check
  if (state.t % cfg.p_fre == 0 && state.t > cfg.p_start && state.s_now < cfg.s_ub) {
    if (cfg.scheduler == SchedulerKind::Rwp) {
      rwp_step(state, r_new, cfg, hooks.prune);
    } else {
      double target = gradual_target(state.t, cfg.gradual);
      if (target > state.p_th) {
        state.p_th = std::min(1.0, target);
        if (hooks.prune) hooks.prune(state.p_th);
      }
    }
  }

  // (e) record the best return, strictly after the pruning block
  if (r_new && (!state.r_prev || *r_new > *state.r_prev)) state.r_prev = *r_new;

  state.t += 1;
}

double average_cr(const std::vector<double>& per_step_cr) {
  if (per_step_cr.empty()) throw std::invalid_argument("average_cr: empty log");
  double acc = 0;
  for (double v : per_step_cr) acc += v;
  return acc / static_cast<double>(per_step_cr.size());
}

}  // namespace gst
