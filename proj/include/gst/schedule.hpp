#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "gst/netcore.hpp"

namespace gst {

enum class SchedulerKind : uint8_t { Rwp = 0, Gradual = 1 };
enum class Phase : uint8_t { Grouped = 0, Converted = 1, Released = 2 };

const char* phase_name(Phase p);

// Cubic schedule parameters for the gradual-pruning baseline.
struct GradualParams {
  double s_i = 0.0;      // initial sparsity
  double s_f = 0.75;     // final sparsity
  uint64_t t0 = 0;       // ramp start
  uint64_t n = 20;       // number of pruning steps
  uint64_t delta = 500;  // pruning frequency within the ramp
};

struct ConversionConfig {
  double at_sparsity = 0.0;  // trigger threshold on global sparsity
  ConvertMethod method = ConvertMethod::Friendly;
  PatternKind target_kind = PatternKind::B4FriendlyB2;
  int target_block = 2;
};

struct GstConfig {
  SchedulerKind scheduler = SchedulerKind::Rwp;
  double p_step = 0.05;   // sparsity added per pruning event
  uint64_t p_start = 0;   // pruning may begin after this timestep
  uint64_t p_fre = 1000;  // pruning check period
  double s_ub = 0.75;     // no event starts once global sparsity reaches this
  int block = 1;          // initial block size; 1 disables grouping
  PatternKind kind = PatternKind::Circulant;  // initial grouped pattern
  double s_shift = 0.0;   // grouping released once sparsity reaches this
  std::optional<ConversionConfig> conversion;
  GradualParams gradual;
};

// Throws ConfigError on out-of-range fields.
void validate(const GstConfig& cfg);

struct SchedulerState {
  double p_th = 0.0;              // current pruning threshold, non-decreasing
  std::optional<double> r_prev;   // highest episode return seen; unset until
                                  // the first episode completes, so the first
                                  // return always counts as a record
  uint64_t t = 0;                 // timestep of the next tick
  double s_now = 0.0;
  Phase phase = Phase::Grouped;
  bool conversion_done = false;
};

// Callbacks the controller drives; the model side stays behind them.
struct GstHooks {
  std::function<SparsityReport()> measure;
  std::function<void()> release;       // unpack every grouped layer
  std::function<void()> convert;       // apply the configured conversion
  std::function<void(double)> prune;   // magnitude-prune each layer to target
};

// Project every compressible layer of the model onto the configured block
// pattern, iff block > 1 and s_shift != 0. Layers whose dims are not
// divisible get unmarked and stay dense.
void init_gst(Mlp& mlp, const GstConfig& cfg);
// Same decision without a model, for bookkeeping paths.
bool grouping_enabled(const GstConfig& cfg);

// Cubic target: s_f + (s_i - s_f) * (1 - (t - t0)/(n*delta))^3, clamped to
// the ramp's endpoint values outside [t0, t0 + n*delta].
double gradual_target(uint64_t t, const GradualParams& g);

// One reward-aware pruning decision. Fires iff a defined r_new strictly
// beats r_prev (or r_prev is still unset); then p_th rises by p_step
// (capped at 1) and `prune` runs at the new threshold. r_prev itself is
// updated later in the tick, after the pruning block.
bool rwp_step(SchedulerState& state, std::optional<double> r_new, const GstConfig& cfg,
              const std::function<void(double)>& prune);

// One controller tick per environment timestep, after experience generation
// and before the parameter update. In order: (a) measure sparsity,
// (b) release the grouping once sparsity reaches s_shift, (c) apply the
// configured block conversion once sparsity reaches its threshold,
// (d) run the pruning check when t is a legal instant, (e) fold r_new into
// r_prev. Advances state.t.
void gst_tick(SchedulerState& state, const GstHooks& hooks, std::optional<double> r_new,
              const GstConfig& cfg);

// Arithmetic mean of per-timestep compression ratios over a uniform log grid.
double average_cr(const std::vector<double>& per_step_cr);

}  // namespace gst
