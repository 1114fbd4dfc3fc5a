#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gst/checkpoint.hpp"
#include "gst/learners.hpp"
#include "gst/rlenv.hpp"
#include "gst/schedule.hpp"

namespace gst {

enum class Task : uint8_t { Cartpole = 0, Pointmass = 1, Scripted = 2, TwoSpirals = 3 };
enum class LearnerKind : uint8_t { Dqn = 0, Td3Lite = 1, Supervised = 2, None = 3 };

const char* task_name(Task t);
const char* learner_name(LearnerKind k);

struct RunConfig {
  Task task = Task::Cartpole;
  LearnerKind learner = LearnerKind::Dqn;
  uint64_t total_timesteps = 50000;
  uint64_t eval_period = 2000;
  int eval_episodes = 10;
  uint64_t log_period = 100;
  uint64_t seed = 1;

  std::vector<int> hidden = {64, 64};
  Act activation = Act::Relu;

  AdamParams adam;
  GstConfig gst;

  DqnHyper dqn;
  Td3Hyper td3;
  SupervisedHyper supervised;
  std::vector<double> scripted_rewards = {1, 3, 2, 5};

  // Strict parse: unknown sections/keys and malformed values are errors with
  // a line diagnostic. No silent defaults: resolved_text() dumps every key.
  static RunConfig from_file(const std::string& path);
  static RunConfig from_string(const std::string& text, const std::string& origin = "<string>");
  std::string resolved_text() const;
  void check() const;  // cross-field validation
};

struct RunRow {
  uint64_t timestep = 0;
  std::optional<double> episode_return;  // RWP reward signal seen this window
  std::optional<double> eval_return;     // deterministic evaluation, if any
  double s_now = 0.0;                    // controller's sparsity at the tick
  double p_th = 0.0;
  Phase phase = Phase::Grouped;
  double cr_formula = 0.0;  // bitmap-overhead formula at end of step
  double cr_exact = 0.0;    // exact bit accounting at end of step
  double wall_ms = 0.0;
};

std::string csv_header();
std::string csv_row(const RunRow& row);
// strips the wall-time column; the determinism contract covers the rest
std::string csv_row_stable(const std::string& line);

// One experiment: a task, a learner, a scheduler, and a log. Everything
// derives from (config, seed); wall time is the only nondeterministic output.
class Run {
 public:
  Run(const RunConfig& cfg, uint64_t seed);
  // the controller hooks capture `this`
  Run(const Run&) = delete;
  Run& operator=(const Run&) = delete;

  // one timestep: experience, controller tick, update, evaluation, logging
  bool step();
  void run_all();
  bool finished() const { return t_ >= cfg_.total_timesteps; }
  uint64_t timestep() const { return t_; }
  uint64_t episodes() const { return episodes_done_; }

  const std::vector<RunRow>& rows() const { return rows_; }
  const SchedulerState& scheduler() const { return sched_; }
  const RunConfig& config() const { return cfg_; }
  uint64_t seed() const { return seed_; }
  std::vector<NetFamily> families();
  std::vector<LayerView> views();
  double last_eval() const { return last_eval_ ? *last_eval_ : 0.0; }

  // full-fidelity snapshot: resuming reproduces the uninterrupted run's rows
  void save(const std::string& path) const;
  static std::unique_ptr<Run> resume(const RunConfig& cfg, const std::string& path);

  // appended to by step(); flushed per row when attached
  void attach_csv(FILE* f) { csv_ = f; }

 private:
  explicit Run(const RunConfig& cfg);
  void build_learner(bool init_structure);
  std::optional<double> experience(uint64_t t);
  void update_nets(uint64_t t);
  void maybe_eval(uint64_t t);
  void log_row(uint64_t t);
  Checkpoint snapshot() const;
  void restore(const Checkpoint& cp);

  RunConfig cfg_;
  uint64_t seed_ = 0;
  uint64_t t_ = 0;
  uint64_t episodes_done_ = 0;

  Rng env_rng_{0};
  std::optional<CartPole> cartpole_;
  std::optional<PointMass> pointmass_;
  std::optional<ScriptedEnv> scripted_;
  std::unique_ptr<DqnLearner> dqn_;
  std::unique_ptr<Td3LiteLearner> td3_;
  std::unique_ptr<SupervisedLearner> sup_;
  Mlp scripted_model_;  // pruning target when no learner runs
  OptimState scripted_optim_;

  SchedulerState sched_;
  GstHooks hooks_;

  std::vector<float> cur_state_;
  bool episode_live_ = false;
  double episode_return_ = 0.0;
  std::optional<double> r_new_;        // latest completed-episode return
  std::optional<double> window_episode_;
  std::optional<double> window_eval_;
  std::optional<double> last_eval_;

  std::vector<RunRow> rows_;
  FILE* csv_ = nullptr;
  double wall_start_ms_ = 0.0;
};

struct SweepResult {
  std::vector<uint64_t> seeds;
  std::vector<std::vector<RunRow>> per_seed;  // aligned on the log grid
};

// k seeds (base, base+1, ...), share-nothing, run in parallel up to
// `parallelism` threads (0 = auto).
SweepResult sweep(const RunConfig& cfg, int k, int parallelism = 0);

// cell-wise mean/min/max across seeds on the shared log grid
struct AggregateRow {
  uint64_t timestep = 0;
  // per column: count of seeds with a value, mean, min, max
  struct Stat {
    int n = 0;
    double mean = 0, min = 0, max = 0;
  };
  Stat episode_return, eval_return, s_now, p_th, cr_formula, cr_exact;
};
std::vector<AggregateRow> aggregate(const SweepResult& sweep);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

}  // namespace gst
