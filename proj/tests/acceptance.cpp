// Acceptance suite: one criterion per test case, one printed PASS/FAIL line
// each. Tolerances are pinned here, not configurable.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <chrono>
#include <cstdio>
#include <mutex>
#include <thread>

#include "doctest.h"
#include "gst/harness.hpp"
#include "oracle_scheduler.hpp"

using namespace gst;

namespace {

double now_s() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void verdict(int criterion, const char* name, bool ok) {
  std::printf("CRITERION %d [%s]: %s\n", criterion, name, ok ? "PASS" : "FAIL");
  std::fflush(stdout);
}

// per-step scheduler trace with the legality/monotonicity audit used by
// criterion 9
struct TraceAudit {
  bool monotone = true;
  bool legal_instants = true;
  std::string detail;

  void observe(uint64_t t_before, const SchedulerState& prev, const SchedulerState& cur,
               const GstConfig& cfg) {
    double prev_r = prev.r_prev ? *prev.r_prev : -1e308;
    double cur_r = cur.r_prev ? *cur.r_prev : -1e308;
    if (cur.p_th < prev.p_th || cur.s_now < prev.s_now || cur_r < prev_r ||
        static_cast<int>(cur.phase) < static_cast<int>(prev.phase)) {
      monotone = false;
      detail += "non-monotone at t=" + std::to_string(t_before) + "; ";
    }
    if (cur.p_th > prev.p_th) {  // a pruning event fired inside this tick
      bool legal = t_before % cfg.p_fre == 0 && t_before > cfg.p_start && cur.s_now < cfg.s_ub;
      if (!legal) {
        legal_instants = false;
        detail += "illegal prune instant t=" + std::to_string(t_before) + "; ";
      }
    }
  }
};

struct RunOutcome {
  std::vector<RunRow> rows;
  double best_eval = -1e308;
  double final_eval = 0;
  uint64_t episodes_at_solve = 0;  // 0 = never reached 195
  double avg_cr = 0;
  double wall_s = 0;
  TraceAudit audit;
};

// steps a run to completion (or until `stop_at_eval` is reached), auditing
// the scheduler trace along the way
RunOutcome run_audited(const RunConfig& cfg, uint64_t seed, double stop_at_eval = 1e308) {
  double t0 = now_s();
  Run run(cfg, seed);
  RunOutcome out;
  SchedulerState prev = run.scheduler();
  while (!run.finished()) {
    uint64_t t = run.timestep();
    run.step();
    out.audit.observe(t, prev, run.scheduler(), cfg.gst);
    prev = run.scheduler();
    if (cfg.eval_period && run.timestep() % cfg.eval_period == 0 &&
        cfg.task != Task::Scripted) {
      double ev = run.last_eval();
      out.final_eval = ev;
      out.best_eval = std::max(out.best_eval, ev);
      if (ev >= 195.0 && out.episodes_at_solve == 0) out.episodes_at_solve = run.episodes();
      if (ev >= stop_at_eval) break;
    }
  }
  out.wall_s = now_s() - t0;
  out.rows = run.rows();
  if (!out.rows.empty()) {
    double acc = 0;
    for (const auto& r : out.rows) acc += r.cr_formula;
    out.avg_cr = acc / static_cast<double>(out.rows.size());
  }
  return out;
}

std::vector<RunOutcome> run_seeds(const RunConfig& cfg, const std::vector<uint64_t>& seeds,
                                  double stop_at_eval = 1e308) {
  std::vector<RunOutcome> outs(seeds.size());
  std::vector<std::thread> threads;
  for (size_t i = 0; i < seeds.size(); ++i)
    threads.emplace_back(
        [&, i] { outs[i] = run_audited(cfg, seeds[i], stop_at_eval); });
  for (auto& t : threads) t.join();
  return outs;
}

RunConfig cartpole_config() {
  RunConfig cfg;
  cfg.task = Task::Cartpole;
  cfg.learner = LearnerKind::Dqn;
  cfg.total_timesteps = 40000;
  cfg.eval_period = 1000;
  cfg.eval_episodes = 10;
  cfg.log_period = 200;
  cfg.hidden = {64, 64};
  cfg.adam.lr = 1e-3;
  cfg.dqn.gamma = 0.99;
  cfg.dqn.buffer_capacity = 50000;
  cfg.dqn.batch = 64;
  cfg.dqn.warmup = 1000;
  cfg.dqn.eps_start = 1.0;
  cfg.dqn.eps_end = 0.05;
  cfg.dqn.eps_decay_steps = 10000;
  cfg.dqn.target_sync = 500;
  cfg.dqn.update_every = 2;
  cfg.gst.block = 1;
  cfg.gst.s_shift = 0.0;
  cfg.gst.p_step = 0.0;
  cfg.gst.s_ub = 0.5;
  cfg.gst.p_fre = 1;
  cfg.gst.p_start = 2000;
  return cfg;
}

RunConfig spirals_config(bool gst) {
  RunConfig cfg;
  cfg.task = Task::TwoSpirals;
  cfg.learner = LearnerKind::Supervised;
  cfg.total_timesteps = 4000;
  cfg.eval_period = 100;
  cfg.log_period = 100;
  cfg.hidden = {64, 64};
  cfg.activation = Act::Relu;
  cfg.adam.lr = 2e-3;
  cfg.supervised.points = 2000;
  cfg.supervised.batch = 64;
  cfg.supervised.data_seed = 7;
  cfg.supervised.noise = 0.05;
  if (gst) {
    cfg.gst.block = 4;
    cfg.gst.kind = PatternKind::Circulant;
    cfg.gst.s_shift = 0.5;
    cfg.gst.s_ub = 0.75;
    cfg.gst.p_step = 0.05;
    cfg.gst.p_fre = 100;
    cfg.gst.p_start = 200;
  } else {
    cfg.gst.block = 1;
    cfg.gst.s_shift = 0.0;
    cfg.gst.p_step = 0.0;
  }
  return cfg;
}

const std::vector<uint64_t> kSeeds = {100, 101, 102, 103, 104};

// shared across criteria 6, 7 and 9; the RL sweeps run once
struct RlResults {
  std::vector<RunOutcome> baseline, gst, rwp;
  double baseline_final_mean = 0;
};

RlResults& rl_results() {
  static RlResults results = [] {
    RlResults r;
    RunConfig base = cartpole_config();
    r.baseline = run_seeds(base, kSeeds, 195.0);  // may stop early once solved

    RunConfig gst = cartpole_config();
    gst.gst.block = 2;
    gst.gst.kind = PatternKind::Circulant;
    gst.gst.s_shift = 1.0;
    gst.gst.s_ub = 0.5;
    gst.gst.p_step = 0.05;
    r.gst = run_seeds(gst, kSeeds);

    RunConfig rwp = cartpole_config();
    rwp.gst.block = 1;
    rwp.gst.s_shift = 0.0;
    rwp.gst.s_ub = 0.5;
    rwp.gst.p_step = 0.05;
    r.rwp = run_seeds(rwp, kSeeds);

    double acc = 0;
    for (const auto& o : r.baseline) acc += o.final_eval;
    r.baseline_final_mean = acc / static_cast<double>(r.baseline.size());
    return r;
  }();
  return results;
}

struct SpiralResults {
  std::vector<RunOutcome> baseline, gst;
  double wall_s = 0;
};

SpiralResults& spiral_results() {
  static SpiralResults results = [] {
    SpiralResults r;
    double t0 = now_s();
    r.baseline = run_seeds(spirals_config(false), kSeeds);
    r.gst = run_seeds(spirals_config(true), kSeeds);
    r.wall_s = now_s() - t0;
    return r;
  }();
  return results;
}

// scripted runs audited for criterion 1 and folded into criterion 9
std::vector<TraceAudit> g_scripted_audits;

}  // namespace

TEST_CASE("criterion 1: scheduler oracle equivalence") {
  double t0 = now_s();
  Rng rng(0xACC1);
  const std::vector<std::vector<int>> hidden_sets = {{8, 8}, {8, 4}, {12, 8}, {10, 6}};
  int mismatches = 0;
  size_t steps_checked = 0;

  for (int trial = 0; trial < 50; ++trial) {
    RunConfig cfg;
    cfg.task = Task::Scripted;
    cfg.learner = LearnerKind::None;
    cfg.log_period = 1;
    cfg.hidden = hidden_sets[rng.next_below(hidden_sets.size())];

    cfg.gst.p_step = 0.02 + 0.28 * rng.next_double();
    cfg.gst.p_fre = 1 + rng.next_below(6);
    cfg.gst.p_start = rng.next_below(12);
    cfg.gst.s_ub = 0.3 + 0.7 * rng.next_double();
    cfg.gst.s_shift = rng.next_below(4) == 0 ? 0.0 : rng.next_double();
    int pick = static_cast<int>(rng.next_below(4));
    if (pick == 0) {
      cfg.gst.block = 1;
      cfg.gst.kind = PatternKind::Dense;
    } else if (pick == 1) {
      cfg.gst.block = 2;
      cfg.gst.kind = PatternKind::Circulant;
    } else if (pick == 2) {
      cfg.gst.block = 4;
      cfg.gst.kind = PatternKind::Circulant;
    } else {
      cfg.gst.block = 4;
      cfg.gst.kind = PatternKind::B2FriendlyB4;
    }
    cfg.gst.scheduler = rng.next_below(3) == 0 ? SchedulerKind::Gradual : SchedulerKind::Rwp;
    cfg.gst.gradual = {0.0, 0.5 + 0.5 * rng.next_double(), rng.next_below(30),
                       1 + rng.next_below(12), 1 + rng.next_below(6)};
    if (cfg.gst.block == 4 && cfg.gst.s_shift > 0.2 && rng.next_below(2) == 0) {
      cfg.gst.conversion = ConversionConfig{
          cfg.gst.s_shift / 2, ConvertMethod::Friendly,
          cfg.gst.kind == PatternKind::B2FriendlyB4 ? PatternKind::Circulant
                                                    : PatternKind::B4FriendlyB2,
          2};
    }

    size_t len = 20 + rng.next_below(481);  // <= 500
    cfg.total_timesteps = len;
    cfg.scripted_rewards.clear();
    double walk = rng.uniform(-5, 5);
    for (size_t t = 0; t < len; ++t) {
      walk += rng.uniform(-1, 2);
      cfg.scripted_rewards.push_back(walk);
    }

    // straight-line oracle view of the compressed layers after init
    std::vector<oracle::Layer> layers;
    bool grouped = cfg.gst.block > 1 && cfg.gst.s_shift != 0.0;
    for (size_t l = 0; l + 1 < cfg.hidden.size(); ++l) {
      int rows = cfg.hidden[l + 1], cols = cfg.hidden[l];
      size_t positions = static_cast<size_t>(rows) * cols;
      size_t size = 1;
      if (grouped) {
        bool divisible = cfg.gst.kind == PatternKind::Circulant
                             ? rows % cfg.gst.block == 0 && cols % cfg.gst.block == 0
                             : rows % 4 == 0 && cols % 4 == 0;
        if (!divisible) continue;
        size = static_cast<size_t>(cfg.gst.block);
      }
      layers.push_back({positions, size, positions / size, 0});
    }
    std::vector<std::optional<double>> rewards;
    for (double v : cfg.scripted_rewards) rewards.push_back(v);
    auto expect = oracle::trace(layers, rewards, cfg.gst);

    Run run(cfg, 9000 + trial);
    TraceAudit audit;
    SchedulerState prev = run.scheduler();
    for (size_t t = 0; t < len; ++t) {
      run.step();
      const SchedulerState& s = run.scheduler();
      audit.observe(t, prev, s, cfg.gst);
      prev = s;
      double engine_r = s.r_prev ? *s.r_prev : -std::numeric_limits<double>::infinity();
      bool same = s.p_th == expect[t].p_th && engine_r == expect[t].r_prev &&
                  s.s_now == expect[t].s_now &&
                  static_cast<int>(s.phase) == expect[t].phase;
      if (!same) ++mismatches;
      ++steps_checked;
    }
    g_scripted_audits.push_back(audit);
  }

  double elapsed = now_s() - t0;
  bool ok = mismatches == 0 && steps_checked > 10000 && elapsed < 10.0;
  std::printf("  (%zu steps compared across 50 runs, %d mismatches, %.2fs)\n", steps_checked,
              mismatches, elapsed);
  verdict(1, "scheduler-oracle-equivalence", ok);
  CHECK(ok);
}

TEST_CASE("criterion 2: formula/accounting parity") {
  // tagged unit values hold exactly
  bool units_ok = cr_bitmap(4, 0, 1) == 0.6875 && cr_bitmap(1, 0, 1) == -0.0625 &&
                  cr_bitmap(4, 1, 1) == 0.9375 && cr_ideal(2, 0.5, 1) == 0.75;

  Rng rng(0xACC2);
  struct KindChoice { PatternKind kind; int block; };
  const KindChoice choices[] = {
      {PatternKind::Dense, 1},
      {PatternKind::Circulant, 2},
      {PatternKind::Circulant, 4},
      {PatternKind::B4FriendlyB2, 2},
      {PatternKind::B2FriendlyB4, 4},
  };
  int failures = 0;
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto choice = choices[rng.next_below(5)];
    std::vector<CompressedTensor> tensors;
    std::vector<bool> comp;
    int nlayers = 1 + static_cast<int>(rng.next_below(3));
    for (int l = 0; l < nlayers; ++l) {
      int r = 4 * (1 + static_cast<int>(rng.next_below(6)));
      int c = 4 * (1 + static_cast<int>(rng.next_below(6)));
      auto ct = project(uniform_init(rng, r, c, 1.0),
                        build_pattern(choice.kind, r, c, choice.block));
      magnitude_prune_inplace(ct, rng.next_double());
      tensors.push_back(std::move(ct));
      comp.push_back(true);
    }
    if (rng.next_below(2)) {
      tensors.push_back(project(uniform_init(rng, 6, 10, 1.0),
                                build_pattern(PatternKind::Dense, 6, 10, 1)));
      comp.push_back(false);
    }
    std::vector<LayerView> views;
    for (size_t i = 0; i < tensors.size(); ++i) views.push_back({&tensors[i], comp[i]});
    auto rep = measure(views);
    double frac = static_cast<double>(rep.p_comp) / static_cast<double>(rep.p_total);
    double diff = std::fabs(cr_exact(views) - cr_bitmap(rep.effective_block, rep.s_global, frac));
    worst = std::max(worst, diff);
    if (diff > 1e-12) ++failures;
  }
  std::printf("  (200 models, worst |cr_exact - cr_bitmap| = %.3g)\n", worst);
  bool ok = units_ok && failures == 0;
  verdict(2, "formula-accounting-parity", ok);
  CHECK(ok);
}

TEST_CASE("criterion 3: gradient correctness") {
  double t0 = now_s();
  struct KindChoice { PatternKind kind; int block; };
  const KindChoice kinds[] = {
      {PatternKind::Dense, 1},
      {PatternKind::Circulant, 2},
      {PatternKind::Circulant, 4},
      {PatternKind::B4FriendlyB2, 2},
      {PatternKind::B2FriendlyB4, 4},
  };
  Rng rng(0xACC3);
  double worst = 0;

  for (const auto& choice : kinds) {
    for (double density : {0.0, 0.5}) {
      Mlp mlp = make_mlp(rng, {4, 8, 8, 3}, {Act::Tanh, Act::Tanh, Act::Identity});
      if (choice.kind != PatternKind::Dense) {
        auto& mid = mlp.layers[1];
        mid.weight = project(realize(mid.weight),
                             build_pattern(choice.kind, 8, 8, choice.block));
        mid.compressed = true;
        if (density > 0) magnitude_prune_inplace(mid.weight, density);
      }
      std::vector<float> x(4);
      for (auto& v : x) v = static_cast<float>(rng.uniform(-1, 1));
      auto cache = forward_cached(mlp, x);
      auto grads = backward(mlp, cache, cache.output);

      // independent double-precision loss for the central differences
      std::vector<double> flat;
      for (const auto& l : mlp.layers) {
        for (float v : l.weight.values) flat.push_back(v);
        for (float v : l.bias) flat.push_back(v);
      }
      auto loss = [&](const std::vector<double>& vals) {
        std::vector<double> cur(x.begin(), x.end());
        size_t k = 0;
        for (size_t l = 0; l < mlp.layers.size(); ++l) {
          const auto& layer = mlp.layers[l];
          const GroupPattern& p = *layer.weight.pattern;
          std::vector<double> group_vals(layer.weight.groups());
          for (auto& v : group_vals) v = vals[k++];
          std::vector<double> next(layer.out_dim());
          for (int i = 0; i < layer.out_dim(); ++i) {
            double acc = vals[k + i];
            for (int j = 0; j < layer.in_dim(); ++j) {
              uint32_t g = p.group_at(i, j);
              if (layer.weight.mask[g]) acc += group_vals[g] * cur[j];
            }
            next[i] = acc;
          }
          k += layer.bias.size();
          for (auto& v : next)
            if (mlp.acts[l] == Act::Tanh) v = std::tanh(v);
          cur = std::move(next);
        }
        double acc = 0;
        for (double v : cur) acc += 0.5 * v * v;
        return acc;
      };
      auto fd = finite_diff_grad(loss, flat, 1e-4);

      size_t k = 0;
      for (size_t l = 0; l < mlp.layers.size(); ++l) {
        for (uint32_t g = 0; g < mlp.layers[l].weight.groups(); ++g, ++k) {
          double analytic = mlp.layers[l].weight.mask[g] ? grads.weight[l][g] : 0.0;
          worst = std::max(worst,
                           std::fabs(analytic - fd[k]) / std::max(std::fabs(fd[k]), 1e-2));
        }
        for (size_t i = 0; i < mlp.layers[l].bias.size(); ++i, ++k)
          worst = std::max(worst,
                           std::fabs(grads.bias[l][i] - fd[k]) / std::max(std::fabs(fd[k]), 1e-2));
      }
    }
  }
  double elapsed = now_s() - t0;
  std::printf("  (max relative error %.3g, %.2fs)\n", worst, elapsed);
  bool ok = worst <= 1e-3 && elapsed < 30.0;
  verdict(3, "gradient-correctness", ok);
  CHECK(ok);
}

TEST_CASE("criterion 4: structure and conversion invariants") {
  Rng rng(0xACC4);
  bool structure_ok = true;

  // 10^4 random training steps across the grouped kinds
  struct KindChoice { PatternKind kind; int block; };
  const KindChoice kinds[] = {
      {PatternKind::Circulant, 2},
      {PatternKind::Circulant, 4},
      {PatternKind::B4FriendlyB2, 2},
      {PatternKind::B2FriendlyB4, 4},
  };
  for (const auto& choice : kinds) {
    Mlp mlp = make_mlp(rng, {4, 8, 8, 3}, {Act::Tanh, Act::Tanh, Act::Identity});
    auto& mid = mlp.layers[1];
    mid.weight = project(realize(mid.weight), build_pattern(choice.kind, 8, 8, choice.block));
    mid.compressed = true;
    OptimState opt = make_optim(mlp, {});
    for (int step = 0; step < 2500; ++step) {
      if (step == 800) magnitude_prune_inplace(mid.weight, 0.25);
      if (step == 1600) magnitude_prune_inplace(mid.weight, 0.5);
      std::vector<float> x(4);
      for (auto& v : x) v = static_cast<float>(rng.uniform(-1, 1));
      auto cache = forward_cached(mlp, x);
      optim_step(mlp, backward(mlp, cache, cache.output), opt);

      const auto& ct = mid.weight;
      Matrix m = realize(ct);
      for (uint32_t g = 0; g < ct.groups() && structure_ok; ++g) {
        float expect = ct.mask[g] ? ct.values[g] : 0.0f;
        for (uint32_t kk = ct.pattern->member_off[g]; kk < ct.pattern->member_off[g + 1]; ++kk)
          if (m.data[ct.pattern->member_pos[kk]] != expect) structure_ok = false;
      }
    }
  }

  // friendly conversions and release change realized weights by exactly 0
  bool friendly_ok = true;
  {
    struct Case { PatternKind src; int sb; PatternKind dst; int db; };
    for (auto [src, sb, dst, db] :
         {Case{PatternKind::Circulant, 4, PatternKind::B4FriendlyB2, 2},
          Case{PatternKind::B2FriendlyB4, 4, PatternKind::Circulant, 2}}) {
      auto ct = project(uniform_init(rng, 16, 16, 1.0), build_pattern(src, 16, 16, sb));
      magnitude_prune_inplace(ct, 0.3);
      auto before = realize(ct);
      auto converted = convert_friendly(ct, build_pattern(dst, 16, 16, db));
      if (realize(converted).data != before.data) friendly_ok = false;

      Mlp mlp = make_mlp(rng, {4, 16, 16, 3}, {Act::Tanh, Act::Tanh, Act::Identity});
      mlp.layers[1].weight = ct;
      mlp.layers[1].compressed = true;
      OptimState opt = make_optim(mlp, {});
      auto pre_release = realize(mlp.layers[1].weight);
      release_grouping(mlp.layers[1], &opt.layers[1]);
      if (realize(mlp.layers[1].weight).data != pre_release.data) friendly_ok = false;
    }
  }

  // projection conversion equals the group-mean oracle within 1e-6
  bool projection_ok = true;
  {
    auto ct = project(uniform_init(rng, 16, 16, 1.0),
                      build_pattern(PatternKind::Circulant, 16, 16, 4));
    auto target = build_pattern(PatternKind::Circulant, 16, 16, 2);
    auto converted = convert_projection(ct, target);
    Matrix realized = realize(ct);
    for (uint32_t g = 0; g < target->group_count; ++g) {
      double mean = 0;
      for (uint32_t kk = target->member_off[g]; kk < target->member_off[g + 1]; ++kk)
        mean += realized.data[target->member_pos[kk]];
      mean /= target->group_size(g);
      if (std::fabs(converted.values[g] - mean) > 1e-6) projection_ok = false;
    }
  }

  std::printf("  (structure %s, friendly/release %s, projection %s)\n",
              structure_ok ? "ok" : "BROKEN", friendly_ok ? "ok" : "BROKEN",
              projection_ok ? "ok" : "BROKEN");
  bool ok = structure_ok && friendly_ok && projection_ok;
  verdict(4, "structure-conversion-invariants", ok);
  CHECK(ok);
}

TEST_CASE("criterion 5: bitmap codec") {
  Rng rng(0xACC5);
  struct KindChoice { PatternKind kind; int block; };
  const KindChoice choices[] = {
      {PatternKind::Dense, 1},
      {PatternKind::Circulant, 2},
      {PatternKind::Circulant, 4},
      {PatternKind::B4FriendlyB2, 2},
      {PatternKind::B2FriendlyB4, 4},
  };
  int failures = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto choice = choices[rng.next_below(5)];
    int r = 4 * (1 + static_cast<int>(rng.next_below(8)));
    int c = 4 * (1 + static_cast<int>(rng.next_below(8)));
    auto ct = project(uniform_init(rng, r, c, 4.0), build_pattern(choice.kind, r, c, choice.block));
    magnitude_prune_inplace(ct, rng.next_double());

    auto blob = encode_bitmap(ct);
    if (blob.payload_bits != stored_bits(ct)) ++failures;
    CompressedTensor back = decode_bitmap(blob.bytes);
    if (!back.pattern->same_partition(*ct.pattern) || back.mask != ct.mask) {
      ++failures;
      continue;
    }
    for (uint32_t g = 0; g < ct.groups(); ++g) {
      // one half-precision rounding step
      float expect = half_to_float(float_to_half(ct.values[g]));
      if (ct.mask[g] && back.values[g] != expect) ++failures;
    }
    auto blob2 = encode_bitmap(back);
    if (blob2.bytes != blob.bytes) ++failures;
  }
  std::printf("  (500 tensors, %d failures)\n", failures);
  bool ok = failures == 0;
  verdict(5, "bitmap-codec", ok);
  CHECK(ok);
}

TEST_CASE("criterion 6: cart-pole reward parity") {
  auto& rl = rl_results();
  int base_solved = 0;
  double worst_wall = 0;
  for (const auto& o : rl.baseline) {
    if (o.episodes_at_solve > 0 && o.episodes_at_solve <= 500) ++base_solved;
    worst_wall = std::max(worst_wall, o.wall_s);
  }

  double target = 0.9 * rl.baseline_final_mean;
  int gst_ok_seeds = 0;
  for (const auto& o : rl.gst)
    if (o.best_eval >= target) ++gst_ok_seeds;

  std::printf("  (baseline solved on %d/5 seeds; mean final eval %.1f; GST reached %.1f on %d/5)\n",
              base_solved, rl.baseline_final_mean, target, gst_ok_seeds);
  for (size_t i = 0; i < rl.gst.size(); ++i)
    std::printf("    seed %llu: baseline final %.1f (ep %llu), gst best %.1f final s %.3f\n",
                static_cast<unsigned long long>(kSeeds[i]), rl.baseline[i].final_eval,
                static_cast<unsigned long long>(rl.baseline[i].episodes_at_solve),
                rl.gst[i].best_eval, rl.gst[i].rows.back().s_now);
  std::printf("  (slowest baseline seed %.1fs, budget 300s)\n", worst_wall);
  bool ok = base_solved >= 3 && gst_ok_seeds >= 3 && worst_wall < 300.0;
  verdict(6, "cartpole-no-reward-drop", ok);
  CHECK(ok);
}

TEST_CASE("criterion 7: average compression ratio gain") {
  auto& rl = rl_results();
  int ok_seeds = 0;
  double worst_gain = 1e308;
  for (size_t i = 0; i < kSeeds.size(); ++i) {
    double gain = rl.gst[i].avg_cr - rl.rwp[i].avg_cr;
    worst_gain = std::min(worst_gain, gain);
    if (gain >= 0.15) ++ok_seeds;
    std::printf("    seed %llu: avg_cr gst %.3f rwp %.3f gain %.3f\n",
                static_cast<unsigned long long>(kSeeds[i]), rl.gst[i].avg_cr, rl.rwp[i].avg_cr,
                gain);
  }
  bool ok = ok_seeds == static_cast<int>(kSeeds.size());
  std::printf("  (per-seed gain >= 15 percentage points on %d/5, worst %.3f)\n", ok_seeds,
              worst_gain);
  verdict(7, "average-cr-gain", ok);
  CHECK(ok);
}

TEST_CASE("criterion 8: two-spirals supervised analog") {
  auto& sp = spiral_results();
  int ok_seeds = 0;
  for (size_t i = 0; i < kSeeds.size(); ++i) {
    double acc_gap = sp.baseline[i].final_eval - sp.gst[i].final_eval;
    bool seed_ok = acc_gap <= 0.02 && sp.gst[i].avg_cr >= 0.5;
    if (seed_ok) ++ok_seeds;
    std::printf("    seed %llu: base acc %.4f gst acc %.4f avg_cr %.3f %s\n",
                static_cast<unsigned long long>(kSeeds[i]), sp.baseline[i].final_eval,
                sp.gst[i].final_eval, sp.gst[i].avg_cr, seed_ok ? "ok" : "MISS");
  }
  std::printf("  (total wall %.1fs)\n", sp.wall_s);
  bool ok = ok_seeds == 5 && sp.wall_s < 120.0;
  verdict(8, "two-spirals-supervised", ok);
  CHECK(ok);
}

TEST_CASE("criterion 9: monotonicity and legal pruning instants") {
  auto& rl = rl_results();
  auto& sp = spiral_results();
  bool ok = true;
  std::string detail;
  auto fold = [&](const char* name, const std::vector<RunOutcome>& outs) {
    for (const auto& o : outs)
      if (!o.audit.monotone || !o.audit.legal_instants) {
        ok = false;
        detail += std::string(name) + ": " + o.audit.detail;
      }
  };
  fold("baseline", rl.baseline);
  fold("gst", rl.gst);
  fold("rwp", rl.rwp);
  fold("spirals-base", sp.baseline);
  fold("spirals-gst", sp.gst);
  for (const auto& audit : g_scripted_audits)
    if (!audit.monotone || !audit.legal_instants) {
      ok = false;
      detail += "scripted: " + audit.detail;
    }
  if (!detail.empty()) std::printf("  %s\n", detail.c_str());
  std::printf("  (audited %zu runs)\n",
              rl.baseline.size() + rl.gst.size() + rl.rwp.size() + sp.baseline.size() +
                  sp.gst.size() + g_scripted_audits.size());
  verdict(9, "monotonicity-and-legal-instants", ok);
  CHECK(ok);
}
