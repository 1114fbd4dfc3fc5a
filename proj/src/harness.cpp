#include "gst/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "gst/kernels.hpp"

namespace gst {

namespace {

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string csv_header() {
  return "timestep,episode_return,eval_return,s_now,p_th,phase,cr_formula,cr_exact,wall_ms";
}

std::string csv_row(const RunRow& row) {
  std::string out = std::to_string(row.timestep);
  out += ",";
  if (row.episode_return) out += fmt(*row.episode_return);
  out += ",";
  if (row.eval_return) out += fmt(*row.eval_return);
  out += ",";
  out += fmt(row.s_now);
  out += ",";
  out += fmt(row.p_th);
  out += ",";
  out += phase_name(row.phase);
  out += ",";
  out += fmt(row.cr_formula);
  out += ",";
  out += fmt(row.cr_exact);
  out += ",";
  out += fmt(row.wall_ms);
  return out;
}

std::string csv_row_stable(const std::string& line) {
  size_t comma = line.rfind(',');
  return comma == std::string::npos ? line : line.substr(0, comma);
}

Run::Run(const RunConfig& cfg) : cfg_(cfg) { cfg_.check(); }

Run::Run(const RunConfig& cfg, uint64_t seed) : Run(cfg) {
  seed_ = seed;
  Rng master(seed_);
  env_rng_ = master.fork(1);
  build_learner(true);
  wall_start_ms_ = now_ms();
}

void Run::build_learner(bool init_structure) {
  Rng master(seed_);
  Rng init_rng = master.fork(0);
  Rng explore_rng = master.fork(3);
  uint64_t buffer_seed = master.fork(2).state();

  switch (cfg_.task) {
    case Task::Cartpole: {
      cartpole_.emplace();
      dqn_ = std::make_unique<DqnLearner>(CartPole::spec(), cfg_.hidden, cfg_.activation,
                                          cfg_.adam, cfg_.dqn, init_rng, buffer_seed,
                                          explore_rng);
      break;
    }
    case Task::Pointmass: {
      pointmass_.emplace();
      td3_ = std::make_unique<Td3LiteLearner>(PointMass::spec(), cfg_.hidden, cfg_.activation,
                                              cfg_.adam, cfg_.td3, init_rng, buffer_seed,
                                              explore_rng);
      break;
    }
    case Task::TwoSpirals: {
      sup_ = std::make_unique<SupervisedLearner>(cfg_.hidden, cfg_.activation, cfg_.adam,
                                                 cfg_.supervised, init_rng,
                                                 master.fork(4).state());
      break;
    }
    case Task::Scripted: {
      scripted_.emplace(cfg_.scripted_rewards);
      auto spec = ScriptedEnv::spec();
      std::vector<int> dims = {spec.state_dim};
      dims.insert(dims.end(), cfg_.hidden.begin(), cfg_.hidden.end());
      dims.push_back(spec.discrete_actions);
      std::vector<Act> acts(cfg_.hidden.size(), cfg_.activation);
      acts.push_back(Act::Identity);
      scripted_model_ = make_mlp(init_rng, dims, acts);
      for (size_t l = 1; l + 1 < scripted_model_.layers.size(); ++l)
        scripted_model_.layers[l].compressed = true;
      scripted_optim_ = make_optim(scripted_model_, cfg_.adam);
      break;
    }
  }

  if (init_structure) family_init_structure(families(), cfg_.gst);

  hooks_.measure = [this] { return measure(views()); };
  hooks_.release = [this] { family_release(families()); };
  hooks_.convert = [this] {
    if (cfg_.gst.conversion) family_convert(families(), *cfg_.gst.conversion);
  };
  hooks_.prune = [this](double target) { family_prune(families(), target); };
}

std::vector<NetFamily> Run::families() {
  switch (cfg_.task) {
    case Task::Cartpole: return dqn_->families();
    case Task::Pointmass: return td3_->families();
    case Task::TwoSpirals: return sup_->families();
    case Task::Scripted: return {{&scripted_model_, nullptr, &scripted_optim_}};
  }
  return {};
}

std::vector<LayerView> Run::views() { return family_views(families()); }

std::optional<double> Run::experience(uint64_t t) {
  switch (cfg_.task) {
    case Task::Cartpole: {
      if (!episode_live_) {
        cur_state_ = cartpole_->reset(env_rng_);
        episode_live_ = true;
        episode_return_ = 0.0;
      }
      int action = dqn_->act(cur_state_, t);
      auto res = cartpole_->step(action);
      episode_return_ += res.reward;
      Transition tr;
      tr.state = cur_state_;
      tr.action_index = action;
      tr.reward = static_cast<float>(res.reward);
      tr.next_state = res.state;
      tr.done = res.done;
      dqn_->observe(std::move(tr));
      if (res.done) {
        episode_live_ = false;
        episodes_done_ += 1;
        r_new_ = episode_return_;
        window_episode_ = episode_return_;
      } else {
        cur_state_ = res.state;
      }
      return r_new_;
    }
    case Task::Pointmass: {
      if (!episode_live_) {
        cur_state_ = pointmass_->reset(env_rng_);
        episode_live_ = true;
        episode_return_ = 0.0;
      }
      auto action = td3_->act(cur_state_);
      auto res = pointmass_->step(action);
      episode_return_ += res.reward;
      Transition tr;
      tr.state = cur_state_;
      tr.action = action;
      tr.reward = static_cast<float>(res.reward);
      tr.next_state = res.state;
      tr.done = res.done;
      td3_->observe(std::move(tr));
      if (res.done) {
        episode_live_ = false;
        episodes_done_ += 1;
        r_new_ = episode_return_;
        window_episode_ = episode_return_;
      } else {
        cur_state_ = res.state;
      }
      return r_new_;
    }
    case Task::TwoSpirals: {
      // "reward" is the negated validation loss, refreshed on the eval grid
      if (t % cfg_.eval_period == 0) {
        auto rep = sup_->validate();
        r_new_ = -rep.loss;
        last_eval_ = rep.accuracy;
        window_episode_ = r_new_;
        window_eval_ = rep.accuracy;
      }
      return r_new_;
    }
    case Task::Scripted: {
      auto res = scripted_->step(0);
      episodes_done_ += 1;
      r_new_ = res.reward;
      window_episode_ = res.reward;
      return r_new_;
    }
  }
  return std::nullopt;
}

void Run::update_nets(uint64_t t) {
  switch (cfg_.task) {
    case Task::Cartpole: dqn_->update(t); break;
    case Task::Pointmass: td3_->update(t); break;
    case Task::TwoSpirals: sup_->update(); break;
    case Task::Scripted: break;
  }
}

void Run::maybe_eval(uint64_t t) {
  if (cfg_.task == Task::TwoSpirals || cfg_.task == Task::Scripted) return;
  if (cfg_.eval_period == 0 || (t + 1) % cfg_.eval_period != 0) return;
  Rng master(seed_);
  uint64_t eval_seed = master.fork(5).fork(t).state();
  double ret = 0;
  if (cfg_.task == Task::Cartpole)
    ret = evaluate_cartpole(dqn_->online(), cfg_.eval_episodes, eval_seed);
  else
    ret = evaluate_pointmass(td3_->actor(), cfg_.eval_episodes, eval_seed);
  last_eval_ = ret;
  window_eval_ = ret;
}

void Run::log_row(uint64_t t) {
  if ((t + 1) % cfg_.log_period != 0) return;
  auto rep = measure(views());
  double frac = rep.p_total ? static_cast<double>(rep.p_comp) / rep.p_total : 0.0;
  RunRow row;
  row.timestep = t + 1;
  row.episode_return = window_episode_;
  row.eval_return = window_eval_;
  row.s_now = sched_.s_now;
  row.p_th = sched_.p_th;
  row.phase = sched_.phase;
  row.cr_formula = cr_bitmap(rep.effective_block, rep.s_global, frac);
  row.cr_exact = cr_exact(views());
  row.wall_ms = now_ms() - wall_start_ms_;
  rows_.push_back(row);
  window_episode_.reset();
  window_eval_.reset();
  if (csv_) {
    std::string line = csv_row(row);
    std::fwrite(line.data(), 1, line.size(), csv_);
    std::fputc('\n', csv_);
    std::fflush(csv_);
  }
}

bool Run::step() {
  if (finished()) return false;
  uint64_t t = t_;
  std::optional<double> r_new = experience(t);
  gst_tick(sched_, hooks_, r_new, cfg_.gst);
  update_nets(t);
  maybe_eval(t);
  log_row(t);
  t_ += 1;
  return !finished();
}

void Run::run_all() {
  while (step()) {
  }
}

// ---- snapshot / resume ----

namespace {

void write_optional(ByteWriter& w, const std::optional<double>& v) {
  w.u8(v ? 1 : 0);
  w.f64(v ? *v : 0.0);
}

std::optional<double> read_optional(ByteReader& r) {
  bool has = r.u8() != 0;
  double v = r.f64();
  return has ? std::optional<double>(v) : std::nullopt;
}

void write_buffer(ByteWriter& w, const ReplayBuffer& buf) {
  w.u64(buf.capacity());
  w.u64(buf.rng().state());
  w.u64(buf.size());
  w.u64(buf.write_cursor());
  for (size_t i = 0; i < buf.size(); ++i) {
    const Transition& t = buf[i];
    w.u32(static_cast<uint32_t>(t.state.size()));
    w.bytes(t.state.data(), t.state.size() * 4);
    w.i32(t.action_index);
    w.u32(static_cast<uint32_t>(t.action.size()));
    w.bytes(t.action.data(), t.action.size() * 4);
    w.f32(t.reward);
    w.u32(static_cast<uint32_t>(t.next_state.size()));
    w.bytes(t.next_state.data(), t.next_state.size() * 4);
    w.u8(t.done ? 1 : 0);
  }
}

void read_buffer(ByteReader& r, ReplayBuffer& buf) {
  uint64_t capacity = r.u64();
  if (capacity != buf.capacity())
    throw CodecError("buffer capacity mismatch at byte " + std::to_string(r.offset()),
                     static_cast<long long>(r.offset()));
  buf.rng().set_state(r.u64());
  uint64_t size = r.u64();
  uint64_t cursor = r.u64();
  auto floats = [&r](uint32_t n) {
    std::vector<float> v(n);
    std::memcpy(v.data(), r.take(n * 4ull), n * 4ull);
    return v;
  };
  for (uint64_t i = 0; i < size; ++i) {
    Transition t;
    t.state = floats(r.u32());
    t.action_index = r.i32();
    t.action = floats(r.u32());
    t.reward = r.f32();
    t.next_state = floats(r.u32());
    t.done = r.u8() != 0;
    buf.add(std::move(t));
  }
  buf.restore_cursor(cursor);
}

void write_doubles(ByteWriter& w, const std::vector<double>& v) {
  w.u32(static_cast<uint32_t>(v.size()));
  for (double d : v) w.f64(d);
}

std::vector<double> read_doubles(ByteReader& r) {
  uint32_t n = r.u32();
  std::vector<double> v(n);
  for (auto& d : v) d = r.f64();
  return v;
}

}  // namespace

Checkpoint Run::snapshot() const {
  Checkpoint cp;
  {
    ByteWriter w;
    w.str(cfg_.resolved_text());
    cp.add("config", w.take());
  }
  {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(cfg_.task));
    w.u8(static_cast<uint8_t>(cfg_.learner));
    w.u64(seed_);
    w.u64(t_);
    w.u64(episodes_done_);
    w.u8(episode_live_ ? 1 : 0);
    w.f64(episode_return_);
    w.u32(static_cast<uint32_t>(cur_state_.size()));
    w.bytes(cur_state_.data(), cur_state_.size() * 4);
    write_optional(w, r_new_);
    write_optional(w, window_episode_);
    write_optional(w, window_eval_);
    write_optional(w, last_eval_);
    w.u64(env_rng_.state());
    cp.add("meta", w.take());
  }
  {
    ByteWriter w;
    write_scheduler(w, sched_);
    cp.add("sched", w.take());
  }

  auto add_model = [&cp](const std::string& name, const Mlp& mlp) {
    ByteWriter w;
    write_mlp(w, mlp);
    cp.add("model:" + name, w.take());
  };
  auto add_optim = [&cp](const std::string& name, const OptimState& opt) {
    ByteWriter w;
    write_optim(w, opt);
    cp.add("optim:" + name, w.take());
  };
  auto add_manifest = [&cp](const std::vector<std::pair<std::string, bool>>& models) {
    ByteWriter w;
    w.u32(static_cast<uint32_t>(models.size()));
    for (const auto& [name, trainable] : models) {
      w.str(name);
      w.u8(trainable ? 1 : 0);
    }
    cp.add("manifest", w.take());
  };

  switch (cfg_.task) {
    case Task::Cartpole: {
      add_manifest({{"online", true}, {"target", false}});
      add_model("online", dqn_->online());
      add_model("target", dqn_->target());
      add_optim("online", const_cast<DqnLearner&>(*dqn_).optim());
      ByteWriter w;
      w.u64(dqn_->updates_done());
      w.u64(const_cast<DqnLearner&>(*dqn_).explore_rng().state());
      cp.add("learner", w.take());
      ByteWriter env;
      write_doubles(env, cartpole_->raw_state());
      env.u32(static_cast<uint32_t>(cartpole_->steps()));
      cp.add("env", env.take());
      ByteWriter buf;
      write_buffer(buf, const_cast<DqnLearner&>(*dqn_).buffer());
      cp.add("buffer", buf.take());
      break;
    }
    case Task::Pointmass: {
      add_manifest({{"actor", true},
                    {"actor_target", false},
                    {"critic1", true},
                    {"critic1_target", false},
                    {"critic2", true},
                    {"critic2_target", false}});
      auto& td3 = const_cast<Td3LiteLearner&>(*td3_);
      add_model("actor", td3.actor());
      add_model("actor_target", td3.actor_target());
      add_model("critic1", td3.critic(0));
      add_model("critic1_target", td3.critic_target(0));
      add_model("critic2", td3.critic(1));
      add_model("critic2_target", td3.critic_target(1));
      add_optim("actor", td3.actor_optim());
      add_optim("critic1", td3.critic_optim(0));
      add_optim("critic2", td3.critic_optim(1));
      ByteWriter w;
      w.u64(td3.critic_updates());
      w.u64(td3.actor_updates());
      w.u64(td3.explore_rng().state());
      w.u64(td3.noise_rng().state());
      cp.add("learner", w.take());
      ByteWriter env;
      write_doubles(env, pointmass_->raw_state());
      env.u32(static_cast<uint32_t>(pointmass_->steps()));
      cp.add("env", env.take());
      ByteWriter buf;
      write_buffer(buf, td3.buffer());
      cp.add("buffer", buf.take());
      break;
    }
    case Task::TwoSpirals: {
      add_manifest({{"model", true}});
      auto& sup = const_cast<SupervisedLearner&>(*sup_);
      add_model("model", sup.model());
      add_optim("model", sup.optim());
      ByteWriter w;
      w.u64(sup.batch_rng().state());
      cp.add("learner", w.take());
      break;
    }
    case Task::Scripted: {
      add_manifest({{"model", true}});
      add_model("model", scripted_model_);
      add_optim("model", scripted_optim_);
      ByteWriter env;
      env.u64(scripted_->cursor());
      cp.add("env", env.take());
      break;
    }
  }
  return cp;
}

void Run::save(const std::string& path) const { snapshot().write_file(path); }

void Run::restore(const Checkpoint& cp) {
  {
    ByteReader r(cp.get("config"));
    std::string saved = r.str();
    if (saved != cfg_.resolved_text())
      throw ConfigError("checkpoint was produced by a different configuration");
  }
  {
    ByteReader r(cp.get("meta"));
    r.u8();  // task, validated via config text
    r.u8();
    seed_ = r.u64();
    t_ = r.u64();
    episodes_done_ = r.u64();
    episode_live_ = r.u8() != 0;
    episode_return_ = r.f64();
    uint32_t n = r.u32();
    cur_state_.resize(n);
    std::memcpy(cur_state_.data(), r.take(n * 4ull), n * 4ull);
    r_new_ = read_optional(r);
    window_episode_ = read_optional(r);
    window_eval_ = read_optional(r);
    last_eval_ = read_optional(r);
    env_rng_.set_state(r.u64());
  }

  build_learner(false);

  {
    ByteReader r(cp.get("sched"));
    sched_ = read_scheduler(r);
  }

  auto load_model = [&cp](const std::string& name, Mlp& dst) {
    ByteReader r(cp.get("model:" + name));
    dst = read_mlp(r);
  };
  auto load_optim = [&cp](const std::string& name, OptimState& dst) {
    ByteReader r(cp.get("optim:" + name));
    dst = read_optim(r);
  };

  switch (cfg_.task) {
    case Task::Cartpole: {
      load_model("online", dqn_->online());
      load_model("target", dqn_->target());
      load_optim("online", dqn_->optim());
      ByteReader r(cp.get("learner"));
      dqn_->set_updates_done(r.u64());
      dqn_->explore_rng().set_state(r.u64());
      ByteReader env(cp.get("env"));
      auto raw = read_doubles(env);
      cartpole_->restore(raw, static_cast<int>(env.u32()));
      ByteReader buf(cp.get("buffer"));
      read_buffer(buf, dqn_->buffer());
      break;
    }
    case Task::Pointmass: {
      load_model("actor", td3_->actor());
      load_model("actor_target", td3_->actor_target());
      load_model("critic1", td3_->critic(0));
      load_model("critic1_target", td3_->critic_target(0));
      load_model("critic2", td3_->critic(1));
      load_model("critic2_target", td3_->critic_target(1));
      load_optim("actor", td3_->actor_optim());
      load_optim("critic1", td3_->critic_optim(0));
      load_optim("critic2", td3_->critic_optim(1));
      ByteReader r(cp.get("learner"));
      uint64_t critic = r.u64();
      uint64_t actor = r.u64();
      td3_->set_update_counters(critic, actor);
      td3_->explore_rng().set_state(r.u64());
      td3_->noise_rng().set_state(r.u64());
      ByteReader env(cp.get("env"));
      auto raw = read_doubles(env);
      pointmass_->restore(raw, static_cast<int>(env.u32()));
      ByteReader buf(cp.get("buffer"));
      read_buffer(buf, td3_->buffer());
      break;
    }
    case Task::TwoSpirals: {
      load_model("model", sup_->model());
      load_optim("model", sup_->optim());
      ByteReader r(cp.get("learner"));
      sup_->batch_rng().set_state(r.u64());
      break;
    }
    case Task::Scripted: {
      load_model("model", scripted_model_);
      load_optim("model", scripted_optim_);
      ByteReader env(cp.get("env"));
      scripted_->restore(env.u64());
      break;
    }
  }
}

std::unique_ptr<Run> Run::resume(const RunConfig& cfg, const std::string& path) {
  std::unique_ptr<Run> run(new Run(cfg));
  run->restore(Checkpoint::read_file(path));
  run->wall_start_ms_ = now_ms();
  return run;
}

// ---- sweep ----

SweepResult sweep(const RunConfig& cfg, int k, int parallelism) {
  if (k < 1) throw ConfigError("sweep needs at least one seed");
  SweepResult result;
  result.seeds.resize(k);
  result.per_seed.resize(k);
  for (int i = 0; i < k; ++i) result.seeds[i] = cfg.seed + static_cast<uint64_t>(i);

  int workers = parallelism > 0 ? parallelism : kernels::thread_count();
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, k));

  std::vector<std::string> errors(k);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= k) return;
      try {
        Run run(cfg, result.seeds[i]);
        run.run_all();
        result.per_seed[i] = run.rows();
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& th : threads) th.join();

  for (int i = 0; i < k; ++i)
    if (!errors[i].empty())
      throw std::runtime_error("seed " + std::to_string(result.seeds[i]) +
                               " failed: " + errors[i]);
  return result;
}

std::vector<AggregateRow> aggregate(const SweepResult& sw) {
  std::vector<AggregateRow> out;
  if (sw.per_seed.empty()) return out;
  size_t rows = sw.per_seed.front().size();
  for (const auto& seed_rows : sw.per_seed)
    if (seed_rows.size() != rows)
      throw std::runtime_error("aggregate: seeds produced different log grids");

  for (size_t r = 0; r < rows; ++r) {
    AggregateRow agg;
    agg.timestep = sw.per_seed.front()[r].timestep;
    auto fold = [](AggregateRow::Stat& st, std::optional<double> v) {
      if (!v) return;
      if (st.n == 0) {
        st.mean = st.min = st.max = *v;
      } else {
        st.mean += *v;
        st.min = std::min(st.min, *v);
        st.max = std::max(st.max, *v);
      }
      st.n += 1;
    };
    for (const auto& seed_rows : sw.per_seed) {
      const RunRow& row = seed_rows[r];
      if (row.timestep != agg.timestep)
        throw std::runtime_error("aggregate: log grids disagree");
      fold(agg.episode_return, row.episode_return);
      fold(agg.eval_return, row.eval_return);
      fold(agg.s_now, row.s_now);
      fold(agg.p_th, row.p_th);
      fold(agg.cr_formula, row.cr_formula);
      fold(agg.cr_exact, row.cr_exact);
    }
    for (auto* st : {&agg.episode_return, &agg.eval_return, &agg.s_now, &agg.p_th,
                     &agg.cr_formula, &agg.cr_exact})
      if (st->n > 0) st->mean /= st->n;
    out.push_back(agg);
  }
  return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string out =
      "timestep,episode_return_n,episode_return_mean,episode_return_min,episode_return_max,"
      "eval_return_n,eval_return_mean,eval_return_min,eval_return_max,"
      "s_now_mean,s_now_min,s_now_max,p_th_mean,p_th_min,p_th_max,"
      "cr_formula_mean,cr_formula_min,cr_formula_max,cr_exact_mean,cr_exact_min,cr_exact_max\n";
  auto opt_stat = [](const AggregateRow::Stat& st) {
    std::string s = std::to_string(st.n) + ",";
    if (st.n > 0) s += fmt(st.mean) + "," + fmt(st.min) + "," + fmt(st.max);
    else s += ",,";
    return s;
  };
  auto full_stat = [](const AggregateRow::Stat& st) {
    return fmt(st.mean) + "," + fmt(st.min) + "," + fmt(st.max);
  };
  for (const auto& r : rows) {
    out += std::to_string(r.timestep) + ",";
    out += opt_stat(r.episode_return) + ",";
    out += opt_stat(r.eval_return) + ",";
    out += full_stat(r.s_now) + ",";
    out += full_stat(r.p_th) + ",";
    out += full_stat(r.cr_formula) + ",";
    out += full_stat(r.cr_exact) + "\n";
  }
  return out;
}

}  // namespace gst
