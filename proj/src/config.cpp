#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "gst/harness.hpp"

namespace gst {

const char* task_name(Task t) {
  switch (t) {
    case Task::Cartpole: return "cartpole";
    case Task::Pointmass: return "pointmass";
    case Task::Scripted: return "scripted";
    case Task::TwoSpirals: return "two-spirals";
  }
  return "?";
}

const char* learner_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::Dqn: return "dqn";
    case LearnerKind::Td3Lite: return "td3lite";
    case LearnerKind::Supervised: return "supervised";
    case LearnerKind::None: return "none";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Entry {
  std::string value;
  int line;
  bool used = false;
};

struct IniData {
  std::map<std::string, Entry> entries;  // "section.key" -> value
  std::string origin;
};

IniData parse_ini(const std::string& text, const std::string& origin) {
  IniData ini;
  ini.origin = origin;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header",
                          line_no);
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value",
                        line_no);
    if (section.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": key outside any section",
                        line_no);
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    // strip trailing comment
    size_t hash = value.find('#');
    if (hash != std::string::npos) value = trim(value.substr(0, hash));
    std::string full = section + "." + key;
    if (ini.entries.count(full))
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + full +
                            "' (first at line " + std::to_string(ini.entries[full].line) + ")",
                        line_no, full);
    ini.entries[full] = {value, line_no, false};
  }
  return ini;
}

class Reader {
 public:
  explicit Reader(IniData& ini) : ini_(ini) {}

  bool has(const std::string& key) const { return ini_.entries.count(key) > 0; }

  template <typename F>
  void take(const std::string& key, F&& apply) {
    auto it = ini_.entries.find(key);
    if (it == ini_.entries.end()) return;
    it->second.used = true;
    try {
      apply(it->second.value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(ini_.origin + ":" + std::to_string(it->second.line) + ": bad value for " +
                            key + ": " + e.what(),
                        it->second.line, key);
    }
  }

  void reject_unused() const {
    for (const auto& [key, entry] : ini_.entries)
      if (!entry.used)
        throw ConfigError(ini_.origin + ":" + std::to_string(entry.line) + ": unknown key '" +
                              key + "'",
                          entry.line, key);
  }

 private:
  IniData& ini_;
};

double to_double(const std::string& s) {
  size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("'" + s + "' is not a number");
  return v;
}

uint64_t to_u64(const std::string& s) {
  size_t pos = 0;
  long long v = std::stoll(s, &pos);
  if (pos != s.size() || v < 0) throw std::runtime_error("'" + s + "' is not a non-negative integer");
  return static_cast<uint64_t>(v);
}

std::vector<int> to_int_list(const std::string& s) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    out.push_back(static_cast<int>(to_u64(tok)));
  }
  if (out.empty()) throw std::runtime_error("empty list");
  return out;
}

std::vector<double> to_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    out.push_back(to_double(tok));
  }
  if (out.empty()) throw std::runtime_error("empty list");
  return out;
}

}  // namespace

RunConfig RunConfig::from_string(const std::string& text, const std::string& origin) {
  IniData ini = parse_ini(text, origin);
  Reader r(ini);
  RunConfig cfg;

  r.take("run.task", [&](const std::string& v) {
    if (v == "cartpole") cfg.task = Task::Cartpole;
    else if (v == "pointmass") cfg.task = Task::Pointmass;
    else if (v == "scripted") cfg.task = Task::Scripted;
    else if (v == "two-spirals") cfg.task = Task::TwoSpirals;
    else throw std::runtime_error("unknown task '" + v + "'");
  });
  r.take("run.learner", [&](const std::string& v) {
    if (v == "dqn") cfg.learner = LearnerKind::Dqn;
    else if (v == "td3lite") cfg.learner = LearnerKind::Td3Lite;
    else if (v == "supervised") cfg.learner = LearnerKind::Supervised;
    else if (v == "none") cfg.learner = LearnerKind::None;
    else throw std::runtime_error("unknown learner '" + v + "'");
  });
  r.take("run.total_timesteps", [&](const std::string& v) { cfg.total_timesteps = to_u64(v); });
  r.take("run.eval_period", [&](const std::string& v) { cfg.eval_period = to_u64(v); });
  r.take("run.eval_episodes", [&](const std::string& v) { cfg.eval_episodes = static_cast<int>(to_u64(v)); });
  r.take("run.log_period", [&](const std::string& v) { cfg.log_period = to_u64(v); });
  r.take("run.seed", [&](const std::string& v) { cfg.seed = to_u64(v); });

  r.take("net.hidden", [&](const std::string& v) { cfg.hidden = to_int_list(v); });
  r.take("net.activation", [&](const std::string& v) { cfg.activation = act_from_name(v); });

  r.take("optim.lr", [&](const std::string& v) { cfg.adam.lr = to_double(v); });
  r.take("optim.beta1", [&](const std::string& v) { cfg.adam.beta1 = to_double(v); });
  r.take("optim.beta2", [&](const std::string& v) { cfg.adam.beta2 = to_double(v); });
  r.take("optim.eps", [&](const std::string& v) { cfg.adam.eps = to_double(v); });

  r.take("gst.scheduler", [&](const std::string& v) {
    if (v == "rwp") cfg.gst.scheduler = SchedulerKind::Rwp;
    else if (v == "gradual") cfg.gst.scheduler = SchedulerKind::Gradual;
    else throw std::runtime_error("unknown scheduler '" + v + "'");
  });
  r.take("gst.block", [&](const std::string& v) { cfg.gst.block = static_cast<int>(to_u64(v)); });
  r.take("gst.kind", [&](const std::string& v) { cfg.gst.kind = kind_from_name(v); });
  r.take("gst.s_shift", [&](const std::string& v) { cfg.gst.s_shift = to_double(v); });
  r.take("gst.s_ub", [&](const std::string& v) { cfg.gst.s_ub = to_double(v); });
  r.take("gst.p_step", [&](const std::string& v) { cfg.gst.p_step = to_double(v); });
  r.take("gst.p_start", [&](const std::string& v) { cfg.gst.p_start = to_u64(v); });
  r.take("gst.p_fre", [&](const std::string& v) { cfg.gst.p_fre = to_u64(v); });

  bool has_convert = r.has("gst.convert_at") || r.has("gst.convert_method") ||
                     r.has("gst.convert_kind") || r.has("gst.convert_block");
  if (has_convert) {
    ConversionConfig conv;
    conv.at_sparsity = cfg.gst.s_shift / 2;  // default trigger: half the shift
    r.take("gst.convert_at", [&](const std::string& v) { conv.at_sparsity = to_double(v); });
    r.take("gst.convert_method", [&](const std::string& v) {
      if (v == "friendly") conv.method = ConvertMethod::Friendly;
      else if (v == "projection") conv.method = ConvertMethod::Projection;
      else throw std::runtime_error("unknown conversion method '" + v + "'");
    });
    r.take("gst.convert_kind", [&](const std::string& v) { conv.target_kind = kind_from_name(v); });
    r.take("gst.convert_block", [&](const std::string& v) { conv.target_block = static_cast<int>(to_u64(v)); });
    cfg.gst.conversion = conv;
  }

  r.take("gst.s_i", [&](const std::string& v) { cfg.gst.gradual.s_i = to_double(v); });
  r.take("gst.s_f", [&](const std::string& v) { cfg.gst.gradual.s_f = to_double(v); });
  r.take("gst.t0", [&](const std::string& v) { cfg.gst.gradual.t0 = to_u64(v); });
  r.take("gst.n", [&](const std::string& v) { cfg.gst.gradual.n = to_u64(v); });
  r.take("gst.delta", [&](const std::string& v) { cfg.gst.gradual.delta = to_u64(v); });

  r.take("dqn.gamma", [&](const std::string& v) { cfg.dqn.gamma = to_double(v); });
  r.take("dqn.buffer", [&](const std::string& v) { cfg.dqn.buffer_capacity = to_u64(v); });
  r.take("dqn.batch", [&](const std::string& v) { cfg.dqn.batch = to_u64(v); });
  r.take("dqn.eps_start", [&](const std::string& v) { cfg.dqn.eps_start = to_double(v); });
  r.take("dqn.eps_end", [&](const std::string& v) { cfg.dqn.eps_end = to_double(v); });
  r.take("dqn.eps_decay", [&](const std::string& v) { cfg.dqn.eps_decay_steps = to_u64(v); });
  r.take("dqn.target_sync", [&](const std::string& v) { cfg.dqn.target_sync = to_u64(v); });
  r.take("dqn.warmup", [&](const std::string& v) { cfg.dqn.warmup = to_u64(v); });
  r.take("dqn.update_every", [&](const std::string& v) { cfg.dqn.update_every = to_u64(v); });

  r.take("td3.gamma", [&](const std::string& v) { cfg.td3.gamma = to_double(v); });
  r.take("td3.tau", [&](const std::string& v) { cfg.td3.tau = to_double(v); });
  r.take("td3.policy_noise", [&](const std::string& v) { cfg.td3.policy_noise = to_double(v); });
  r.take("td3.noise_clip", [&](const std::string& v) { cfg.td3.noise_clip = to_double(v); });
  r.take("td3.policy_delay", [&](const std::string& v) { cfg.td3.policy_delay = to_u64(v); });
  r.take("td3.expl_noise", [&](const std::string& v) { cfg.td3.expl_noise = to_double(v); });
  r.take("td3.buffer", [&](const std::string& v) { cfg.td3.buffer_capacity = to_u64(v); });
  r.take("td3.batch", [&](const std::string& v) { cfg.td3.batch = to_u64(v); });
  r.take("td3.warmup", [&](const std::string& v) { cfg.td3.warmup = to_u64(v); });
  r.take("td3.update_every", [&](const std::string& v) { cfg.td3.update_every = to_u64(v); });

  r.take("supervised.points", [&](const std::string& v) { cfg.supervised.points = to_u64(v); });
  r.take("supervised.val_fraction", [&](const std::string& v) { cfg.supervised.val_fraction = to_double(v); });
  r.take("supervised.batch", [&](const std::string& v) { cfg.supervised.batch = to_u64(v); });
  r.take("supervised.data_seed", [&](const std::string& v) { cfg.supervised.data_seed = to_u64(v); });
  r.take("supervised.noise", [&](const std::string& v) { cfg.supervised.noise = to_double(v); });

  r.take("scripted.rewards", [&](const std::string& v) { cfg.scripted_rewards = to_double_list(v); });

  r.reject_unused();
  cfg.check();
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), path);
}

void RunConfig::check() const {
  validate(gst);
  if (total_timesteps == 0) throw ConfigError("run.total_timesteps must be positive");
  if (log_period == 0) throw ConfigError("run.log_period must be positive");
  if (hidden.empty()) throw ConfigError("net.hidden must list at least one width");
  for (int h : hidden)
    if (h <= 0) throw ConfigError("net.hidden widths must be positive");
  if (adam.lr <= 0) throw ConfigError("optim.lr must be positive");

  auto want = [&](LearnerKind k) {
    if (learner != k)
      throw ConfigError(std::string("task ") + task_name(task) + " requires learner " +
                        learner_name(k));
  };
  switch (task) {
    case Task::Cartpole: want(LearnerKind::Dqn); break;
    case Task::Pointmass: want(LearnerKind::Td3Lite); break;
    case Task::TwoSpirals: want(LearnerKind::Supervised); break;
    case Task::Scripted: want(LearnerKind::None); break;
  }
  if (task == Task::Scripted && scripted_rewards.empty())
    throw ConfigError("scripted.rewards must be non-empty");
  if (task != Task::Scripted && eval_period == 0)
    throw ConfigError("run.eval_period must be positive");
  if (eval_episodes <= 0) throw ConfigError("run.eval_episodes must be positive");
}

std::string RunConfig::resolved_text() const {
  char buf[256];
  std::string out;
  auto kv = [&](const char* key, const std::string& v) {
    out += key;
    out += " = ";
    out += v;
    out += "\n";
  };
  auto num = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    kv(key, buf);
  };
  auto integer = [&](const char* key, uint64_t v) {
    std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(v));
    kv(key, buf);
  };

  out += "[run]\n";
  kv("task", task_name(task));
  kv("learner", learner_name(learner));
  integer("total_timesteps", total_timesteps);
  integer("eval_period", eval_period);
  integer("eval_episodes", static_cast<uint64_t>(eval_episodes));
  integer("log_period", log_period);
  integer("seed", seed);

  out += "\n[net]\n";
  std::string widths;
  for (size_t i = 0; i < hidden.size(); ++i)
    widths += (i ? "," : "") + std::to_string(hidden[i]);
  kv("hidden", widths);
  kv("activation", act_name(activation));

  out += "\n[optim]\n";
  num("lr", adam.lr);
  num("beta1", adam.beta1);
  num("beta2", adam.beta2);
  num("eps", adam.eps);

  out += "\n[gst]\n";
  kv("scheduler", gst.scheduler == SchedulerKind::Rwp ? "rwp" : "gradual");
  integer("block", static_cast<uint64_t>(gst.block));
  kv("kind", kind_name(gst.kind));
  num("s_shift", gst.s_shift);
  num("s_ub", gst.s_ub);
  num("p_step", gst.p_step);
  integer("p_start", gst.p_start);
  integer("p_fre", gst.p_fre);
  if (gst.conversion) {
    num("convert_at", gst.conversion->at_sparsity);
    kv("convert_method", convert_method_name(gst.conversion->method));
    kv("convert_kind", kind_name(gst.conversion->target_kind));
    integer("convert_block", static_cast<uint64_t>(gst.conversion->target_block));
  } else {
    kv("# convert_at", "none");
  }
  num("s_i", gst.gradual.s_i);
  num("s_f", gst.gradual.s_f);
  integer("t0", gst.gradual.t0);
  integer("n", gst.gradual.n);
  integer("delta", gst.gradual.delta);

  out += "\n[dqn]\n";
  num("gamma", dqn.gamma);
  integer("buffer", dqn.buffer_capacity);
  integer("batch", dqn.batch);
  num("eps_start", dqn.eps_start);
  num("eps_end", dqn.eps_end);
  integer("eps_decay", dqn.eps_decay_steps);
  integer("target_sync", dqn.target_sync);
  integer("warmup", dqn.warmup);
  integer("update_every", dqn.update_every);

  out += "\n[td3]\n";
  num("gamma", td3.gamma);
  num("tau", td3.tau);
  num("policy_noise", td3.policy_noise);
  num("noise_clip", td3.noise_clip);
  integer("policy_delay", td3.policy_delay);
  num("expl_noise", td3.expl_noise);
  integer("buffer", td3.buffer_capacity);
  integer("batch", td3.batch);
  integer("warmup", td3.warmup);
  integer("update_every", td3.update_every);

  out += "\n[supervised]\n";
  integer("points", supervised.points);
  num("val_fraction", supervised.val_fraction);
  integer("batch", supervised.batch);
  integer("data_seed", supervised.data_seed);
  num("noise", supervised.noise);

  out += "\n[scripted]\n";
  std::string rewards;
  for (size_t i = 0; i < scripted_rewards.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g", scripted_rewards[i]);
    rewards += (i ? "," : "") + std::string(buf);
  }
  kv("rewards", rewards);
  return out;
}

}  // namespace gst
