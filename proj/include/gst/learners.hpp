#pragma once

#include <optional>

#include "gst/netcore.hpp"
#include "gst/rlenv.hpp"
#include "gst/schedule.hpp"

namespace gst {

// An online net plus its (optional) lagged target copy. Structural events
// (prune masks, conversions, release) hit both sides in lockstep so the
// targets always share the online pattern and mask.
struct NetFamily {
  Mlp* online = nullptr;
  Mlp* target = nullptr;
  OptimState* optim = nullptr;
};

void family_init_structure(const std::vector<NetFamily>& families, const GstConfig& cfg);
void family_prune(const std::vector<NetFamily>& families, double target);
void family_release(const std::vector<NetFamily>& families);
void family_convert(const std::vector<NetFamily>& families, const ConversionConfig& conv);

// trainable (online) weight views across families, for measure/cr accounting
std::vector<LayerView> family_views(const std::vector<NetFamily>& families);

// theta_target <- tau * theta + (1 - tau) * theta_target, per group value and
// bias entry; requires identical patterns on both sides.
void soft_update(const Mlp& online, Mlp& target, double tau);

struct DqnHyper {
  double gamma = 0.99;
  size_t buffer_capacity = 50000;
  size_t batch = 64;
  double eps_start = 1.0;
  double eps_end = 0.05;
  uint64_t eps_decay_steps = 10000;
  uint64_t target_sync = 500;  // hard sync period, in update steps
  size_t warmup = 1000;        // buffer size before updates begin
  uint64_t update_every = 1;   // env steps per update
};

class DqnLearner {
 public:
  DqnLearner(const EnvSpec& spec, const std::vector<int>& hidden, Act hidden_act,
             const AdamParams& adam, const DqnHyper& hyper, Rng init_rng, uint64_t buffer_seed,
             Rng explore_rng);

  int act(const std::vector<float>& state, uint64_t env_step);  // epsilon-greedy
  int act_greedy(const std::vector<float>& state) const;
  void observe(Transition t) { buffer_.add(std::move(t)); }
  // one TD step with target-network bootstrapping; no-op until warmup
  std::optional<double> update(uint64_t env_step);

  std::vector<NetFamily> families();
  Mlp& online() { return online_; }
  const Mlp& online() const { return online_; }
  Mlp& target() { return target_; }
  OptimState& optim() { return optim_; }
  ReplayBuffer& buffer() { return buffer_; }
  Rng& explore_rng() { return explore_; }
  uint64_t updates_done() const { return updates_; }
  void set_updates_done(uint64_t n) { updates_ = n; }
  double epsilon(uint64_t env_step) const;
  const DqnHyper& hyper() const { return hyper_; }

 private:
  DqnHyper hyper_;
  Mlp online_, target_;
  OptimState optim_;
  ReplayBuffer buffer_;
  Rng explore_;
  uint64_t updates_ = 0;
};

struct Td3Hyper {
  double gamma = 0.99;
  double tau = 0.005;
  double policy_noise = 0.2;
  double noise_clip = 0.5;
  uint64_t policy_delay = 2;
  double expl_noise = 0.1;
  size_t buffer_capacity = 50000;
  size_t batch = 64;
  size_t warmup = 1000;
  uint64_t update_every = 1;
};

// Twin critics with min-target bootstrapping, delayed actor updates, target
// policy smoothing and soft target tracking.
class Td3LiteLearner {
 public:
  Td3LiteLearner(const EnvSpec& spec, const std::vector<int>& hidden, Act hidden_act,
                 const AdamParams& adam, const Td3Hyper& hyper, Rng init_rng,
                 uint64_t buffer_seed, Rng explore_rng);

  std::vector<float> act(const std::vector<float>& state);  // with exploration noise
  std::vector<float> act_greedy(const std::vector<float>& state) const;
  void observe(Transition t) { buffer_.add(std::move(t)); }
  // returns mean twin-critic loss when an update ran
  std::optional<double> update(uint64_t env_step);

  std::vector<NetFamily> families();
  Mlp& actor() { return actor_; }
  const Mlp& actor() const { return actor_; }
  Mlp& actor_target() { return actor_target_; }
  Mlp& critic(int i) { return i == 0 ? critic1_ : critic2_; }
  Mlp& critic_target(int i) { return i == 0 ? critic1_target_ : critic2_target_; }
  OptimState& actor_optim() { return actor_optim_; }
  OptimState& critic_optim(int i) { return i == 0 ? critic1_optim_ : critic2_optim_; }
  ReplayBuffer& buffer() { return buffer_; }
  Rng& explore_rng() { return explore_; }
  Rng& noise_rng() { return noise_; }
  uint64_t critic_updates() const { return critic_updates_; }
  uint64_t actor_updates() const { return actor_updates_; }
  void set_update_counters(uint64_t critic, uint64_t actor) {
    critic_updates_ = critic;
    actor_updates_ = actor;
  }
  const Td3Hyper& hyper() const { return hyper_; }

 private:
  Td3Hyper hyper_;
  int action_dim_;
  Mlp actor_, actor_target_, critic1_, critic2_, critic1_target_, critic2_target_;
  OptimState actor_optim_, critic1_optim_, critic2_optim_;
  ReplayBuffer buffer_;
  Rng explore_, noise_;
  uint64_t critic_updates_ = 0;
  uint64_t actor_updates_ = 0;
};

struct SupervisedHyper {
  size_t points = 2000;
  double val_fraction = 0.25;
  size_t batch = 64;
  uint64_t data_seed = 7;
  double noise = 0.05;
};

struct Dataset {
  std::vector<std::vector<float>> x;
  std::vector<int> y;
};

// Interleaved two-spirals classification set; deterministic per seed.
Dataset two_spirals(size_t points, double noise, uint64_t seed);

class SupervisedLearner {
 public:
  SupervisedLearner(const std::vector<int>& hidden, Act hidden_act, const AdamParams& adam,
                    const SupervisedHyper& hyper, Rng init_rng, uint64_t batch_seed);

  double update();  // one minibatch cross-entropy step; returns batch loss
  struct ValReport {
    double loss = 0.0;
    double accuracy = 0.0;
  };
  ValReport validate() const;

  std::vector<NetFamily> families();
  Mlp& model() { return model_; }
  const Mlp& model() const { return model_; }
  OptimState& optim() { return optim_; }
  Rng& batch_rng() { return batch_; }
  const Dataset& train_set() const { return train_; }
  const Dataset& val_set() const { return val_; }

 private:
  SupervisedHyper hyper_;
  Mlp model_;
  OptimState optim_;
  Dataset train_, val_;
  Rng batch_;
};

// Deterministic greedy rollouts; arithmetic mean of episode returns.
double evaluate_cartpole(const Mlp& qnet, int episodes, uint64_t seed);
double evaluate_pointmass(const Mlp& actor, int episodes, uint64_t seed);

}  // namespace gst
