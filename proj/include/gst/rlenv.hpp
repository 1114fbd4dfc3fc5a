#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gst/numerics.hpp"

namespace gst {

struct Transition {
  std::vector<float> state;
  int action_index = 0;          // discrete tasks
  std::vector<float> action;     // continuous tasks
  float reward = 0.0f;
  std::vector<float> next_state;
  bool done = false;
};

struct EnvSpec {
  std::string name;
  int state_dim = 0;
  int discrete_actions = 0;      // 0 for continuous
  int action_dim = 0;            // box [-1, 1]^action_dim when > 0
  int max_episode_steps = 0;
};

struct StepResult {
  std::vector<float> state;
  double reward = 0.0;
  bool done = false;
};

// Classic cart-pole: gravity 9.8, cart mass 1.0, pole mass 0.1, pole
// half-length 0.5, force 10, Euler integration with dt 0.02. Reward +1 per
// step; episode ends at |theta| > 12 degrees, |x| > 2.4 or 200 steps.
class CartPole {
 public:
  static EnvSpec spec();
  std::vector<float> reset(Rng& rng);  // start uniform in [-0.05, 0.05]^4
  StepResult step(int action);         // action in {0, 1}

  std::vector<double> raw_state() const { return {x_, xdot_, theta_, thetadot_}; }
  void restore(const std::vector<double>& s, int steps);
  int steps() const { return steps_; }

 private:
  double x_ = 0, xdot_ = 0, theta_ = 0, thetadot_ = 0;
  int steps_ = 0;
  std::vector<float> observation() const;
};

// Point mass on the plane: state (pos, vel), vel += 0.05 * action with speed
// clipped to 2, pos += 0.05 * vel. Reward -(|pos|^2 + 0.01 |action|^2);
// actions outside [-1, 1]^2 are clipped, not rejected. 200-step episodes.
class PointMass {
 public:
  static EnvSpec spec();
  std::vector<float> reset(Rng& rng);  // position uniform in [-1, 1]^2, velocity 0
  StepResult step(const std::vector<float>& action);

  std::vector<double> raw_state() const { return {px_, py_, vx_, vy_}; }
  void restore(const std::vector<double>& s, int steps);
  int steps() const { return steps_; }

 private:
  double px_ = 0, py_ = 0, vx_ = 0, vy_ = 0;
  int steps_ = 0;
  std::vector<float> observation() const;
};

// Deterministic driver for scheduler traces: every episode is one step whose
// return is the next scripted value (cycling); the policy's output is ignored.
class ScriptedEnv {
 public:
  explicit ScriptedEnv(std::vector<double> returns);
  static EnvSpec spec();
  std::vector<float> reset(Rng& rng);
  StepResult step(int action);

  size_t cursor() const { return cursor_; }
  void restore(size_t cursor) { cursor_ = cursor; }

 private:
  std::vector<double> returns_;
  size_t cursor_ = 0;
};

// Ring buffer with a seeded sampler; batches are uniform without replacement.
class ReplayBuffer {
 public:
  ReplayBuffer(size_t capacity, uint64_t seed) : rng_(seed), capacity_(capacity) {}

  void add(Transition t);
  size_t size() const { return data_.size(); }
  size_t capacity() const { return capacity_; }
  const Transition& operator[](size_t i) const { return data_[i]; }

  // k distinct indices, deterministic per seed (Floyd's sampling)
  std::vector<size_t> sample_indices(size_t k);

  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }
  size_t write_cursor() const { return next_; }
  void restore_cursor(size_t next) { next_ = next; }

 private:
  Rng rng_;
  size_t capacity_;
  size_t next_ = 0;
  std::vector<Transition> data_;
};

}  // namespace gst
