#include "gst/rlenv.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace gst {

namespace {
constexpr double kGravity = 9.8;
constexpr double kCartMass = 1.0;
constexpr double kPoleMass = 0.1;
constexpr double kTotalMass = kCartMass + kPoleMass;
constexpr double kHalfLength = 0.5;
constexpr double kPoleMassLength = kPoleMass * kHalfLength;
constexpr double kForce = 10.0;
constexpr double kTau = 0.02;
constexpr double kThetaLimit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
constexpr double kXLimit = 2.4;
constexpr int kCartPoleHorizon = 200;

constexpr double kPmDt = 0.05;
constexpr double kPmSpeedLimit = 2.0;
constexpr int kPmHorizon = 200;
}  // namespace

EnvSpec CartPole::spec() { return {"cartpole", 4, 2, 0, kCartPoleHorizon}; }

std::vector<float> CartPole::observation() const {
  return {static_cast<float>(x_), static_cast<float>(xdot_), static_cast<float>(theta_),
          static_cast<float>(thetadot_)};
}

std::vector<float> CartPole::reset(Rng& rng) {
  x_ = rng.uniform(-0.05, 0.05);
  xdot_ = rng.uniform(-0.05, 0.05);
  theta_ = rng.uniform(-0.05, 0.05);
  thetadot_ = rng.uniform(-0.05, 0.05);
  steps_ = 0;
  return observation();
}

StepResult CartPole::step(int action) {
  if (action != 0 && action != 1)
    throw std::invalid_argument("cartpole: action must be 0 or 1, got " +
                                std::to_string(action));
  double force = action == 1 ? kForce : -kForce;
  double costh = std::cos(theta_);
  double sinth = std::sin(theta_);
  double temp = (force + kPoleMassLength * thetadot_ * thetadot_ * sinth) / kTotalMass;
  double thetaacc = (kGravity * sinth - costh * temp) /
                    (kHalfLength * (4.0 / 3.0 - kPoleMass * costh * costh / kTotalMass));
  double xacc = temp - kPoleMassLength * thetaacc * costh / kTotalMass;
  x_ += kTau * xdot_;
  xdot_ += kTau * xacc;
  theta_ += kTau * thetadot_;
  thetadot_ += kTau * thetaacc;
  steps_ += 1;

  bool done = std::fabs(x_) > kXLimit || std::fabs(theta_) > kThetaLimit ||
              steps_ >= kCartPoleHorizon;
  return {observation(), 1.0, done};
}

void CartPole::restore(const std::vector<double>& s, int steps) {
  x_ = s.at(0);
  xdot_ = s.at(1);
  theta_ = s.at(2);
  thetadot_ = s.at(3);
  steps_ = steps;
}

EnvSpec PointMass::spec() { return {"pointmass", 4, 0, 2, kPmHorizon}; }

std::vector<float> PointMass::observation() const {
  return {static_cast<float>(px_), static_cast<float>(py_), static_cast<float>(vx_),
          static_cast<float>(vy_)};
}

std::vector<float> PointMass::reset(Rng& rng) {
  px_ = rng.uniform(-1, 1);
  py_ = rng.uniform(-1, 1);
  vx_ = vy_ = 0;
  steps_ = 0;
  return observation();
}

StepResult PointMass::step(const std::vector<float>& action) {
  if (action.size() != 2) throw ShapeError("pointmass: action must have 2 components");
  double ax = std::clamp(static_cast<double>(action[0]), -1.0, 1.0);
  double ay = std::clamp(static_cast<double>(action[1]), -1.0, 1.0);
  vx_ += kPmDt * ax;
  vy_ += kPmDt * ay;
  double speed = std::sqrt(vx_ * vx_ + vy_ * vy_);
  if (speed > kPmSpeedLimit) {
    vx_ *= kPmSpeedLimit / speed;
    vy_ *= kPmSpeedLimit / speed;
  }
  px_ += kPmDt * vx_;
  py_ += kPmDt * vy_;
  steps_ += 1;
  double reward = -(px_ * px_ + py_ * py_ + 0.01 * (ax * ax + ay * ay));
  return {observation(), reward, steps_ >= kPmHorizon};
}

void PointMass::restore(const std::vector<double>& s, int steps) {
  px_ = s.at(0);
  py_ = s.at(1);
  vx_ = s.at(2);
  vy_ = s.at(3);
  steps_ = steps;
}

ScriptedEnv::ScriptedEnv(std::vector<double> returns) : returns_(std::move(returns)) {
  if (returns_.empty()) throw std::invalid_argument("scripted env needs a non-empty sequence");
}

EnvSpec ScriptedEnv::spec() { return {"scripted", 2, 2, 0, 1}; }

std::vector<float> ScriptedEnv::reset(Rng&) { return {0.0f, 0.0f}; }

StepResult ScriptedEnv::step(int) {
  double r = returns_[cursor_ % returns_.size()];
  cursor_ += 1;
  return {{0.0f, 0.0f}, r, true};
}

void ReplayBuffer::add(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<size_t> ReplayBuffer::sample_indices(size_t k) {
  size_t n = data_.size();
  if (k > n) throw std::invalid_argument("replay sample larger than buffer");
  std::vector<size_t> out;
  out.reserve(k);
  std::unordered_set<size_t> chosen;
  for (size_t j = n - k; j < n; ++j) {
    size_t t = static_cast<size_t>(rng_.next_below(j + 1));
    if (chosen.insert(t).second) {
      out.push_back(t);
    } else {
      chosen.insert(j);
      out.push_back(j);
    }
  }
  return out;
}

}  // namespace gst
