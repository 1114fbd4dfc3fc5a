#pragma once

// Reference cart-pole dynamics, written out independently from the engine's
// environment (classic formulation: force 10, gravity 9.8, cart mass 1.0,
// pole mass 0.1, half-length 0.5, Euler dt 0.02).

#include <cmath>

namespace oracle {

struct CartPoleRef {
  double x = 0, x_dot = 0, theta = 0, theta_dot = 0;
  int steps = 0;

  struct Out {
    double reward;
    bool done;
  };

  Out step(int action) {
    const double g = 9.8, mc = 1.0, mp = 0.1, total = mc + mp, half_len = 0.5;
    const double force_mag = 10.0, dt = 0.02;
    double force = action == 1 ? force_mag : -force_mag;
    double ct = std::cos(theta), st = std::sin(theta);
    double temp = (force + mp * half_len * theta_dot * theta_dot * st) / total;
    double theta_acc = (g * st - ct * temp) / (half_len * (4.0 / 3.0 - mp * ct * ct / total));
    double x_acc = temp - mp * half_len * theta_acc * ct / total;
    x += dt * x_dot;
    x_dot += dt * x_acc;
    theta += dt * theta_dot;
    theta_dot += dt * theta_acc;
    steps += 1;
    bool done = std::fabs(x) > 2.4 || std::fabs(theta) > 12.0 * M_PI / 180.0 || steps >= 200;
    return {1.0, done};
  }
};

}  // namespace oracle
