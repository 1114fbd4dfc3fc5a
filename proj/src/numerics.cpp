#include "gst/numerics.hpp"

#include <cmath>

#include "gst/kernels.hpp"

namespace gst {

uint64_t Rng::next_below(uint64_t n) {
  // rejection sampling keeps the draw unbiased
  uint64_t threshold = (0ULL - n) % n;
  for (;;) {
    uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double Rng::next_normal() {
  // u1 in (0,1] so the log is finite
  double u1 = 1.0 - next_double();
  double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

Rng Rng::fork(uint64_t tag) const {
  // run the tag through one splitmix round so forks of consecutive tags
  // land far apart
  uint64_t z = state_ + (tag + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return Rng(z ^ (z >> 31));
}

std::vector<float> matvec(const Matrix& m, const std::vector<float>& x) {
  if (static_cast<int>(x.size()) != m.cols)
    throw ShapeError("matvec: x has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(m.cols));
  std::vector<float> y(m.rows);
  kernels::matvec(m.data.data(), m.rows, m.cols, x.data(), y.data());
  return y;
}

std::vector<float> matvec_transposed(const Matrix& m, const std::vector<float>& x) {
  if (static_cast<int>(x.size()) != m.rows)
    throw ShapeError("matvec_transposed: x has length " + std::to_string(x.size()) +
                     ", expected " + std::to_string(m.rows));
  std::vector<float> y(m.cols);
  kernels::matvec_transposed(m.data.data(), m.rows, m.cols, x.data(), y.data());
  return y;
}

Matrix uniform_init(Rng& rng, int rows, int cols, double scale) {
  if (scale <= 0.0) throw std::invalid_argument("uniform_init: scale must be positive");
  Matrix m(rows, cols);
  for (auto& v : m.data) v = static_cast<float>(rng.uniform(-scale, scale));
  return m;
}

std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     const std::vector<double>& x, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("finite_diff_grad: eps must be positive");
  std::vector<double> grad(x.size());
  std::vector<double> probe = x;
  for (size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    double hi = f(probe);
    probe[i] = x[i] - eps;
    double lo = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(hi) || !std::isfinite(lo))
      throw EvalError("finite_diff_grad: non-finite value at coordinate " + std::to_string(i));
    grad[i] = (hi - lo) / (2.0 * eps);
  }
  return grad;
}

}  // namespace gst
