#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gst/error.hpp"

namespace gst {

// Dense row-major single-precision matrix. Training values are fp32; the
// 16-bit figure in the compression accounting is a storage model only.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<float> data;  // rows*cols, row-major

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0f) {}

  float& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  float at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
  size_t size() const { return data.size(); }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0f;
    return m;
  }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// Counter-based deterministic generator (splitmix64). Identical seeds give
// identical streams on every platform; there is no global state anywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // in [0, 1), 53-bit resolution
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // in [0, 1), 24-bit resolution
  float next_float() { return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // uniform integer in [0, n)
  uint64_t next_below(uint64_t n);

  // standard normal via Box-Muller (one value per call; no cached spare,
  // so the stream position is a pure function of the call count)
  double next_normal();

  // Independent substream: same (seed, tag) always yields the same stream.
  Rng fork(uint64_t tag) const;

  uint64_t state() const { return state_; }
  void set_state(uint64_t s) { state_ = s; }

 private:
  uint64_t state_;
};

// y = m * x
std::vector<float> matvec(const Matrix& m, const std::vector<float>& x);

// y = m^T * x
std::vector<float> matvec_transposed(const Matrix& m, const std::vector<float>& x);

// Entries i.i.d. uniform in [-scale, +scale], filled row-major.
Matrix uniform_init(Rng& rng, int rows, int cols, double scale);

// Central differences (f(x+eps*e_i) - f(x-eps*e_i)) / (2*eps).
std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     const std::vector<double>& x, double eps);

}  // namespace gst
