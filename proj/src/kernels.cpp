#include "gst/kernels.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gst/grouping.hpp"

namespace gst {
namespace kernels {

namespace {

int resolve_thread_count() {
  if (const char* env = std::getenv("GST_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 0;
}

int g_threads = resolve_thread_count();

inline int threads_for_impl(long long work) {
#ifdef _OPENMP
  // small problems stay serial; fork/join would dominate
  if (work < 16384) return 1;
  int n = g_threads > 0 ? g_threads : omp_get_max_threads();
  return n > 0 ? n : 1;
#else
  (void)work;
  return 1;
#endif
}

}  // namespace

int thread_count() { return g_threads; }
void set_thread_count(int n) { g_threads = n; }
int threads_for(long long work) { return threads_for_impl(work); }

// ---- serial reference versions ----

namespace serial {

void matvec(const float* w, int rows, int cols, const float* x, float* y) {
  for (int i = 0; i < rows; ++i) {
    const float* row = w + static_cast<size_t>(i) * cols;
    float acc = 0.0f;
    for (int j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void matvec_transposed(const float* w, int rows, int cols, const float* x, float* y) {
  for (int j = 0; j < cols; ++j) {
    float acc = 0.0f;
    for (int i = 0; i < rows; ++i) acc += w[static_cast<size_t>(i) * cols + j] * x[i];
    y[j] = acc;
  }
}

void realize(const GroupPattern& p, const float* values, const uint8_t* mask, float* out) {
  size_t n = p.positions();
  for (size_t pos = 0; pos < n; ++pos) {
    uint32_t g = p.group_of[pos];
    out[pos] = mask[g] ? values[g] : 0.0f;
  }
}

void group_means(const GroupPattern& p, const float* m, float* means) {
  for (uint32_t g = 0; g < p.group_count; ++g) {
    float acc = 0.0f;
    for (uint32_t k = p.member_off[g]; k < p.member_off[g + 1]; ++k) acc += m[p.member_pos[k]];
    means[g] = acc / static_cast<float>(p.group_size(g));
  }
}

void group_grad_accumulate(const GroupPattern& p, const float* delta, const float* x,
                           float* grads) {
  int cols = p.cols;
  for (uint32_t g = 0; g < p.group_count; ++g) {
    float acc = 0.0f;
    for (uint32_t k = p.member_off[g]; k < p.member_off[g + 1]; ++k) {
      uint32_t pos = p.member_pos[k];
      acc += delta[pos / cols] * x[pos % cols];
    }
    grads[g] += acc;
  }
}

}  // namespace serial

// ---- OpenMP versions; each output element belongs to one thread and the
// summation order inside it matches the serial twin, so results are
// bit-identical regardless of thread count ----

void matvec(const float* w, int rows, int cols, const float* x, float* y) {
  int nt = threads_for_impl(static_cast<long long>(rows) * cols);
  if (nt == 1) {
    serial::matvec(w, rows, cols, x, y);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
  for (int i = 0; i < rows; ++i) {
    const float* row = w + static_cast<size_t>(i) * cols;
    float acc = 0.0f;
    for (int j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
#endif
}

void matvec_transposed(const float* w, int rows, int cols, const float* x, float* y) {
  int nt = threads_for_impl(static_cast<long long>(rows) * cols);
  if (nt == 1) {
    serial::matvec_transposed(w, rows, cols, x, y);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
  for (int j = 0; j < cols; ++j) {
    float acc = 0.0f;
    for (int i = 0; i < rows; ++i) acc += w[static_cast<size_t>(i) * cols + j] * x[i];
    y[j] = acc;
  }
#endif
}

void realize(const GroupPattern& p, const float* values, const uint8_t* mask, float* out) {
  long long n = static_cast<long long>(p.positions());
  int nt = threads_for_impl(n);
  if (nt == 1) {
    serial::realize(p, values, mask, out);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
  for (long long pos = 0; pos < n; ++pos) {
    uint32_t g = p.group_of[pos];
    out[pos] = mask[g] ? values[g] : 0.0f;
  }
#endif
}

void group_means(const GroupPattern& p, const float* m, float* means) {
  int nt = threads_for_impl(static_cast<long long>(p.positions()));
  if (nt == 1) {
    serial::group_means(p, m, means);
    return;
  }
#ifdef _OPENMP
  long long gc = p.group_count;
#pragma omp parallel for schedule(static) num_threads(nt)
  for (long long g = 0; g < gc; ++g) {
    float acc = 0.0f;
    for (uint32_t k = p.member_off[g]; k < p.member_off[g + 1]; ++k) acc += m[p.member_pos[k]];
    means[g] = acc / static_cast<float>(p.group_size(static_cast<uint32_t>(g)));
  }
#endif
}

void group_grad_accumulate(const GroupPattern& p, const float* delta, const float* x,
                           float* grads) {
  int nt = threads_for_impl(static_cast<long long>(p.positions()));
  if (nt == 1) {
    serial::group_grad_accumulate(p, delta, x, grads);
    return;
  }
#ifdef _OPENMP
  int cols = p.cols;
  long long gc = p.group_count;
#pragma omp parallel for schedule(static) num_threads(nt)
  for (long long g = 0; g < gc; ++g) {
    float acc = 0.0f;
    for (uint32_t k = p.member_off[g]; k < p.member_off[g + 1]; ++k) {
      uint32_t pos = p.member_pos[k];
      acc += delta[pos / cols] * x[pos % cols];
    }
    grads[g] += acc;
  }
#endif
}

}  // namespace kernels
}  // namespace gst
