#pragma once

#include <cstdint>
#include <vector>

namespace gst {

struct GroupPattern;

// Hot inner loops, parallelized with OpenMP. Every kernel assigns each output
// element to exactly one thread and keeps a fixed summation order inside it,
// so results are bit-identical for any thread count, including the serial
// reference twins in kernels::serial used by the tests and the benchmark.
namespace kernels {

// Thread count used by all parallel kernels. 0 = OpenMP default.
// Initialized once from GST_THREADS (falls back to OMP_NUM_THREADS handling
// inside the runtime).
int thread_count();
void set_thread_count(int n);
// threads a kernel of `work` elements should use (1 when small or serial)
int threads_for(long long work);

// y[i] = sum_j w[i*cols+j] * x[j]
void matvec(const float* w, int rows, int cols, const float* x, float* y);

// y[j] = sum_i w[i*cols+j] * x[i]
void matvec_transposed(const float* w, int rows, int cols, const float* x, float* y);

// out[p] = alive(group_of[p]) ? values[group_of[p]] : 0
void realize(const GroupPattern& p, const float* values, const uint8_t* mask, float* out);

// means[g] = mean of m over the members of group g
void group_means(const GroupPattern& p, const float* m, float* means);

// grads[g] += sum over members (i,j) of g of delta[i] * x[j]
void group_grad_accumulate(const GroupPattern& p, const float* delta, const float* x,
                           float* grads);

namespace serial {
void matvec(const float* w, int rows, int cols, const float* x, float* y);
void matvec_transposed(const float* w, int rows, int cols, const float* x, float* y);
void realize(const GroupPattern& p, const float* values, const uint8_t* mask, float* out);
void group_means(const GroupPattern& p, const float* m, float* means);
void group_grad_accumulate(const GroupPattern& p, const float* delta, const float* x,
                           float* grads);
}  // namespace serial

}  // namespace kernels
}  // namespace gst
