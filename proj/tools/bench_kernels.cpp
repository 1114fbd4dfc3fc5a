// Serial-vs-OpenMP kernel benchmark. Prints a GFLOP/s (or GB/s-ish) table per
// kernel and size so regressions in the parallel paths are visible.

#include <chrono>
#include <cstdio>
#include <vector>

#include "gst/kernels.hpp"
#include "gst/sparsity.hpp"

using namespace gst;

namespace {

double now_s() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

template <typename F>
double time_best(F&& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    double t0 = now_s();
    fn();
    best = std::min(best, now_s() - t0);
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  int max_size = argc > 1 ? std::atoi(argv[1]) : 2048;
  std::printf("threads: GST_THREADS=%d\n", kernels::thread_count());
  std::printf("%-22s %6s %12s %12s %8s\n", "kernel", "n", "serial ms", "parallel ms",
              "speedup");

  for (int n = 512; n <= max_size; n *= 2) {
    Rng rng(1);
    Matrix w = uniform_init(rng, n, n, 1.0);
    std::vector<float> x(n), y(n), d(n);
    for (auto& v : x) v = static_cast<float>(rng.uniform(-1, 1));
    for (auto& v : d) v = static_cast<float>(rng.uniform(-1, 1));
    auto pattern = build_pattern(PatternKind::Circulant, n, n, 4);
    auto ct = project(w, pattern);
    std::vector<float> realized(static_cast<size_t>(n) * n);
    std::vector<float> means(pattern->group_count);
    std::vector<float> grads(pattern->group_count);

    int reps = n >= 2048 ? 5 : 20;
    struct Row {
      const char* name;
      double serial, parallel;
    };
    std::vector<Row> rows;

    rows.push_back({"matvec",
                    time_best([&] { kernels::serial::matvec(w.data.data(), n, n, x.data(), y.data()); }, reps),
                    time_best([&] { kernels::matvec(w.data.data(), n, n, x.data(), y.data()); }, reps)});
    rows.push_back({"matvec_transposed",
                    time_best([&] { kernels::serial::matvec_transposed(w.data.data(), n, n, d.data(), y.data()); }, reps),
                    time_best([&] { kernels::matvec_transposed(w.data.data(), n, n, d.data(), y.data()); }, reps)});
    rows.push_back({"realize",
                    time_best([&] { kernels::serial::realize(*pattern, ct.values.data(), ct.mask.data(), realized.data()); }, reps),
                    time_best([&] { kernels::realize(*pattern, ct.values.data(), ct.mask.data(), realized.data()); }, reps)});
    rows.push_back({"group_means",
                    time_best([&] { kernels::serial::group_means(*pattern, w.data.data(), means.data()); }, reps),
                    time_best([&] { kernels::group_means(*pattern, w.data.data(), means.data()); }, reps)});
    rows.push_back({"group_grad_accumulate",
                    time_best([&] { std::fill(grads.begin(), grads.end(), 0.0f); kernels::serial::group_grad_accumulate(*pattern, d.data(), x.data(), grads.data()); }, reps),
                    time_best([&] { std::fill(grads.begin(), grads.end(), 0.0f); kernels::group_grad_accumulate(*pattern, d.data(), x.data(), grads.data()); }, reps)});

    for (const auto& r : rows)
      std::printf("%-22s %6d %12.3f %12.3f %7.2fx\n", r.name, n, r.serial * 1e3,
                  r.parallel * 1e3, r.serial / r.parallel);
  }

  // sanity: parallel results must be bit-identical to serial
  {
    int n = 1024;
    Rng rng(7);
    Matrix w = uniform_init(rng, n, n, 1.0);
    std::vector<float> x(n), a(n), b(n);
    for (auto& v : x) v = static_cast<float>(rng.uniform(-1, 1));
    kernels::serial::matvec(w.data.data(), n, n, x.data(), a.data());
    kernels::matvec(w.data.data(), n, n, x.data(), b.data());
    std::printf("bit-identical check: %s\n", a == b ? "ok" : "FAILED");
    if (a != b) return 1;
  }
  return 0;
}
