#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gst/grouping.hpp"
#include "gst/sparsity.hpp"

namespace gst {

enum class Act : uint8_t { Relu = 0, Tanh = 1, Identity = 2 };

const char* act_name(Act a);
Act act_from_name(const std::string& name);

// Fully-connected layer over a shared-value weight tensor. Weight rows are
// out_dim, cols are in_dim. Biases stay dense and are never pruned.
struct CompressedLinear {
  CompressedTensor weight;
  std::vector<float> bias;
  bool compressed = false;  // participates in grouping/pruning

  int in_dim() const { return weight.cols(); }
  int out_dim() const { return weight.rows(); }
};

struct Mlp {
  std::vector<CompressedLinear> layers;
  std::vector<Act> acts;  // one per layer

  int in_dim() const { return layers.front().in_dim(); }
  int out_dim() const { return layers.back().out_dim(); }

  std::vector<LayerView> layer_views() const;
};

// Dense layers with uniform(-1/sqrt(in), +1/sqrt(in)) weights and biases,
// drawn row-major, weights before bias, layer by layer.
Mlp make_mlp(Rng& rng, const std::vector<int>& dims, const std::vector<Act>& acts);

struct ForwardCache {
  std::vector<std::vector<float>> inputs;   // x fed to each layer
  std::vector<std::vector<float>> preacts;  // z = Wx + b per layer
  std::vector<Matrix> realized;             // realized weight per layer
  std::vector<float> output;
};

// Inference-only forward (no cache).
std::vector<float> forward(const Mlp& mlp, const std::vector<float>& x);
ForwardCache forward_cached(const Mlp& mlp, const std::vector<float>& x);

struct Gradients {
  std::vector<std::vector<float>> weight;  // per layer, one entry per group
  std::vector<std::vector<float>> bias;
  std::vector<float> input;

  void add(const Gradients& other);
  void scale(float s);
};

// Weight-sharing chain rule: the dense gradient delta * x^T summed over each
// group's members; pruned groups get exactly 0. Input grad flows through the
// masked realized weight.
Gradients backward(const Mlp& mlp, const ForwardCache& cache,
                   const std::vector<float>& output_grad);

// Batched forward+backward with a per-sample output-gradient callback.
// Samples are processed in parallel; the reduction runs in index order, so
// the result is bit-identical for any thread count.
struct BatchResult {
  Gradients grads;                         // summed over samples
  std::vector<std::vector<float>> outputs;  // per sample
};
BatchResult batch_backward(
    const Mlp& mlp, const std::vector<const float*>& xs, int in_dim,
    const std::function<std::vector<float>(size_t, const std::vector<float>&)>& output_grad_fn);

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Per-layer first/second moment estimates, sized to the current group count.
struct LayerMoments {
  std::vector<float> m_w, v_w;  // per group
  std::vector<float> m_b, v_b;  // per bias entry
};

struct OptimState {
  AdamParams hp;
  uint64_t step = 0;
  std::vector<LayerMoments> layers;
};

OptimState make_optim(const Mlp& mlp, const AdamParams& hp);

// One adaptive-moment step. Pruned groups are untouched and stay 0.
void optim_step(Mlp& mlp, const Gradients& grads, OptimState& opt);

// Unpack a grouped layer to the dense pattern: values, masks and optimizer
// moments are copied to every member position; the realized weight is
// bit-identical before and after.
void release_grouping(CompressedLinear& layer, LayerMoments* moments);

enum class ConvertMethod : uint8_t { Friendly = 0, Projection = 1 };
const char* convert_method_name(ConvertMethod m);

// Block size conversion applied to a live layer. Moments follow the same
// realize-then-group-mean path as values, which for friendly conversions is
// an exact copy from the unique source group.
void convert_layer(CompressedLinear& layer, PatternPtr target, ConvertMethod method,
                   LayerMoments* moments);

}  // namespace gst
