#include "gst/netcore.hpp"

#include <cmath>

#include "gst/kernels.hpp"

namespace gst {

const char* act_name(Act a) {
  switch (a) {
    case Act::Relu: return "relu";
    case Act::Tanh: return "tanh";
    case Act::Identity: return "identity";
  }
  return "?";
}

Act act_from_name(const std::string& name) {
  if (name == "relu") return Act::Relu;
  if (name == "tanh") return Act::Tanh;
  if (name == "identity") return Act::Identity;
  throw ConfigError("unknown activation: " + name);
}

std::vector<LayerView> Mlp::layer_views() const {
  std::vector<LayerView> views;
  views.reserve(layers.size());
  for (const auto& l : layers) views.push_back({&l.weight, l.compressed});
  return views;
}

Mlp make_mlp(Rng& rng, const std::vector<int>& dims, const std::vector<Act>& acts) {
  if (dims.size() < 2) throw ShapeError("make_mlp: need at least one layer");
  if (acts.size() != dims.size() - 1) throw ShapeError("make_mlp: one activation per layer");
  Mlp mlp;
  mlp.acts = acts;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    int in = dims[l], out = dims[l + 1];
    double scale = 1.0 / std::sqrt(static_cast<double>(in));
    CompressedLinear layer;
    layer.weight = project(uniform_init(rng, out, in, scale),
                           build_pattern(PatternKind::Dense, out, in, 1));
    layer.bias.resize(out);
    for (auto& b : layer.bias) b = static_cast<float>(rng.uniform(-scale, scale));
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

namespace {

inline float apply_act(Act a, float z) {
  switch (a) {
    case Act::Relu: return z > 0.0f ? z : 0.0f;
    case Act::Tanh: return std::tanh(z);
    case Act::Identity: return z;
  }
  return z;
}

inline float act_deriv(Act a, float z) {
  switch (a) {
    case Act::Relu: return z > 0.0f ? 1.0f : 0.0f;
    case Act::Tanh: {
      float t = std::tanh(z);
      return 1.0f - t * t;
    }
    case Act::Identity: return 1.0f;
  }
  return 1.0f;
}

}  // namespace

std::vector<float> forward(const Mlp& mlp, const std::vector<float>& x) {
  if (static_cast<int>(x.size()) != mlp.in_dim())
    throw ShapeError("forward: input has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(mlp.in_dim()));
  std::vector<float> cur = x;
  for (size_t l = 0; l < mlp.layers.size(); ++l) {
    const auto& layer = mlp.layers[l];
    Matrix w = realize(layer.weight);
    std::vector<float> z = matvec(w, cur);
    for (int i = 0; i < layer.out_dim(); ++i) z[i] = apply_act(mlp.acts[l], z[i] + layer.bias[i]);
    cur = std::move(z);
  }
  return cur;
}

ForwardCache forward_cached(const Mlp& mlp, const std::vector<float>& x) {
  if (static_cast<int>(x.size()) != mlp.in_dim())
    throw ShapeError("forward: input has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(mlp.in_dim()));
  ForwardCache cache;
  std::vector<float> cur = x;
  for (size_t l = 0; l < mlp.layers.size(); ++l) {
    const auto& layer = mlp.layers[l];
    cache.inputs.push_back(cur);
    cache.realized.push_back(realize(layer.weight));
    std::vector<float> z = matvec(cache.realized.back(), cur);
    for (int i = 0; i < layer.out_dim(); ++i) z[i] += layer.bias[i];
    cache.preacts.push_back(z);
    for (int i = 0; i < layer.out_dim(); ++i) z[i] = apply_act(mlp.acts[l], z[i]);
    cur = std::move(z);
  }
  cache.output = cur;
  return cache;
}

void Gradients::add(const Gradients& other) {
  for (size_t l = 0; l < weight.size(); ++l) {
    for (size_t g = 0; g < weight[l].size(); ++g) weight[l][g] += other.weight[l][g];
    for (size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += other.bias[l][i];
  }
  for (size_t i = 0; i < input.size(); ++i) input[i] += other.input[i];
}

void Gradients::scale(float s) {
  for (auto& w : weight)
    for (auto& v : w) v *= s;
  for (auto& b : bias)
    for (auto& v : b) v *= s;
  for (auto& v : input) v *= s;
}

Gradients backward(const Mlp& mlp, const ForwardCache& cache,
                   const std::vector<float>& output_grad) {
  size_t L = mlp.layers.size();
  if (cache.inputs.size() != L || cache.preacts.size() != L)
    throw ShapeError("backward: cache does not match model");
  if (output_grad.size() != cache.output.size())
    throw ShapeError("backward: output grad has length " + std::to_string(output_grad.size()) +
                     ", expected " + std::to_string(cache.output.size()));

  Gradients grads;
  grads.weight.resize(L);
  grads.bias.resize(L);

  std::vector<float> delta = output_grad;
  for (size_t l = L; l-- > 0;) {
    const auto& layer = mlp.layers[l];
    const auto& z = cache.preacts[l];
    for (int i = 0; i < layer.out_dim(); ++i) delta[i] *= act_deriv(mlp.acts[l], z[i]);

    grads.bias[l] = delta;
    grads.weight[l].assign(layer.weight.groups(), 0.0f);
    kernels::group_grad_accumulate(*layer.weight.pattern, delta.data(), cache.inputs[l].data(),
                                   grads.weight[l].data());
    for (uint32_t g = 0; g < layer.weight.groups(); ++g)
      if (!layer.weight.mask[g]) grads.weight[l][g] = 0.0f;

    delta = matvec_transposed(cache.realized[l], delta);
  }
  grads.input = std::move(delta);
  return grads;
}

BatchResult batch_backward(
    const Mlp& mlp, const std::vector<const float*>& xs, int in_dim,
    const std::function<std::vector<float>(size_t, const std::vector<float>&)>& output_grad_fn) {
  size_t n = xs.size();
  std::vector<Gradients> per_sample(n);
  BatchResult result;
  result.outputs.resize(n);

  long long work = static_cast<long long>(n) * in_dim * 64;
  int nt = kernels::threads_for(work);
  (void)nt;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
#endif
  for (long long s = 0; s < static_cast<long long>(n); ++s) {
    std::vector<float> x(xs[s], xs[s] + in_dim);
    ForwardCache cache = forward_cached(mlp, x);
    std::vector<float> og = output_grad_fn(static_cast<size_t>(s), cache.output);
    per_sample[s] = backward(mlp, cache, og);
    result.outputs[s] = std::move(cache.output);
  }

  result.grads = std::move(per_sample[0]);
  for (size_t s = 1; s < n; ++s) result.grads.add(per_sample[s]);
  return result;
}

OptimState make_optim(const Mlp& mlp, const AdamParams& hp) {
  OptimState opt;
  opt.hp = hp;
  for (const auto& layer : mlp.layers) {
    LayerMoments lm;
    lm.m_w.assign(layer.weight.groups(), 0.0f);
    lm.v_w.assign(layer.weight.groups(), 0.0f);
    lm.m_b.assign(layer.bias.size(), 0.0f);
    lm.v_b.assign(layer.bias.size(), 0.0f);
    opt.layers.push_back(std::move(lm));
  }
  return opt;
}

void optim_step(Mlp& mlp, const Gradients& grads, OptimState& opt) {
  opt.step += 1;
  double b1 = opt.hp.beta1, b2 = opt.hp.beta2;
  double corr1 = 1.0 - std::pow(b1, static_cast<double>(opt.step));
  double corr2 = 1.0 - std::pow(b2, static_cast<double>(opt.step));
  double lr = opt.hp.lr, eps = opt.hp.eps;

  auto update = [&](float& param, float g, float& m, float& v) {
    m = static_cast<float>(b1 * m + (1.0 - b1) * g);
    v = static_cast<float>(b2 * v + (1.0 - b2) * static_cast<double>(g) * g);
    double mhat = m / corr1;
    double vhat = v / corr2;
    param -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + eps));
  };

  for (size_t l = 0; l < mlp.layers.size(); ++l) {
    auto& layer = mlp.layers[l];
    auto& lm = opt.layers[l];
    for (uint32_t g = 0; g < layer.weight.groups(); ++g) {
      if (!layer.weight.mask[g]) continue;
      update(layer.weight.values[g], grads.weight[l][g], lm.m_w[g], lm.v_w[g]);
    }
    for (size_t i = 0; i < layer.bias.size(); ++i)
      update(layer.bias[i], grads.bias[l][i], lm.m_b[i], lm.v_b[i]);
  }
}

namespace {

// Realize a per-group array to positions under `from`, then take group means
// under `to`. Friendly transitions and release make this an exact copy.
std::vector<float> remap_per_group(const GroupPattern& from, const GroupPattern& to,
                                   const std::vector<float>& vals) {
  std::vector<float> out(to.group_count);
  for (uint32_t g = 0; g < to.group_count; ++g) {
    double acc = 0.0;
    for (uint32_t k = to.member_off[g]; k < to.member_off[g + 1]; ++k)
      acc += vals[from.group_of[to.member_pos[k]]];
    out[g] = static_cast<float>(acc / to.group_size(g));
  }
  return out;
}

}  // namespace

void release_grouping(CompressedLinear& layer, LayerMoments* moments) {
  PatternPtr dense =
      build_pattern(PatternKind::Dense, layer.weight.rows(), layer.weight.cols(), 1);
  CompressedTensor out(dense);
  const GroupPattern& p = *layer.weight.pattern;
  for (size_t pos = 0; pos < p.positions(); ++pos) {
    uint32_t g = p.group_of[pos];
    out.values[pos] = layer.weight.mask[g] ? layer.weight.values[g] : 0.0f;
    out.mask[pos] = layer.weight.mask[g];
  }
  if (moments) {
    moments->m_w = remap_per_group(p, *dense, moments->m_w);
    moments->v_w = remap_per_group(p, *dense, moments->v_w);
  }
  layer.weight = std::move(out);
}

const char* convert_method_name(ConvertMethod m) {
  return m == ConvertMethod::Friendly ? "friendly" : "projection";
}

void convert_layer(CompressedLinear& layer, PatternPtr target, ConvertMethod method,
                   LayerMoments* moments) {
  const GroupPattern& from = *layer.weight.pattern;
  CompressedTensor out = method == ConvertMethod::Friendly
                             ? convert_friendly(layer.weight, target)
                             : convert_projection(layer.weight, target);
  if (moments) {
    moments->m_w = remap_per_group(from, *out.pattern, moments->m_w);
    moments->v_w = remap_per_group(from, *out.pattern, moments->v_w);
  }
  layer.weight = std::move(out);
}

}  // namespace gst
