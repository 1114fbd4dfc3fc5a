#include "gst/learners.hpp"

#include "gst/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace gst {

namespace {

void mirror_mask(const Mlp& online, Mlp& target) {
  for (size_t l = 0; l < online.layers.size(); ++l) {
    const auto& src = online.layers[l].weight;
    auto& dst = target.layers[l].weight;
    for (uint32_t g = 0; g < src.groups(); ++g) {
      if (!src.mask[g]) {
        dst.mask[g] = 0;
        dst.values[g] = 0.0f;
      }
    }
  }
}

void hard_sync(const Mlp& online, Mlp& target) {
  for (size_t l = 0; l < online.layers.size(); ++l) {
    target.layers[l].weight = online.layers[l].weight;
    target.layers[l].bias = online.layers[l].bias;
    target.layers[l].compressed = online.layers[l].compressed;
  }
}

// first/last layers stay dense; everything between joins the schedule
void mark_hidden_compressed(Mlp& mlp) {
  for (size_t l = 1; l + 1 < mlp.layers.size(); ++l) mlp.layers[l].compressed = true;
}

}  // namespace

void family_init_structure(const std::vector<NetFamily>& families, const GstConfig& cfg) {
  for (const auto& f : families) {
    init_gst(*f.online, cfg);
    if (f.optim) *f.optim = make_optim(*f.online, f.optim->hp);
    if (f.target) hard_sync(*f.online, *f.target);
  }
}

void family_prune(const std::vector<NetFamily>& families, double target) {
  for (const auto& f : families) {
    for (auto& layer : f.online->layers)
      if (layer.compressed) magnitude_prune_inplace(layer.weight, target);
    if (f.target) mirror_mask(*f.online, *f.target);
  }
}

void family_release(const std::vector<NetFamily>& families) {
  for (const auto& f : families) {
    for (size_t l = 0; l < f.online->layers.size(); ++l) {
      auto& layer = f.online->layers[l];
      if (!layer.compressed || layer.weight.pattern->kind == PatternKind::Dense) continue;
      release_grouping(layer, f.optim ? &f.optim->layers[l] : nullptr);
      if (f.target) release_grouping(f.target->layers[l], nullptr);
    }
  }
}

void family_convert(const std::vector<NetFamily>& families, const ConversionConfig& conv) {
  for (const auto& f : families) {
    for (size_t l = 0; l < f.online->layers.size(); ++l) {
      auto& layer = f.online->layers[l];
      if (!layer.compressed || layer.weight.pattern->kind == PatternKind::Dense) continue;
      auto target_pattern = build_pattern(conv.target_kind, layer.out_dim(), layer.in_dim(),
                                          conv.target_block);
      convert_layer(layer, target_pattern, conv.method,
                    f.optim ? &f.optim->layers[l] : nullptr);
      if (f.target)
        convert_layer(f.target->layers[l], target_pattern, conv.method, nullptr);
    }
  }
}

std::vector<LayerView> family_views(const std::vector<NetFamily>& families) {
  std::vector<LayerView> views;
  for (const auto& f : families)
    for (const auto& l : f.online->layers) views.push_back({&l.weight, l.compressed});
  return views;
}

void soft_update(const Mlp& online, Mlp& target, double tau) {
  for (size_t l = 0; l < online.layers.size(); ++l) {
    const auto& src = online.layers[l];
    auto& dst = target.layers[l];
    if (!src.weight.pattern->same_partition(*dst.weight.pattern))
      throw StructureError("soft_update: online and target patterns diverged");
    for (uint32_t g = 0; g < src.weight.groups(); ++g)
      dst.weight.values[g] = static_cast<float>(tau * src.weight.values[g] +
                                                (1.0 - tau) * dst.weight.values[g]);
    for (size_t i = 0; i < src.bias.size(); ++i)
      dst.bias[i] = static_cast<float>(tau * src.bias[i] + (1.0 - tau) * dst.bias[i]);
  }
}

// ---- DQN ----

DqnLearner::DqnLearner(const EnvSpec& spec, const std::vector<int>& hidden, Act hidden_act,
                       const AdamParams& adam, const DqnHyper& hyper, Rng init_rng,
                       uint64_t buffer_seed, Rng explore_rng)
    : hyper_(hyper),
      buffer_(hyper.buffer_capacity, buffer_seed),
      explore_(explore_rng) {
  std::vector<int> dims = {spec.state_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(spec.discrete_actions);
  std::vector<Act> acts(hidden.size(), hidden_act);
  acts.push_back(Act::Identity);
  online_ = make_mlp(init_rng, dims, acts);
  mark_hidden_compressed(online_);
  target_ = online_;
  optim_ = make_optim(online_, adam);
}

double DqnLearner::epsilon(uint64_t env_step) const {
  if (hyper_.eps_decay_steps == 0) return hyper_.eps_end;
  double frac = std::min(1.0, static_cast<double>(env_step) /
                                  static_cast<double>(hyper_.eps_decay_steps));
  return hyper_.eps_start + frac * (hyper_.eps_end - hyper_.eps_start);
}

int DqnLearner::act_greedy(const std::vector<float>& state) const {
  auto q = forward(online_, state);
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

int DqnLearner::act(const std::vector<float>& state, uint64_t env_step) {
  double eps = epsilon(env_step);
  if (explore_.next_double() < eps)
    return static_cast<int>(explore_.next_below(static_cast<uint64_t>(online_.out_dim())));
  return act_greedy(state);
}

std::optional<double> DqnLearner::update(uint64_t env_step) {
  if (hyper_.update_every > 1 && env_step % hyper_.update_every != 0) return std::nullopt;
  if (buffer_.size() < std::max(hyper_.warmup, hyper_.batch)) return std::nullopt;

  auto idx = buffer_.sample_indices(hyper_.batch);
  size_t batch = idx.size();
  std::vector<const float*> xs(batch);
  std::vector<float> targets(batch);
  for (size_t s = 0; s < batch; ++s) {
    const Transition& tr = buffer_[idx[s]];
    xs[s] = tr.state.data();
    double bootstrap = 0.0;
    if (!tr.done) {
      auto qn = forward(target_, tr.next_state);
      bootstrap = *std::max_element(qn.begin(), qn.end());
    }
    targets[s] = static_cast<float>(tr.reward + hyper_.gamma * bootstrap);
  }

  double inv_batch = 1.0 / static_cast<double>(batch);
  std::vector<double> sq_errors(batch, 0.0);
  auto result = batch_backward(
      online_, xs, online_.in_dim(),
      [&](size_t s, const std::vector<float>& out) {
        std::vector<float> og(out.size(), 0.0f);
        int a = buffer_[idx[s]].action_index;
        float err = out[a] - targets[s];
        og[a] = static_cast<float>(err * inv_batch);
        sq_errors[s] = 0.5 * static_cast<double>(err) * err;
        return og;
      });
  optim_step(online_, result.grads, optim_);

  updates_ += 1;
  if (hyper_.target_sync > 0 && updates_ % hyper_.target_sync == 0)
    hard_sync(online_, target_);

  double loss = 0;
  for (double e : sq_errors) loss += e;
  return loss * inv_batch;
}

std::vector<NetFamily> DqnLearner::families() { return {{&online_, &target_, &optim_}}; }

// ---- TD3 ----

namespace {
Mlp make_net(Rng& rng, int in, const std::vector<int>& hidden, int out, Act hidden_act,
             Act out_act) {
  std::vector<int> dims = {in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  std::vector<Act> acts(hidden.size(), hidden_act);
  acts.push_back(out_act);
  Mlp mlp = make_mlp(rng, dims, acts);
  mark_hidden_compressed(mlp);
  return mlp;
}
}  // namespace

Td3LiteLearner::Td3LiteLearner(const EnvSpec& spec, const std::vector<int>& hidden,
                               Act hidden_act, const AdamParams& adam, const Td3Hyper& hyper,
                               Rng init_rng, uint64_t buffer_seed, Rng explore_rng)
    : hyper_(hyper),
      action_dim_(spec.action_dim),
      buffer_(hyper.buffer_capacity, buffer_seed),
      explore_(explore_rng),
      noise_(explore_rng.fork(0x7D3)) {
  actor_ = make_net(init_rng, spec.state_dim, hidden, spec.action_dim, hidden_act, Act::Tanh);
  critic1_ = make_net(init_rng, spec.state_dim + spec.action_dim, hidden, 1, hidden_act,
                      Act::Identity);
  critic2_ = make_net(init_rng, spec.state_dim + spec.action_dim, hidden, 1, hidden_act,
                      Act::Identity);
  actor_target_ = actor_;
  critic1_target_ = critic1_;
  critic2_target_ = critic2_;
  actor_optim_ = make_optim(actor_, adam);
  critic1_optim_ = make_optim(critic1_, adam);
  critic2_optim_ = make_optim(critic2_, adam);
}

std::vector<float> Td3LiteLearner::act_greedy(const std::vector<float>& state) const {
  return forward(actor_, state);
}

std::vector<float> Td3LiteLearner::act(const std::vector<float>& state) {
  auto a = act_greedy(state);
  for (auto& v : a) {
    v += static_cast<float>(hyper_.expl_noise * explore_.next_normal());
    v = std::clamp(v, -1.0f, 1.0f);
  }
  return a;
}

std::optional<double> Td3LiteLearner::update(uint64_t env_step) {
  if (hyper_.update_every > 1 && env_step % hyper_.update_every != 0) return std::nullopt;
  if (buffer_.size() < std::max(hyper_.warmup, hyper_.batch)) return std::nullopt;

  auto idx = buffer_.sample_indices(hyper_.batch);
  size_t batch = idx.size();
  int sdim = actor_.in_dim();

  // smoothing noise drawn up front so the parallel section stays deterministic
  std::vector<float> smoothing(batch * action_dim_);
  for (auto& v : smoothing) {
    double n = hyper_.policy_noise * noise_.next_normal();
    v = static_cast<float>(std::clamp(n, -hyper_.noise_clip, hyper_.noise_clip));
  }

  std::vector<float> critic_in(batch * (sdim + action_dim_));
  std::vector<float> targets(batch);
  for (size_t s = 0; s < batch; ++s) {
    const Transition& tr = buffer_[idx[s]];
    double bootstrap = 0.0;
    if (!tr.done) {
      auto next_a = forward(actor_target_, tr.next_state);
      for (int k = 0; k < action_dim_; ++k)
        next_a[k] = std::clamp(next_a[k] + smoothing[s * action_dim_ + k], -1.0f, 1.0f);
      std::vector<float> in(tr.next_state);
      in.insert(in.end(), next_a.begin(), next_a.end());
      double q1 = forward(critic1_target_, in)[0];
      double q2 = forward(critic2_target_, in)[0];
      bootstrap = std::min(q1, q2);
    }
    targets[s] = static_cast<float>(tr.reward + hyper_.gamma * bootstrap);
    float* dst = critic_in.data() + s * (sdim + action_dim_);
    std::copy(tr.state.begin(), tr.state.end(), dst);
    std::copy(buffer_[idx[s]].action.begin(), buffer_[idx[s]].action.end(), dst + sdim);
  }

  std::vector<const float*> xs(batch);
  for (size_t s = 0; s < batch; ++s) xs[s] = critic_in.data() + s * (sdim + action_dim_);
  double inv_batch = 1.0 / static_cast<double>(batch);

  double loss_acc = 0.0;
  for (Mlp* critic : {&critic1_, &critic2_}) {
    std::vector<double> sq(batch, 0.0);
    auto result = batch_backward(*critic, xs, sdim + action_dim_,
                                 [&](size_t s, const std::vector<float>& out) {
                                   float err = out[0] - targets[s];
                                   sq[s] = 0.5 * static_cast<double>(err) * err;
                                   return std::vector<float>{
                                       static_cast<float>(err * inv_batch)};
                                 });
    optim_step(*critic, result.grads, critic == &critic1_ ? critic1_optim_ : critic2_optim_);
    for (double e : sq) loss_acc += e;
  }
  critic_updates_ += 1;

  if (critic_updates_ % hyper_.policy_delay == 0) {
    // deterministic policy gradient: push actions along dQ1/da
    std::vector<Gradients> per_sample(batch);
    int nt = kernels::threads_for(static_cast<long long>(batch) * (sdim + action_dim_) * 64);
    (void)nt;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
#endif
    for (long long s = 0; s < static_cast<long long>(batch); ++s) {
      const Transition& tr = buffer_[idx[s]];
      auto actor_cache = forward_cached(actor_, tr.state);
      std::vector<float> in(tr.state);
      in.insert(in.end(), actor_cache.output.begin(), actor_cache.output.end());
      auto critic_cache = forward_cached(critic1_, in);
      auto critic_grads =
          backward(critic1_, critic_cache, {static_cast<float>(-inv_batch)});
      std::vector<float> action_grad(critic_grads.input.begin() + sdim,
                                     critic_grads.input.end());
      per_sample[s] = backward(actor_, actor_cache, action_grad);
    }
    Gradients actor_grads = std::move(per_sample[0]);
    for (size_t s = 1; s < batch; ++s) actor_grads.add(per_sample[s]);
    optim_step(actor_, actor_grads, actor_optim_);
    actor_updates_ += 1;

    soft_update(actor_, actor_target_, hyper_.tau);
    soft_update(critic1_, critic1_target_, hyper_.tau);
    soft_update(critic2_, critic2_target_, hyper_.tau);
  }

  return loss_acc * inv_batch / 2.0;
}

std::vector<NetFamily> Td3LiteLearner::families() {
  return {{&actor_, &actor_target_, &actor_optim_},
          {&critic1_, &critic1_target_, &critic1_optim_},
          {&critic2_, &critic2_target_, &critic2_optim_}};
}

// ---- supervised ----

Dataset two_spirals(size_t points, double noise, uint64_t seed) {
  Dataset ds;
  Rng rng(seed);
  size_t per_class = points / 2;
  for (size_t k = 0; k < points; ++k) {
    int label = static_cast<int>(k % 2);
    size_t i = k / 2;
    double t = static_cast<double>(i) / static_cast<double>(per_class);
    double r = 0.1 + 0.9 * t;
    double phi = 3.0 * 3.14159265358979323846 * t + (label ? 3.14159265358979323846 : 0.0);
    double x = r * std::cos(phi) + noise * rng.next_normal();
    double y = r * std::sin(phi) + noise * rng.next_normal();
    ds.x.push_back({static_cast<float>(x), static_cast<float>(y)});
    ds.y.push_back(label);
  }
  return ds;
}

SupervisedLearner::SupervisedLearner(const std::vector<int>& hidden, Act hidden_act,
                                     const AdamParams& adam, const SupervisedHyper& hyper,
                                     Rng init_rng, uint64_t batch_seed)
    : hyper_(hyper), batch_(batch_seed) {
  std::vector<int> dims = {2};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(2);
  std::vector<Act> acts(hidden.size(), hidden_act);
  acts.push_back(Act::Identity);
  model_ = make_mlp(init_rng, dims, acts);
  mark_hidden_compressed(model_);
  optim_ = make_optim(model_, adam);

  Dataset all = two_spirals(hyper.points, hyper.noise, hyper.data_seed);
  size_t stride = hyper.val_fraction > 0
                      ? std::max<size_t>(2, static_cast<size_t>(1.0 / hyper.val_fraction))
                      : 0;
  for (size_t i = 0; i < all.x.size(); ++i) {
    // points come in label-alternating pairs; split whole pairs so both
    // partitions stay class-balanced
    bool is_val = stride && ((i / 2) % stride == stride - 1);
    auto& dst = is_val ? val_ : train_;
    dst.x.push_back(all.x[i]);
    dst.y.push_back(all.y[i]);
  }
}

namespace {
// softmax cross-entropy pieces in double for stable losses
double ce_loss(const std::vector<float>& logits, int label) {
  double m = *std::max_element(logits.begin(), logits.end());
  double z = 0;
  for (float v : logits) z += std::exp(v - m);
  return -(logits[label] - m - std::log(z));
}
}  // namespace

double SupervisedLearner::update() {
  size_t batch = std::min(hyper_.batch, train_.x.size());
  std::vector<size_t> idx(batch);
  for (auto& i : idx) i = batch_.next_below(train_.x.size());

  std::vector<const float*> xs(batch);
  for (size_t s = 0; s < batch; ++s) xs[s] = train_.x[idx[s]].data();
  double inv_batch = 1.0 / static_cast<double>(batch);
  std::vector<double> losses(batch, 0.0);

  auto result = batch_backward(model_, xs, 2, [&](size_t s, const std::vector<float>& out) {
    int label = train_.y[idx[s]];
    losses[s] = ce_loss(out, label);
    double m = std::max(out[0], out[1]);
    double e0 = std::exp(out[0] - m), e1 = std::exp(out[1] - m);
    double z = e0 + e1;
    std::vector<float> og = {static_cast<float>((e0 / z - (label == 0)) * inv_batch),
                             static_cast<float>((e1 / z - (label == 1)) * inv_batch)};
    return og;
  });
  optim_step(model_, result.grads, optim_);

  double loss = 0;
  for (double v : losses) loss += v;
  return loss * inv_batch;
}

SupervisedLearner::ValReport SupervisedLearner::validate() const {
  ValReport rep;
  for (size_t i = 0; i < val_.x.size(); ++i) {
    auto out = forward(model_, val_.x[i]);
    rep.loss += ce_loss(out, val_.y[i]);
    int pred = out[1] > out[0] ? 1 : 0;
    rep.accuracy += (pred == val_.y[i]) ? 1.0 : 0.0;
  }
  size_t n = std::max<size_t>(1, val_.x.size());
  rep.loss /= static_cast<double>(n);
  rep.accuracy /= static_cast<double>(n);
  return rep;
}

std::vector<NetFamily> SupervisedLearner::families() {
  return {{&model_, nullptr, &optim_}};
}

// ---- evaluation ----

double evaluate_cartpole(const Mlp& qnet, int episodes, uint64_t seed) {
  Rng rng(seed);
  double total = 0;
  for (int e = 0; e < episodes; ++e) {
    CartPole env;
    auto state = env.reset(rng);
    double ret = 0;
    for (;;) {
      auto q = forward(qnet, state);
      int a = static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
      auto res = env.step(a);
      ret += res.reward;
      if (res.done) break;
      state = res.state;
    }
    total += ret;
  }
  return total / episodes;
}

double evaluate_pointmass(const Mlp& actor, int episodes, uint64_t seed) {
  Rng rng(seed);
  double total = 0;
  for (int e = 0; e < episodes; ++e) {
    PointMass env;
    auto state = env.reset(rng);
    double ret = 0;
    for (;;) {
      auto res = env.step(forward(actor, state));
      ret += res.reward;
      if (res.done) break;
      state = res.state;
    }
    total += ret;
  }
  return total / episodes;
}

}  // namespace gst
