// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include "plif/layers.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <string>

namespace plif {

namespace {

Shape tail(const Shape& s, std::size_t from) {
  return Shape(s.begin() + static_cast<std::ptrdiff_t>(from), s.end());
}

Shape concat(const Shape& a, const Shape& b) {
  Shape out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void require_time_major(const Tensor& x, Index min_rank, const std::string& who) {
  if (x.rank() < min_rank)
    throw ShapeError(who + ": expected [T, B, ...] input, got " +
                     shape_string(x.shape()));
}

void uniform_fill(Tensor& t, double bound, Rng& rng) {
  for (Index i = 0; i < t.size(); ++i) t[i] = uniform(rng, -bound, bound);
}

}  // namespace

// ---------------------------------------------------------------------------
// Spike max-pooling

namespace {

// Window maximum over `planes` contiguous h x w maps. Writes the output
// values and the flat input offset of each window's winner.
void maxpool_planes(const double* in, Index planes, Index h, Index w, Index k,
                    Index stride, TiePolicy policy, Rng* rng, double* out,
                    Index* winners) {
  const Index ho = conv_out_extent(h, k, stride, 0);
  const Index wo = conv_out_extent(w, k, stride, 0);
  std::vector<Index> ties;
  ties.reserve(static_cast<std::size_t>(k * k));
  Index o = 0;
  for (Index p = 0; p < planes; ++p) {
    const Index base = p * h * w;
    for (Index oy = 0; oy < ho; ++oy)
      for (Index ox = 0; ox < wo; ++ox, ++o) {
        const Index corner = base + oy * stride * w + ox * stride;
        Index winner = corner;
        double best = in[corner];
        for (Index dy = 0; dy < k; ++dy)
          for (Index dx = 0; dx < k; ++dx) {
            const Index idx = corner + dy * w + dx;
            if (in[idx] > best) {
              best = in[idx];
              winner = idx;
            }
          }
        if (policy == TiePolicy::kRandom && best > 0.0) {
          ties.clear();
          for (Index dy = 0; dy < k; ++dy)
            for (Index dx = 0; dx < k; ++dx) {
              const Index idx = corner + dy * w + dx;
              if (in[idx] == best) ties.push_back(idx);
            }
          if (ties.size() > 1) winner = ties[uniform_index(*rng, ties.size())];
        }
        out[o] = best;
        winners[o] = winner;
      }
  }
}

void check_maxpool_input(const double* in, Index n, bool require_binary,
                         TiePolicy policy, const Rng* rng) {
  if (require_binary)
    for (Index i = 0; i < n; ++i)
      if (in[i] != 0.0 && in[i] != 1.0)
        throw ContractViolation(
            "spike_maxpool: input is not binary (use average pooling on "
            "analog maps)");
  if (policy == TiePolicy::kRandom && rng == nullptr)
    throw ContractViolation("spike_maxpool: random tie policy needs an rng");
}

}  // namespace

MaxPoolResult spike_maxpool_forward(const Tensor& spikes, Index k, Index stride,
                                    TiePolicy policy, Rng* rng,
                                    bool require_binary) {
  if (spikes.rank() != 4)
    throw ShapeError("spike_maxpool expects NCHW input, got " +
                     shape_string(spikes.shape()));
  const Index h = spikes.dim(2), w = spikes.dim(3);
  if (k < 1 || stride < 1 || k > h || k > w)
    throw ShapeError("spike_maxpool window does not fit " +
                     shape_string(spikes.shape()));
  check_maxpool_input(spikes.data(), spikes.size(), require_binary, policy, rng);
  const Index ho = conv_out_extent(h, k, stride, 0);
  const Index wo = conv_out_extent(w, k, stride, 0);
  MaxPoolResult r{Tensor({spikes.dim(0), spikes.dim(1), ho, wo}),
                  MaxPoolCache{spikes.shape(), {}}};
  r.cache.winners.resize(static_cast<std::size_t>(r.output.size()));
  maxpool_planes(spikes.data(), spikes.dim(0) * spikes.dim(1), h, w, k, stride,
                 policy, rng, r.output.data(), r.cache.winners.data());
  return r;
}

Tensor spike_maxpool_backward(const MaxPoolCache& cache,
                              const Tensor& upstream) {
  if (static_cast<std::size_t>(upstream.size()) != cache.winners.size())
    throw ShapeError("spike_maxpool_backward: upstream " +
                     shape_string(upstream.shape()));
  Tensor grad(cache.input_shape);
  for (std::size_t i = 0; i < cache.winners.size(); ++i)
    grad[cache.winners[i]] += upstream[static_cast<Index>(i)];
  return grad;
}

// ---------------------------------------------------------------------------
// Batch normalization

namespace {

struct ChannelLayout {
  Index outer, channels, inner;
};

ChannelLayout channel_layout(const Shape& shape, Index axis) {
  if (axis < 0 || axis >= static_cast<Index>(shape.size()))
    throw ShapeError("batchnorm channel axis out of range for " +
                     shape_string(shape));
  ChannelLayout l{1, shape[static_cast<std::size_t>(axis)], 1};
  for (Index i = 0; i < axis; ++i) l.outer *= shape[static_cast<std::size_t>(i)];
  for (Index i = axis + 1; i < static_cast<Index>(shape.size()); ++i)
    l.inner *= shape[static_cast<std::size_t>(i)];
  return l;
}

template <typename Fn>
void for_channel(const ChannelLayout& l, Index c, Fn&& fn) {
  for (Index o = 0; o < l.outer; ++o) {
    const Index base = (o * l.channels + c) * l.inner;
    for (Index i = 0; i < l.inner; ++i) fn(base + i);
  }
}

}  // namespace

BatchNormResult batchnorm_forward(const Tensor& x, BatchNormState& state,
                                  bool training, Index channel_axis) {
  const ChannelLayout l = channel_layout(x.shape(), channel_axis);
  if (state.gamma.size() != l.channels)
    throw ShapeError("batchnorm: " + std::to_string(state.gamma.size()) +
                     " channels configured, input " + shape_string(x.shape()));
  BatchNormResult r;
  r.output = Tensor(x.shape());
  r.cache.x_hat = Tensor(x.shape());
  r.cache.inv_std = Eigen::ArrayXd::Ones(l.channels);
  r.cache.channel_axis = channel_axis;
  r.cache.training = training;
  const double count = static_cast<double>(l.outer * l.inner);

  for (Index c = 0; c < l.channels; ++c) {
    double mean = 0.0, var = 0.0;
    if (training) {
      for_channel(l, c, [&](Index i) { mean += x[i]; });
      mean /= count;
      for_channel(l, c, [&](Index i) { var += (x[i] - mean) * (x[i] - mean); });
      var /= count;
      const double unbiased = count > 1 ? var * count / (count - 1) : var;
      state.running_mean[c] =
          (1 - state.momentum) * state.running_mean[c] + state.momentum * mean;
      state.running_var[c] =
          (1 - state.momentum) * state.running_var[c] + state.momentum * unbiased;
    } else if (state.has_statistics) {
      mean = state.running_mean[c];
      var = state.running_var[c];
    } else {
      r.used_fallback = true;
      var = 1.0 - state.eps;  // identity normalization
    }
    const double inv_std = 1.0 / std::sqrt(var + state.eps);
    r.cache.inv_std[c] = inv_std;
    const double g = state.gamma[c], b = state.beta[c];
    for_channel(l, c, [&](Index i) {
      const double xh = (x[i] - mean) * inv_std;
      r.cache.x_hat[i] = xh;
      r.output[i] = g * xh + b;
    });
  }
  if (training) state.has_statistics = true;
  return r;
}

BatchNormGrads batchnorm_backward(const BatchNormCache& cache,
                                  const BatchNormState& state,
                                  const Tensor& upstream) {
  require_same_shape(cache.x_hat, upstream, "batchnorm_backward");
  const ChannelLayout l = channel_layout(upstream.shape(), cache.channel_axis);
  BatchNormGrads g{Tensor(upstream.shape()), Tensor({l.channels}),
                   Tensor({l.channels})};
  const double count = static_cast<double>(l.outer * l.inner);
  for (Index c = 0; c < l.channels; ++c) {
    double sum_g = 0.0, sum_gx = 0.0;
    for_channel(l, c, [&](Index i) {
      sum_g += upstream[i];
      sum_gx += upstream[i] * cache.x_hat[i];
    });
    g.grad_beta[c] = sum_g;
    g.grad_gamma[c] = sum_gx;
    const double gamma = state.gamma[c];
    const double inv_std = cache.inv_std[c];
    if (cache.training) {
      // dx = gamma inv_std / n (n dy - sum dy - x_hat sum(dy x_hat))
      for_channel(l, c, [&](Index i) {
        g.grad_x[i] = gamma * inv_std / count *
                      (count * upstream[i] - sum_g - cache.x_hat[i] * sum_gx);
      });
    } else {
      for_channel(l, c, [&](Index i) { g.grad_x[i] = gamma * inv_std * upstream[i]; });
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Dropout

DropoutMask sample_dropout_mask(const Shape& shape, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0))
    throw DomainError("dropout probability must be in [0, 1), got " +
                      std::to_string(p));
  DropoutMask m{Tensor(shape, 1.0), p};
  if (p > 0.0)
    for (Index i = 0; i < m.mask.size(); ++i)
      m.mask[i] = uniform01(rng) < p ? 0.0 : 1.0;
  return m;
}

Tensor dropout_apply(const Tensor& x_t, const DropoutMask& mask, bool training) {
  if (!(mask.p >= 0.0 && mask.p < 1.0))
    throw DomainError("dropout probability must be in [0, 1)");
  if (!training) return x_t;
  require_same_shape(x_t, mask.mask, "dropout_apply");
  return Tensor(x_t.shape(), x_t.values() * mask.mask.values() / (1.0 - mask.p));
}

// ---------------------------------------------------------------------------
// Voting

Tensor vote(const Tensor& spikes, Index m) {
  if (m < 1 || spikes.rank() < 1 || spikes.dim(spikes.rank() - 1) % m != 0)
    throw ShapeError("vote: feature count of " + shape_string(spikes.shape()) +
                     " is not divisible by M=" + std::to_string(m));
  Shape out_shape = spikes.shape();
  out_shape.back() /= m;
  const Index groups = spikes.size() / m;
  Tensor out(out_shape);
  out.values() = spikes.matrix(groups, m).rowwise().mean().array();
  return out;
}

Tensor vote_backward(const Tensor& upstream, Index m) {
  Shape in_shape = upstream.shape();
  in_shape.back() *= m;
  Tensor grad(in_shape);
  grad.matrix(upstream.size(), m) =
      (upstream.values() / static_cast<double>(m)).matrix().replicate(1, m);
  return grad;
}

// ---------------------------------------------------------------------------
// Conv2dLayer

Conv2dLayer::Conv2dLayer(Index in_channels, Index out_channels, Index kernel,
                         Index stride, Index padding)
    : stride_(stride),
      padding_(padding),
      weight_({out_channels, in_channels, kernel, kernel}),
      grad_weight_({out_channels, in_channels, kernel, kernel}) {}

void Conv2dLayer::init(Rng& rng) {
  const double fan_in =
      static_cast<double>(weight_.dim(1) * weight_.dim(2) * weight_.dim(3));
  uniform_fill(weight_, 1.0 / std::sqrt(fan_in), rng);
}

std::string Conv2dLayer::name() const {
  return "c" + std::to_string(weight_.dim(0)) + "k" +
         std::to_string(weight_.dim(2)) + "s" + std::to_string(stride_);
}

Shape Conv2dLayer::output_features(const Shape& input) const {
  if (input.size() != 3 || input[0] != weight_.dim(1))
    throw ShapeError(name() + " expects [" + std::to_string(weight_.dim(1)) +
                     ", H, W] input, got " + shape_string(input));
  const Index k = weight_.dim(2);
  if (k > input[1] + 2 * padding_ || k > input[2] + 2 * padding_)
    throw ShapeError(name() + ": kernel larger than input " + shape_string(input));
  return {weight_.dim(0), conv_out_extent(input[1], k, stride_, padding_),
          conv_out_extent(input[2], k, stride_, padding_)};
}

Tensor Conv2dLayer::forward(const Tensor& x, const ForwardContext&) {
  require_time_major(x, 5, name());
  lead_ = {x.dim(0), x.dim(1)};
  cache_.input = x.reshaped(concat({x.dim(0) * x.dim(1)}, tail(x.shape(), 2)));
  cache_.kernel = weight_;
  cache_.stride = stride_;
  cache_.padding = padding_;
  Tensor y = conv2d(cache_.input, weight_, stride_, padding_);
  return std::move(y).reshaped(concat(lead_, tail(y.shape(), 1)));
}

Tensor Conv2dLayer::backward(const Tensor& grad) {
  const Tensor flat =
      grad.reshaped(concat({lead_[0] * lead_[1]}, tail(grad.shape(), 2)));
  Conv2dGrads g = conv2d_grads(cache_, flat);
  grad_weight_.values() += g.grad_kernel.values();
  return std::move(g.grad_input)
      .reshaped(concat(lead_, tail(cache_.input.shape(), 1)));
}

std::vector<ParamRef> Conv2dLayer::parameters() {
  return {{"weight", &weight_, &grad_weight_}};
}

std::unique_ptr<Layer> Conv2dLayer::clone() const {
  return std::make_unique<Conv2dLayer>(*this);
}

// ---------------------------------------------------------------------------
// BatchNormLayer

BatchNormLayer::BatchNormLayer(Index channels)
    : grad_gamma_({channels}), grad_beta_({channels}), has_stats_({1}) {
  state_.gamma = Tensor({channels}, 1.0);
  state_.beta = Tensor({channels});
  state_.running_mean = Tensor({channels});
  state_.running_var = Tensor({channels}, 1.0);
}

Tensor BatchNormLayer::forward(const Tensor& x, const ForwardContext& ctx) {
  require_time_major(x, 3, "BN");
  state_.has_statistics = has_stats_[0] != 0.0;
  BatchNormResult r = batchnorm_forward(x, state_, ctx.training, 2);
  has_stats_[0] = state_.has_statistics ? 1.0 : 0.0;
  if (r.used_fallback && !warned_) {
    std::cerr << "warning: batch norm evaluated before any training "
                 "statistics; using identity normalization with affine\n";
    warned_ = true;
  }
  cache_ = std::move(r.cache);
  return std::move(r.output);
}

Tensor BatchNormLayer::backward(const Tensor& grad) {
  BatchNormGrads g = batchnorm_backward(cache_, state_, grad);
  grad_gamma_.values() += g.grad_gamma.values();
  grad_beta_.values() += g.grad_beta.values();
  return std::move(g.grad_x);
}

std::vector<ParamRef> BatchNormLayer::parameters() {
  return {{"gamma", &state_.gamma, &grad_gamma_},
          {"beta", &state_.beta, &grad_beta_}};
}

std::vector<BufferRef> BatchNormLayer::buffers() {
  return {{"running_mean", &state_.running_mean},
          {"running_var", &state_.running_var},
          {"has_statistics", &has_stats_}};
}

std::unique_ptr<Layer> BatchNormLayer::clone() const {
  return std::make_unique<BatchNormLayer>(*this);
}

// ---------------------------------------------------------------------------
// LinearLayer

LinearLayer::LinearLayer(Index in_features, Index out_features)
    : weight_({out_features, in_features}),
      grad_weight_({out_features, in_features}) {}

void LinearLayer::init(Rng& rng) {
  uniform_fill(weight_, 1.0 / std::sqrt(static_cast<double>(weight_.dim(1))),
               rng);
}

std::string LinearLayer::name() const {
  return "FC" + std::to_string(weight_.dim(0));
}

Shape LinearLayer::output_features(const Shape& input) const {
  if (shape_size(input) != weight_.dim(1))
    throw ShapeError(name() + " expects " + std::to_string(weight_.dim(1)) +
                     " input features, got " + shape_string(input));
  return {weight_.dim(0)};
}

Tensor LinearLayer::forward(const Tensor& x, const ForwardContext&) {
  require_time_major(x, 3, name());
  const Index in = weight_.dim(1), out = weight_.dim(0);
  const Index rows = x.dim(0) * x.dim(1);
  if (x.size() != rows * in)
    throw ShapeError(name() + ": input " + shape_string(x.shape()));
  input_shape_ = x.shape();
  input_ = x.reshaped({x.dim(0), x.dim(1), in});
  Tensor y({x.dim(0), x.dim(1), out});
  y.matrix(rows, out).noalias() =
      input_.matrix(rows, in) * weight_.matrix(out, in).transpose();
  return y;
}

Tensor LinearLayer::backward(const Tensor& grad) {
  const Index in = weight_.dim(1), out = weight_.dim(0);
  const Index rows = input_.dim(0) * input_.dim(1);
  grad_weight_.values() += backward_synapse(input_, grad).values();
  Tensor gx(input_shape_);
  gx.matrix(rows, in).noalias() =
      grad.matrix(rows, out) * weight_.matrix(out, in);
  return gx;
}

std::vector<ParamRef> LinearLayer::parameters() {
  return {{"weight", &weight_, &grad_weight_}};
}

std::unique_ptr<Layer> LinearLayer::clone() const {
  return std::make_unique<LinearLayer>(*this);
}

// ---------------------------------------------------------------------------
// SpikingLayer

SpikingLayer::SpikingLayer(NeuronParams params, std::string label)
    : params_(params), label_(std::move(label)) {
  params_.validate();
  if (const auto* plif = std::get_if<Plif>(&params_.mode)) {
    a_ = Tensor({1}, plif->a);
    grad_a_ = Tensor({1});
  }
}

NeuronParams SpikingLayer::params() const {
  NeuronParams p = params_;
  if (p.learnable()) p.mode = Plif{a_[0]};
  return p;
}

Tensor SpikingLayer::forward(const Tensor& x, const ForwardContext& ctx) {
  require_time_major(x, 3, label_);
  held_input_ = x.dim(0) != ctx.steps;
  cache_ = forward_neuron_layer(params(), ctx.spike_mode, x, ctx.steps);
  return cache_.s;
}

Tensor SpikingLayer::backward(const Tensor& grad) {
  NeuronBackward r = backward_neuron_layer(cache_, params(), grad);
  if (r.grad_a) grad_a_[0] += *r.grad_a;
  if (!held_input_) return std::move(r.grad_x);
  Shape held = r.grad_x.shape();
  held[0] = 1;
  const Index steps = r.grad_x.dim(0);
  const Index n = r.grad_x.size() / steps;
  Tensor summed(held);
  summed.values() = r.grad_x.matrix(steps, n).colwise().sum().transpose().array();
  return summed;
}

std::vector<ParamRef> SpikingLayer::parameters() {
  if (!params_.learnable()) return {};
  return {{"a", &a_, &grad_a_}};
}

std::unique_ptr<Layer> SpikingLayer::clone() const {
  return std::make_unique<SpikingLayer>(*this);
}

// ---------------------------------------------------------------------------
// SpikeMaxPoolLayer

SpikeMaxPoolLayer::SpikeMaxPoolLayer(Index kernel, Index stride)
    : kernel_(kernel), stride_(stride) {}

std::string SpikeMaxPoolLayer::name() const {
  return "MPk" + std::to_string(kernel_) + "s" + std::to_string(stride_);
}

Shape SpikeMaxPoolLayer::output_features(const Shape& input) const {
  if (input.size() != 3 || kernel_ > input[1] || kernel_ > input[2])
    throw ShapeError(name() + " needs a [C, H, W] map of at least the window, "
                     "got " + shape_string(input));
  return {input[0], conv_out_extent(input[1], kernel_, stride_, 0),
          conv_out_extent(input[2], kernel_, stride_, 0)};
}

Tensor SpikeMaxPoolLayer::forward(const Tensor& x, const ForwardContext& ctx) {
  require_time_major(x, 5, name());
  lead_ = {x.dim(0), x.dim(1)};
  const Index c = x.dim(2), h = x.dim(3), w = x.dim(4);
  if (kernel_ > h || kernel_ > w)
    throw ShapeError(name() + ": window does not fit " + shape_string(x.shape()));
  // Random winners only matter for gradient routing.
  const TiePolicy policy = ctx.training ? ctx.tie_policy : TiePolicy::kFirst;
  check_maxpool_input(x.data(), x.size(), ctx.spike_mode == SpikeMode::kHard,
                      policy, ctx.rng);
  const Index ho = conv_out_extent(h, kernel_, stride_, 0);
  const Index wo = conv_out_extent(w, kernel_, stride_, 0);
  Tensor out({x.dim(0), x.dim(1), c, ho, wo});
  cache_.input_shape = {x.dim(0) * x.dim(1), c, h, w};
  cache_.winners.resize(static_cast<std::size_t>(out.size()));
  maxpool_planes(x.data(), x.dim(0) * x.dim(1) * c, h, w, kernel_, stride_,
                 policy, ctx.rng, out.data(), cache_.winners.data());
  return out;
}

Tensor SpikeMaxPoolLayer::backward(const Tensor& grad) {
  Tensor g = spike_maxpool_backward(cache_, grad);
  return std::move(g).reshaped(concat(lead_, tail(cache_.input_shape, 1)));
}

std::unique_ptr<Layer> SpikeMaxPoolLayer::clone() const {
  return std::make_unique<SpikeMaxPoolLayer>(*this);
}

// ---------------------------------------------------------------------------
// AvgPoolLayer

AvgPoolLayer::AvgPoolLayer(Index kernel, Index stride)
    : kernel_(kernel), stride_(stride) {}

std::string AvgPoolLayer::name() const {
  return "APk" + std::to_string(kernel_) + "s" + std::to_string(stride_);
}

Shape AvgPoolLayer::output_features(const Shape& input) const {
  if (input.size() != 3 || kernel_ > input[1] || kernel_ > input[2])
    throw ShapeError(name() + " needs a [C, H, W] map of at least the window, "
                     "got " + shape_string(input));
  return {input[0], conv_out_extent(input[1], kernel_, stride_, 0),
          conv_out_extent(input[2], kernel_, stride_, 0)};
}

Tensor AvgPoolLayer::forward(const Tensor& x, const ForwardContext&) {
  require_time_major(x, 5, name());
  input_shape_ = x.shape();
  const Tensor flat = x.reshaped(concat({x.dim(0) * x.dim(1)}, tail(x.shape(), 2)));
  Tensor y = avg_pool2d(flat, kernel_, stride_);
  return std::move(y).reshaped(concat({x.dim(0), x.dim(1)}, tail(y.shape(), 1)));
}

Tensor AvgPoolLayer::backward(const Tensor& grad) {
  const Shape flat_in = concat({input_shape_[0] * input_shape_[1]},
                               tail(input_shape_, 2));
  const Tensor flat_g =
      grad.reshaped(concat({input_shape_[0] * input_shape_[1]}, tail(grad.shape(), 2)));
  return avg_pool2d_backward(flat_in, kernel_, stride_, flat_g)
      .reshaped(input_shape_);
}

std::unique_ptr<Layer> AvgPoolLayer::clone() const {
  return std::make_unique<AvgPoolLayer>(*this);
}

// ---------------------------------------------------------------------------
// DropoutLayer

DropoutLayer::DropoutLayer(double p) : p_(p) {
  if (!(p >= 0.0 && p < 1.0))
    throw DomainError("dropout probability must be in [0, 1), got " +
                      std::to_string(p));
}

Tensor DropoutLayer::forward(const Tensor& x, const ForwardContext& ctx) {
  require_time_major(x, 3, "DP");
  if (!ctx.training || p_ == 0.0) {
    mask_.reset();
    return x;
  }
  if (ctx.rng == nullptr)
    throw ContractViolation("dropout in training mode needs an rng");
  mask_ = sample_dropout_mask(tail(x.shape(), 1), p_, *ctx.rng);
  Tensor y(x.shape());
  for (Index t = 0; t < x.dim(0); ++t)
    y.slab_values(t) = dropout_apply(x.slab(t), *mask_, true).values();
  return y;
}

Tensor DropoutLayer::backward(const Tensor& grad) {
  if (!mask_) return grad;
  Tensor g(grad.shape());
  for (Index t = 0; t < grad.dim(0); ++t)
    g.slab_values(t) = grad.slab_values(t) * mask_->mask.values() / (1.0 - p_);
  return g;
}

std::unique_ptr<Layer> DropoutLayer::clone() const {
  return std::make_unique<DropoutLayer>(*this);
}

// ---------------------------------------------------------------------------
// VoteLayer

VoteLayer::VoteLayer(Index m) : m_(m) {
  if (m < 1) throw ShapeError("vote: M must be positive");
}

std::string VoteLayer::name() const {
  return "APk" + std::to_string(m_) + "s" + std::to_string(m_);
}

Shape VoteLayer::output_features(const Shape& input) const {
  if (input.size() != 1 || input[0] % m_ != 0)
    throw ShapeError("vote with M=" + std::to_string(m_) +
                     " needs a flat feature count divisible by M, got " +
                     shape_string(input));
  return {input[0] / m_};
}

Tensor VoteLayer::forward(const Tensor& x, const ForwardContext&) {
  require_time_major(x, 3, name());
  return vote(x, m_);
}

Tensor VoteLayer::backward(const Tensor& grad) { return vote_backward(grad, m_); }

std::unique_ptr<Layer> VoteLayer::clone() const {
  return std::make_unique<VoteLayer>(*this);
}

}  // namespace plif
