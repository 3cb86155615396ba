// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_LAYERS_HPP
#define PLIF_LAYERS_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plif/bptt.hpp"
#include "plif/neuron.hpp"
#include "plif/random.hpp"
#include "plif/tensor.hpp"
#include "plif/tensor_ops.hpp"

namespace plif {

// Activations flowing between layers are time-major, [T, B, features...].
// Before the first neuron layer the leading extent may be 1: a static input
// is identical at every step, so synapses and BN run once and the neuron
// layer holds the result constant over T.

/// Winner selection inside a spike max-pooling window when several inputs
/// fire together.
enum class TiePolicy { kFirst, kRandom };

struct ForwardContext {
  Index steps = 1;
  bool training = false;
  SpikeMode spike_mode = SpikeMode::kHard;
  TiePolicy tie_policy = TiePolicy::kFirst;
  Rng* rng = nullptr;  // required for dropout in training and random ties
};

struct ParamRef {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

/// Non-learned persistent state (batch-norm running statistics).
struct BufferRef {
  std::string name;
  Tensor* value;
};

// ---------------------------------------------------------------------------
// Spike max-pooling

struct MaxPoolCache {
  Shape input_shape;
  std::vector<Index> winners;  // flat input offset per output element
};

struct MaxPoolResult {
  Tensor output;
  MaxPoolCache cache;
};

/// Max over k x k windows of an NCHW map. In hard mode the input must be
/// binary and the output is the window OR; each output records the winner
/// that receives its gradient. An all-zero window designates its first
/// element. `rng` is needed only for TiePolicy::kRandom.
MaxPoolResult spike_maxpool_forward(const Tensor& spikes, Index k, Index stride,
                                    TiePolicy policy = TiePolicy::kFirst,
                                    Rng* rng = nullptr,
                                    bool require_binary = true);

Tensor spike_maxpool_backward(const MaxPoolCache& cache,
                              const Tensor& upstream);

// ---------------------------------------------------------------------------
// Batch normalization. Statistics span every axis except `channel_axis`, so
// time, batch and spatial positions share one mean/variance per channel.

struct BatchNormState {
  Tensor gamma;
  Tensor beta;
  Tensor running_mean;
  Tensor running_var;
  bool has_statistics = false;
  double momentum = 0.1;
  double eps = 1e-5;
};

struct BatchNormCache {
  Tensor x_hat;
  Eigen::ArrayXd inv_std;
  Index channel_axis = 1;
  bool training = false;
};

struct BatchNormResult {
  Tensor output;
  BatchNormCache cache;
  bool used_fallback = false;  // evaluation before any training statistics
};

BatchNormResult batchnorm_forward(const Tensor& x, BatchNormState& state,
                                  bool training, Index channel_axis = 1);

struct BatchNormGrads {
  Tensor grad_x;
  Tensor grad_gamma;
  Tensor grad_beta;
};

BatchNormGrads batchnorm_backward(const BatchNormCache& cache,
                                  const BatchNormState& state,
                                  const Tensor& upstream);

// ---------------------------------------------------------------------------
// Time-invariant dropout

struct DropoutMask {
  Tensor mask;  // 0/1 per sample and feature, shared by every time-step
  double p = 0.0;
};

/// One mask per sample: `shape` is [B, features...].
DropoutMask sample_dropout_mask(const Shape& shape, double p, Rng& rng);

/// Applies the mask to one time-step [B, features...]. Training scales kept
/// entries by 1/(1-p); evaluation is the identity.
Tensor dropout_apply(const Tensor& x_t, const DropoutMask& mask, bool training);

// ---------------------------------------------------------------------------
// Voting: mean over consecutive groups of M features, [..., M*C] -> [..., C].

Tensor vote(const Tensor& spikes, Index m);
Tensor vote_backward(const Tensor& upstream, Index m);

// ---------------------------------------------------------------------------
// Layers

class Layer {
 public:
  virtual ~Layer() = default;

  /// The grammar atom this layer was built from, e.g. "c128k3s1".
  virtual std::string name() const = 0;
  /// Per-sample feature shape produced from `input` (no time/batch axes).
  virtual Shape output_features(const Shape& input) const = 0;

  virtual Tensor forward(const Tensor& x, const ForwardContext& ctx) = 0;
  /// Accumulates parameter gradients and returns dL/d(input).
  virtual Tensor backward(const Tensor& grad) = 0;

  virtual std::vector<ParamRef> parameters() { return {}; }
  virtual std::vector<BufferRef> buffers() { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;
};

class Conv2dLayer final : public Layer {
 public:
  Conv2dLayer(Index in_channels, Index out_channels, Index kernel,
              Index stride, Index padding);
  void init(Rng& rng);

  std::string name() const override;
  Shape output_features(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<ParamRef> parameters() override;
  std::unique_ptr<Layer> clone() const override;

  Tensor& weight() { return weight_; }

 private:
  Index stride_, padding_;
  Tensor weight_, grad_weight_;
  Conv2dCache cache_;
  Shape lead_;
};

class BatchNormLayer final : public Layer {
 public:
  explicit BatchNormLayer(Index channels);

  std::string name() const override { return "BN"; }
  Shape output_features(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<ParamRef> parameters() override;
  std::vector<BufferRef> buffers() override;
  std::unique_ptr<Layer> clone() const override;

  const BatchNormState& state() const { return state_; }

 private:
  BatchNormState state_;
  Tensor grad_gamma_, grad_beta_, has_stats_;
  BatchNormCache cache_;
  bool warned_ = false;
};

/// Fully connected synapse X = I W^T; inputs are flattened per sample.
class LinearLayer final : public Layer {
 public:
  LinearLayer(Index in_features, Index out_features);
  void init(Rng& rng);

  std::string name() const override;
  Shape output_features(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<ParamRef> parameters() override;
  std::unique_ptr<Layer> clone() const override;

  Tensor& weight() { return weight_; }

 private:
  Tensor weight_, grad_weight_;
  Tensor input_;  // [T', B, in]
  Shape input_shape_;
};

/// A layer of LIF or PLIF neurons. The PLIF parameter a is one scalar.
class SpikingLayer final : public Layer {
 public:
  SpikingLayer(NeuronParams params, std::string label);

  std::string name() const override { return label_; }
  Shape output_features(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<ParamRef> parameters() override;
  std::unique_ptr<Layer> clone() const override;

  /// Parameters in effect, with the current value of a.
  NeuronParams params() const;
  double tau() const { return params().tau(); }
  Tensor& a() { return a_; }
  const TimeCache& cache() const { return cache_; }

 private:
  NeuronParams params_;
  std::string label_;
  Tensor a_, grad_a_;
  TimeCache cache_;
  bool held_input_ = false;
};

class SpikeMaxPoolLayer final : public Layer {
 public:
  SpikeMaxPoolLayer(Index kernel, Index stride);

  std::string name() const override;
  Shape output_features(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad) override;
  std::unique_ptr<Layer> clone() const override;

 private:
  Index kernel_, stride_;
  MaxPoolCache cache_;
  Shape lead_;
};

class AvgPoolLayer final : public Layer {
 public:
  AvgPoolLayer(Index kernel, Index stride);

  std::string name() const override;
  Shape output_features(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad) override;
  std::unique_ptr<Layer> clone() const override;

 private:
  Index kernel_, stride_;
  Shape input_shape_;
};

class DropoutLayer final : public Layer {
 public:
  explicit DropoutLayer(double p);

  std::string name() const override { return "DP"; }
  Shape output_features(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad) override;
  std::unique_ptr<Layer> clone() const override;

  double p() const { return p_; }
  const std::optional<DropoutMask>& mask() const { return mask_; }

 private:
  double p_;
  std::optional<DropoutMask> mask_;  // set by the last training forward
};

class VoteLayer final : public Layer {
 public:
  explicit VoteLayer(Index m);

  std::string name() const override;
  Shape output_features(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad) override;
  std::unique_ptr<Layer> clone() const override;

  Index m() const { return m_; }

 private:
  Index m_;
};

}  // namespace plif

#endif  // PLIF_LAYERS_HPP
