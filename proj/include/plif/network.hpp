// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_NETWORK_HPP
#define PLIF_NETWORK_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "plif/layers.hpp"
#include "plif/loss.hpp"

namespace plif {

// Network structure strings:
//
//   seq  := item ('-' item)*
//   item := atom | '{' seq '}' '*' <n>
//   atom := c<out>k<k>s<s> | BN | PLIF | LIF<tau> | MPk<k>s<s> | APk<k>s<s>
//         | DP | FC<out>
//
// e.g. "{c128k3s1-BN-PLIF-MPk2s2}*2-DP-FC2048-PLIF-DP-FC100-PLIF-APk10s10".
// Convolutions pad by k/2. APk<M>s<M> on a flat feature vector is the voting
// layer; on a [C, H, W] map it is average pooling.

struct LayerSpec {
  enum class Kind { kConv, kBatchNorm, kPlif, kLif, kMaxPool, kAvgPool,
                    kDropout, kLinear };
  Kind kind;
  Index out = 0;
  Index kernel = 0;
  Index stride = 0;
  double tau = 0.0;
  std::string text;       ///< the atom as written
  std::size_t position;   ///< offset of the atom in the spec string
};

class SpecParseError : public ConfigError {
 public:
  SpecParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Expands repetitions; throws SpecParseError with the failing offset.
std::vector<LayerSpec> parse_network_spec(const std::string& spec);

/// Settings not carried by the grammar.
struct NetworkDefaults {
  double tau0 = 2.0;         ///< initial tau of PLIF layers
  double v_th = 1.0;
  double v_reset = 0.0;
  bool detach_reset = true;
  double dropout = 0.5;
};

class Network {
 public:
  Network() = default;
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  /// `input_features` is the per-sample, per-step input shape, e.g. {784}
  /// or {1, 28, 28}. Throws ShapeError naming the first layer whose shape
  /// inference fails.
  static Network build(const std::string& spec, const Shape& input_features,
                       const NetworkDefaults& defaults, Rng& rng);

  /// `input` is [T, B, features...] or [1, B, features...] for static data.
  /// Neuron state starts from V_reset on every call. Returns [T, B, out...].
  Tensor forward(const Tensor& input, const ForwardContext& ctx);
  /// Output of the first `count` layers, [T, B, features...].
  Tensor forward_until(const Tensor& input, const ForwardContext& ctx, std::size_t count);
  /// Accumulates gradients of every parameter from dL/d(output).
  void backward(const Tensor& grad_output);
  void zero_grad();

  /// Parameters named "<layer index>.<name>", in layer order.
  std::vector<ParamRef> parameters();
  std::vector<BufferRef> buffers();

  /// tau of each neuron layer, in order.
  std::vector<double> taus() const;
  /// Layer indices of the neuron layers.
  std::vector<std::size_t> neuron_layer_indices() const;
  /// True when the layer at `index` is a PLIF layer.
  bool is_plif(std::size_t index) const;

  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const std::string& spec() const { return spec_; }
  const Shape& input_features() const { return input_features_; }
  const Shape& output_features() const { return output_features_; }
  /// Inferred per-sample output shape of each layer.
  const std::vector<Shape>& layer_shapes() const { return layer_shapes_; }

 private:
  std::string spec_;
  Shape input_features_;
  Shape output_features_;
  std::vector<Shape> layer_shapes_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Batch MSE loss of a forward pass in which every neuron fires the smooth
/// surrogate sigma(H - V_th) instead of the step, and resets with that
/// smooth spike. With detach_reset off, Network::backward computes the exact
/// gradient of this loss, which makes it a finite-difference target.
/// The layer caches stay in place for a following backward. `training`
/// selects batch statistics in BN; dropout is not supported here.
BatchLoss soft_forward(Network& network, const Tensor& input,
                       const std::vector<int>& labels, Index steps,
                       bool training = false);

}  // namespace plif

#endif  // PLIF_NETWORK_HPP
