// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include "plif/network.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <string>

namespace plif {

SpecParseError::SpecParseError(const std::string& what, std::size_t position)
    : ConfigError("network spec, position " + std::to_string(position) + ": " +
                  what),
      position_(position) {}

namespace {

class SpecParser {
 public:
  explicit SpecParser(const std::string& s) : s_(s) {}

  std::vector<LayerSpec> parse() {
    if (s_.empty()) throw SpecParseError("empty network spec", 0);
    std::vector<LayerSpec> out = sequence();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return out;
  }

 private:
  std::vector<LayerSpec> sequence() {
    std::vector<LayerSpec> out = item();
    while (pos_ < s_.size() && s_[pos_] == '-') {
      ++pos_;
      std::vector<LayerSpec> next = item();
      out.insert(out.end(), next.begin(), next.end());
    }
    return out;
  }

  std::vector<LayerSpec> item() {
    if (pos_ < s_.size() && s_[pos_] == '{') {
      ++pos_;
      std::vector<LayerSpec> body = sequence();
      expect('}');
      expect('*');
      const std::size_t at = pos_;
      const Index n = integer();
      if (n < 1) throw SpecParseError("repetition count must be >= 1", at);
      std::vector<LayerSpec> out;
      for (Index i = 0; i < n; ++i) out.insert(out.end(), body.begin(), body.end());
      return out;
    }
    return {atom()};
  }

  LayerSpec atom() {
    const std::size_t start = pos_;
    LayerSpec spec{};
    spec.position = start;
    if (consume("BN")) {
      spec.kind = LayerSpec::Kind::kBatchNorm;
    } else if (consume("PLIF")) {
      spec.kind = LayerSpec::Kind::kPlif;
    } else if (consume("LIF")) {
      spec.kind = LayerSpec::Kind::kLif;
      spec.tau = number();
    } else if (consume("MPk") || consume("APk")) {
      spec.kind = s_[start] == 'M' ? LayerSpec::Kind::kMaxPool
                                   : LayerSpec::Kind::kAvgPool;
      spec.kernel = positive();
      expect('s');
      spec.stride = positive();
    } else if (consume("DP")) {
      spec.kind = LayerSpec::Kind::kDropout;
    } else if (consume("FC")) {
      spec.kind = LayerSpec::Kind::kLinear;
      spec.out = positive();
    } else if (consume("c")) {
      spec.kind = LayerSpec::Kind::kConv;
      spec.out = positive();
      expect('k');
      spec.kernel = positive();
      expect('s');
      spec.stride = positive();
    } else {
      fail("expected a layer atom");
    }
    spec.text = s_.substr(start, pos_ - start);
    return spec;
  }

  bool consume(const char* word) {
    const std::string w(word);
    if (s_.compare(pos_, w.size(), w) != 0) return false;
    pos_ += w.size();
    return true;
  }

  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  Index integer() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) throw SpecParseError("expected an integer", start);
    Index v = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (ec != std::errc()) throw SpecParseError("integer out of range", start);
    return v;
  }

  Index positive() {
    const std::size_t at = pos_;
    const Index v = integer();
    if (v < 1) throw SpecParseError("expected a positive integer", at);
    return v;
  }

  double number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
      ++pos_;
    double v = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (start == pos_ || ec != std::errc() || ptr != s_.data() + pos_)
      throw SpecParseError("expected a number", start);
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw SpecParseError(what, pos_);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<LayerSpec> parse_network_spec(const std::string& spec) {
  return SpecParser(spec).parse();
}

Network::Network(const Network& other)
    : spec_(other.spec_),
      input_features_(other.input_features_),
      output_features_(other.output_features_),
      layer_shapes_(other.layer_shapes_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Network Network::build(const std::string& spec, const Shape& input_features,
                       const NetworkDefaults& defaults, Rng& rng) {
  Network net;
  net.spec_ = spec;
  net.input_features_ = input_features;
  Shape shape = input_features;
  const std::vector<LayerSpec> atoms = parse_network_spec(spec);

  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const LayerSpec& a = atoms[i];
    const std::string where = "layer " + std::to_string(i) + " '" + a.text + "'";
    std::unique_ptr<Layer> layer;
    try {
      switch (a.kind) {
        case LayerSpec::Kind::kConv: {
          if (shape.size() != 3)
            throw ShapeError("convolution needs a [C, H, W] input, got " +
                             shape_string(shape));
          auto conv = std::make_unique<Conv2dLayer>(shape[0], a.out, a.kernel,
                                                    a.stride, a.kernel / 2);
          conv->init(rng);
          layer = std::move(conv);
          break;
        }
        case LayerSpec::Kind::kBatchNorm:
          layer = std::make_unique<BatchNormLayer>(shape.at(0));
          break;
        case LayerSpec::Kind::kPlif:
        case LayerSpec::Kind::kLif: {
          NeuronParams p;
          p.v_th = defaults.v_th;
          p.v_reset = defaults.v_reset;
          p.detach_reset = defaults.detach_reset;
          if (a.kind == LayerSpec::Kind::kPlif)
            p.mode = Plif{a_from_tau(defaults.tau0)};
          else
            p.mode = Lif{a.tau};
          layer = std::make_unique<SpikingLayer>(p, a.text);
          break;
        }
        case LayerSpec::Kind::kMaxPool:
          layer = std::make_unique<SpikeMaxPoolLayer>(a.kernel, a.stride);
          break;
        case LayerSpec::Kind::kAvgPool:
          if (shape.size() == 1) {
            if (a.kernel != a.stride)
              throw ShapeError("voting needs kernel == stride");
            layer = std::make_unique<VoteLayer>(a.kernel);
          } else {
            layer = std::make_unique<AvgPoolLayer>(a.kernel, a.stride);
          }
          break;
        case LayerSpec::Kind::kDropout:
          layer = std::make_unique<DropoutLayer>(defaults.dropout);
          break;
        case LayerSpec::Kind::kLinear: {
          auto fc = std::make_unique<LinearLayer>(shape_size(shape), a.out);
          fc->init(rng);
          layer = std::move(fc);
          break;
        }
      }
      shape = layer->output_features(shape);
    } catch (const std::exception& e) {
      throw ShapeError(where + ": " + e.what());
    }
    net.layer_shapes_.push_back(shape);
    net.layers_.push_back(std::move(layer));
  }
  net.output_features_ = shape;
  return net;
}

Tensor Network::forward(const Tensor& input, const ForwardContext& ctx) {
  return forward_until(input, ctx, layers_.size());
}

Tensor Network::forward_until(const Tensor& input, const ForwardContext& ctx,
                              std::size_t count) {
  if (count > layers_.size())
    throw ShapeError("network has " + std::to_string(layers_.size()) + " layers, asked for " +
                     std::to_string(count));
  Shape expect = input_features_;
  if (input.rank() != static_cast<Index>(expect.size()) + 2 ||
      !std::equal(expect.begin(), expect.end(), input.shape().begin() + 2) ||
      (input.dim(0) != ctx.steps && input.dim(0) != 1))
    throw ShapeError("network input " + shape_string(input.shape()) +
                     " does not match [T|1, B, " + shape_string(expect) + "]");
  Tensor x = input;
  for (std::size_t i = 0; i < count; ++i) x = layers_[i]->forward(x, ctx);
  if (x.dim(0) != ctx.steps) {
    // No neuron layer widened the time axis; hold the output over T.
    Shape full = x.shape();
    full[0] = ctx.steps;
    Tensor wide(full);
    for (Index t = 0; t < ctx.steps; ++t) wide.slab_values(t) = x.values();
    return wide;
  }
  return x;
}

void Network::backward(const Tensor& grad_output) {
  Tensor g = grad_output;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
}

void Network::zero_grad() {
  for (auto& p : parameters()) p.grad->values().setZero();
}

std::vector<ParamRef> Network::parameters() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    for (ParamRef p : layers_[i]->parameters()) {
      p.name = std::to_string(i) + "." + p.name;
      out.push_back(p);
    }
  return out;
}

std::vector<BufferRef> Network::buffers() {
  std::vector<BufferRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    for (BufferRef b : layers_[i]->buffers()) {
      b.name = std::to_string(i) + "." + b.name;
      out.push_back(b);
    }
  return out;
}

std::vector<std::size_t> Network::neuron_layer_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (dynamic_cast<const SpikingLayer*>(layers_[i].get())) out.push_back(i);
  return out;
}

bool Network::is_plif(std::size_t index) const {
  const auto* s = dynamic_cast<const SpikingLayer*>(layers_.at(index).get());
  return s != nullptr && s->params().learnable();
}

std::vector<double> Network::taus() const {
  std::vector<double> out;
  for (std::size_t i : neuron_layer_indices())
    out.push_back(static_cast<const SpikingLayer&>(*layers_[i]).tau());
  return out;
}

BatchLoss soft_forward(Network& network, const Tensor& input,
                       const std::vector<int>& labels, Index steps,
                       bool training) {
  ForwardContext ctx;
  ctx.steps = steps;
  ctx.training = training;
  ctx.spike_mode = SpikeMode::kSoft;
  return batch_mse(network.forward(input, ctx), labels);
}

}  // namespace plif
