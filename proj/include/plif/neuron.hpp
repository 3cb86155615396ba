// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_NEURON_HPP
#define PLIF_NEURON_HPP

#include <cmath>
#include <numbers>
#include <variant>

#include "plif/tensor.hpp"

namespace plif {

// Discrete spiking neuron: charge, fire, hard reset.
//
//   H_t = V_{t-1} + k (-(V_{t-1} - V_reset) + X_t)
//   S_t = Theta(H_t - V_th)
//   V_t = H_t (1 - S_t) + V_reset S_t
//
// LIF uses k = 1/tau with tau fixed. PLIF uses k = sigmoid(a) with a learned
// scalar shared by the whole layer, so tau = 1/k stays in (1, inf).

/// Sigmoid clamp k(a) = 1 / (1 + exp(-a)).
double clamp_k(double a);

/// dk/da = k(a) (1 - k(a)).
double clamp_k_derivative(double a);

/// Inverse of clamp_k at 1/tau0. Throws DomainError for tau0 <= 1.
double a_from_tau(double tau0);

enum class SurrogateKind { kArctan };

/// sigma(x) = atan(alpha x) / pi + 1/2, sigma'(x) = (alpha/pi) / (1 + (alpha x)^2).
/// alpha = pi gives sigma'(0) = 1. Larger alpha sharpens sigma towards Theta.
struct SurrogateSpec {
  SurrogateKind kind = SurrogateKind::kArctan;
  double alpha = std::numbers::pi;

  double value(double x) const {
    return std::atan(alpha * x) / std::numbers::pi + 0.5;
  }
  double derivative(double x) const {
    const double ax = alpha * x;
    return (alpha / std::numbers::pi) / (1.0 + ax * ax);
  }
};

Tensor charge(const Tensor& v_prev, const Tensor& x, double k, double v_reset);

/// Heaviside with Theta(0) = 1.
Tensor fire(const Tensor& h, double v_th);

/// sigma(H - V_th), the smooth stand-in for fire() used by soft mode.
Tensor soft_fire(const Tensor& h, double v_th, const SurrogateSpec& sg = {});

/// Hard reset. Throws ContractViolation when `s` is not binary.
Tensor reset(const Tensor& h, const Tensor& s, double v_reset);

/// 1 / (1 + (pi x)^2) element-wise.
Tensor surrogate_grad(const Tensor& x, const SurrogateSpec& sg = {});

struct Lif {
  double tau = 2.0;
};
struct Plif {
  double a = 0.0;
};
using NeuronMode = std::variant<Lif, Plif>;

/// Hard uses Theta in the forward pass; Soft replaces it with sigma so the
/// surrogate backward pass becomes the exact gradient (gradient checking).
enum class SpikeMode { kHard, kSoft };

struct NeuronParams {
  double v_th = 1.0;
  double v_reset = 0.0;
  NeuronMode mode = Plif{};
  bool detach_reset = true;
  SurrogateSpec surrogate;

  double k() const;
  double tau() const { return 1.0 / k(); }
  bool learnable() const { return std::holds_alternative<Plif>(mode); }
  /// Throws DomainError when tau <= 1 (LIF) or V_reset >= V_th.
  void validate() const;
};

struct StepResult {
  Tensor spikes;
  Tensor h;
  Tensor v;
};

/// Stateful layer of neurons sharing one parameter set.
class NeuronLayer {
 public:
  explicit NeuronLayer(NeuronParams params,
                       SpikeMode spike_mode = SpikeMode::kHard);

  /// V <- V_reset for a fresh forward pass over inputs of `shape`.
  void reset_state(const Shape& shape);

  /// Advances one time-step. Requires reset_state() with X's shape.
  StepResult step(const Tensor& x);

  const Tensor& potential() const { return v_; }
  const NeuronParams& params() const { return params_; }
  NeuronParams& params() { return params_; }
  SpikeMode spike_mode() const { return spike_mode_; }

 private:
  NeuronParams params_;
  SpikeMode spike_mode_;
  Tensor v_;
};

}  // namespace plif

#endif  // PLIF_NEURON_HPP
