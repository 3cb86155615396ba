// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include "plif/neuron.hpp"

#include <cmath>
#include <string>

namespace plif {

double clamp_k(double a) { return 1.0 / (1.0 + std::exp(-a)); }

double clamp_k_derivative(double a) {
  const double k = clamp_k(a);
  return k * (1.0 - k);
}

double a_from_tau(double tau0) {
  if (!(tau0 > 1.0))
    throw DomainError("a_from_tau: tau0 must be > 1, got " +
                      std::to_string(tau0));
  // sigmoid(a) = 1/tau0  =>  a = -ln(tau0 - 1)
  return -std::log(tau0 - 1.0);
}

Tensor charge(const Tensor& v_prev, const Tensor& x, double k,
              double v_reset) {
  require_same_shape(v_prev, x, "charge");
  return Tensor(v_prev.shape(),
                v_prev.values() + k * (x.values() - (v_prev.values() - v_reset)));
}

Tensor fire(const Tensor& h, double v_th) {
  return Tensor(h.shape(), (h.values() >= v_th).cast<double>());
}

Tensor soft_fire(const Tensor& h, double v_th, const SurrogateSpec& sg) {
  return Tensor(h.shape(),
                h.values().unaryExpr([&](double x) { return sg.value(x - v_th); }));
}

Tensor reset(const Tensor& h, const Tensor& s, double v_reset) {
  require_same_shape(h, s, "reset");
  if (!((s.values() == 0.0) || (s.values() == 1.0)).all())
    throw ContractViolation("reset: spike tensor is not binary");
  return Tensor(h.shape(),
                h.values() * (1.0 - s.values()) + v_reset * s.values());
}

Tensor surrogate_grad(const Tensor& x, const SurrogateSpec& sg) {
  return Tensor(x.shape(),
                x.values().unaryExpr([&](double v) { return sg.derivative(v); }));
}

double NeuronParams::k() const {
  if (const auto* lif = std::get_if<Lif>(&mode)) return 1.0 / lif->tau;
  return clamp_k(std::get<Plif>(mode).a);
}

void NeuronParams::validate() const {
  if (const auto* lif = std::get_if<Lif>(&mode); lif && !(lif->tau > 1.0))
    throw DomainError("LIF tau must be > 1, got " + std::to_string(lif->tau));
  if (!(v_reset < v_th))
    throw DomainError("V_reset must be below V_th");
}

NeuronLayer::NeuronLayer(NeuronParams params, SpikeMode spike_mode)
    : params_(params), spike_mode_(spike_mode) {
  params_.validate();
}

void NeuronLayer::reset_state(const Shape& shape) {
  v_ = Tensor(shape, params_.v_reset);
}

StepResult NeuronLayer::step(const Tensor& x) {
  if (v_.empty())
    throw ContractViolation("NeuronLayer::step before reset_state");
  StepResult r;
  r.h = charge(v_, x, params_.k(), params_.v_reset);
  if (spike_mode_ == SpikeMode::kHard) {
    r.spikes = fire(r.h, params_.v_th);
    r.v = reset(r.h, r.spikes, params_.v_reset);
  } else {
    r.spikes = soft_fire(r.h, params_.v_th, params_.surrogate);
    r.v = Tensor(r.h.shape(), r.h.values() * (1.0 - r.spikes.values()) +
                                  params_.v_reset * r.spikes.values());
  }
  v_ = r.v;
  return r;
}

}  // namespace plif
