// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include "plif/optim.hpp"

#include <cmath>
#include <numbers>

namespace plif {

void adam_step(const std::vector<ParamRef>& params, OptimState& state,
               double lr) {
  for (const ParamRef& p : params) {
    require_same_shape(*p.value, *p.grad, "adam_step");
    const Tensor& g = *p.grad;
    for (Index i = 0; i < g.size(); ++i)
      if (!std::isfinite(g[i]))
        throw NumericError("non-finite gradient in '" + p.name + "' at element " +
                           std::to_string(i) + " (value " +
                           std::to_string(g[i]) + ")");
    auto it = state.moments.find(p.name);
    if (it != state.moments.end() && it->second.m.shape() != p.value->shape())
      throw ShapeError("optimizer state for '" + p.name + "' has shape " +
                       shape_string(it->second.m.shape()));
  }

  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (const ParamRef& p : params) {
    auto [it, fresh] = state.moments.try_emplace(p.name);
    if (fresh) {
      it->second.m = Tensor(p.value->shape());
      it->second.v = Tensor(p.value->shape());
    }
    auto& m = it->second.m.values();
    auto& v = it->second.v.values();
    const auto& g = p.grad->values();
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.square();
    p.value->values() -= lr * (m / bc1) / ((v / bc2).sqrt() + c.eps);
  }
}

void LrSchedule::validate() const {
  if (t_schedule < 1) throw ConfigError("T_schedule must be >= 1");
  if (!(lr_min <= lr_max)) throw ConfigError("lr_min must not exceed lr_max");
}

double cosine_lr(std::int64_t epoch, const LrSchedule& s) {
  s.validate();
  if (epoch < 0) throw DomainError("epoch must be >= 0");
  const double phase =
      static_cast<double>(epoch % s.t_schedule) / static_cast<double>(s.t_schedule);
  return s.lr_min +
         0.5 * (s.lr_max - s.lr_min) * (1.0 + std::cos(std::numbers::pi * phase));
}

}  // namespace plif
