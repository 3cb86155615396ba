// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include "plif/bptt.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace plif {

bool TimeCache::complete() const {
  if (x.empty() || h.empty() || s.empty() || v.empty()) return false;
  if (h.shape() != s.shape() || h.shape() != v.shape() || x.rank() != h.rank())
    return false;
  return std::equal(x.shape().begin() + 1, x.shape().end(), h.shape().begin() + 1) &&
         (x.dim(0) == h.dim(0) || x.dim(0) == 1);
}

TimeCache forward_neuron_layer(const NeuronParams& params, SpikeMode mode,
                               const Tensor& x, Index steps) {
  if (x.rank() < 2)
    throw ShapeError("forward_neuron_layer expects [T, ...] input, got " +
                     shape_string(x.shape()));
  if (steps < 1 || (x.dim(0) != steps && x.dim(0) != 1))
    throw ShapeError("forward_neuron_layer: input " + shape_string(x.shape()) +
                     " for " + std::to_string(steps) + " steps");
  Shape full = x.shape();
  full[0] = steps;

  TimeCache cache{x, Tensor(full), Tensor(full), Tensor(full)};
  const Index n = x.size() / x.dim(0);
  const bool held = x.dim(0) == 1;
  const double k = params.k();
  const double v_th = params.v_th;
  const double v_reset = params.v_reset;
  const SurrogateSpec sg = params.surrogate;
  const bool hard = mode == SpikeMode::kHard;
  // Same arithmetic as charge/fire/reset, fused over the whole history.
  for (Index t = 0; t < steps; ++t) {
    const double* xt = x.data() + (held ? 0 : t * n);
    const double* v_prev = t == 0 ? nullptr : cache.v.data() + (t - 1) * n;
    double* h = cache.h.data() + t * n;
    double* s = cache.s.data() + t * n;
    double* v = cache.v.data() + t * n;
    for (Index i = 0; i < n; ++i) {
      const double vp = v_prev ? v_prev[i] : v_reset;
      const double ht = vp + k * (xt[i] - (vp - v_reset));
      const double st = hard ? (ht >= v_th ? 1.0 : 0.0) : sg.value(ht - v_th);
      h[i] = ht;
      s[i] = st;
      v[i] = ht * (1.0 - st) + v_reset * st;
    }
  }
  return cache;
}

NeuronBackward backward_neuron_layer(const TimeCache& cache,
                                     const NeuronParams& params,
                                     const Tensor& grad_spikes) {
  if (!cache.complete())
    throw ContractViolation("backward_neuron_layer: incomplete time cache");
  if (grad_spikes.shape() != cache.h.shape())
    throw ShapeError("backward_neuron_layer: upstream " +
                     shape_string(grad_spikes.shape()) + " vs cache " +
                     shape_string(cache.h.shape()));

  const Index steps = cache.steps();
  const Index n = cache.h.size() / steps;
  const bool held = cache.x.dim(0) == 1;
  const double k = params.k();
  const double v_th = params.v_th;
  const double v_reset = params.v_reset;
  const SurrogateSpec sg = params.surrogate;
  const bool detach = params.detach_reset;
  const auto* plif = std::get_if<Plif>(&params.mode);
  const double dk = plif ? clamp_k_derivative(plif->a) : 0.0;

  NeuronBackward out;
  out.grad_x = Tensor(cache.h.shape());
  std::vector<double> grad_h_next(static_cast<std::size_t>(n), 0.0);
  double grad_a = 0.0;
  for (Index t = steps - 1; t >= 0; --t) {
    const double* h = cache.h.data() + t * n;
    const double* s = cache.s.data() + t * n;
    const double* up = grad_spikes.data() + t * n;
    const double* xt = cache.x.data() + (held ? 0 : t * n);
    const double* v_prev = t == 0 ? nullptr : cache.v.data() + (t - 1) * n;
    double* gx = out.grad_x.data() + t * n;
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double surrogate = sg.derivative(h[i] - v_th);
      const double dv_dh =
          detach ? 1.0 - s[i] : 1.0 - s[i] + (v_reset - h[i]) * surrogate;
      double& next = grad_h_next[static_cast<std::size_t>(i)];
      // `next` still holds dL/dH_{t+1} on entry.
      const double grad_h = up[i] * surrogate + next * (1.0 - k) * dv_dh;
      gx[i] = k * grad_h;
      next = grad_h;
      if (plif) {
        const double vp = v_prev ? v_prev[i] : v_reset;
        acc += grad_h * (xt[i] - (vp - v_reset));
      }
    }
    grad_a += acc;
  }
  if (plif) out.grad_a = grad_a * dk;
  return out;
}

Tensor backward_synapse(const Tensor& presynaptic, const Tensor& grad_x) {
  if (presynaptic.rank() != 3 || grad_x.rank() != 3 ||
      presynaptic.dim(0) != grad_x.dim(0) ||
      presynaptic.dim(1) != grad_x.dim(1))
    throw ShapeError("backward_synapse: presynaptic " +
                     shape_string(presynaptic.shape()) + ", grad " +
                     shape_string(grad_x.shape()));
  const Index rows = presynaptic.dim(0) * presynaptic.dim(1);
  const Index in = presynaptic.dim(2);
  const Index out = grad_x.dim(2);
  Tensor grad_w({out, in});
  grad_w.matrix(out, in).noalias() =
      grad_x.matrix(rows, out).transpose() * presynaptic.matrix(rows, in);
  return grad_w;
}

}  // namespace plif
