// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_BPTT_HPP
#define PLIF_BPTT_HPP

#include <optional>

#include "plif/neuron.hpp"
#include "plif/tensor.hpp"

namespace plif {

/// Per-time-step record of one neuron layer. h, s and v are [T, ...]; x is
/// [T, ...] or [1, ...] when the input was held constant over T.
struct TimeCache {
  Tensor x;
  Tensor h;
  Tensor s;
  Tensor v;

  Index steps() const { return h.empty() ? 0 : h.dim(0); }
  bool complete() const;
  void clear() { *this = TimeCache{}; }
};

/// Runs T steps of a neuron layer from V = V_reset and records the cache.
/// `x` is [T, ...], or [1, ...] for an input held constant over all steps.
TimeCache forward_neuron_layer(const NeuronParams& params, SpikeMode mode,
                               const Tensor& x, Index steps);

struct NeuronBackward {
  Tensor grad_x;                  ///< dL/dX_t, [T, ...]
  std::optional<double> grad_a;   ///< present for PLIF layers only
};

/// Backward recursion through one neuron layer.
///
/// `grad_spikes` holds dL/dS_t for every t. The membrane recursion runs from
/// t = T-1 down to 0 with dL/dH_T = 0:
///
///   dL/dH_t = dL/dS_t sigma'(H_t - V_th)
///           + dL/dH_{t+1} (1 - k) dV_t/dH_t
///   dV_t/dH_t = 1 - S_t + (V_reset - H_t) sigma'(.)   (or 1 - S_t if detached)
///   dL/dX_t = k dL/dH_t
///
/// For PLIF, a enters every step through k, so
///
///   dL/da = k'(a) sum_t dL/dH_t (X_t - (V_{t-1} - V_reset)),  V_{-1} = V_reset,
///
/// where each term holds V_{t-1} fixed; the recursion in dL/dH_t already
/// carries the paths through earlier steps. This equals the forward
/// sensitivity D_t = dH_t/da (total) contracted with the spike-path terms
/// dL/dS_t sigma'(.), and is accumulated in the same reverse sweep.
NeuronBackward backward_neuron_layer(const TimeCache& cache,
                                     const NeuronParams& params,
                                     const Tensor& grad_spikes);

/// dL/dW for a fully connected synapse X_t = I_t W^T, summed over time.
/// `presynaptic` is [T, N, in] (I_t), `grad_x` is [T, N, out]; the k factor
/// is already folded into grad_x by backward_neuron_layer. Returns [out, in].
Tensor backward_synapse(const Tensor& presynaptic, const Tensor& grad_x);

}  // namespace plif

#endif  // PLIF_BPTT_HPP
