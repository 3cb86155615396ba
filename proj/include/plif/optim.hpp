// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_OPTIM_HPP
#define PLIF_OPTIM_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "plif/layers.hpp"

namespace plif {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamMoments {
  Tensor m;
  Tensor v;
};

struct OptimState {
  AdamConfig config;
  double base_lr = 1e-3;
  std::int64_t step = 0;
  std::map<std::string, AdamMoments> moments;  // keyed by parameter name
};

/// One Adam update of every parameter at learning rate `lr`.
///
/// Gradients are checked before anything is written: a non-finite entry
/// throws NumericError naming the parameter and leaves parameters and state
/// untouched.
void adam_step(const std::vector<ParamRef>& params, OptimState& state,
               double lr);

struct LrSchedule {
  int t_schedule = 64;
  double lr_max = 1e-3;
  double lr_min = 0.0;

  void validate() const;
};

/// Cosine annealing with a restart every t_schedule epochs.
double cosine_lr(std::int64_t epoch, const LrSchedule& schedule);

}  // namespace plif

#endif  // PLIF_OPTIM_HPP
