// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_TRACE_HPP
#define PLIF_TRACE_HPP

#include <string>
#include <vector>

namespace plif {

// Sub-threshold membrane traces of a single neuron, tau dV/dt = -V + X(t).

enum class TraceMethod { kAnalytic, kDiscrete };
enum class TraceInput { kConstant, kImpulses };

struct TraceConfig {
  TraceMethod method = TraceMethod::kAnalytic;
  TraceInput input = TraceInput::kConstant;
  double tau = 10.0;
  double w = 1.0;
  double current = 1.0;          ///< I, constant mode
  std::vector<double> impulses;  ///< spike times, impulse mode
  double duration = 100.0;
  double dt = 1.0;
};

struct TracePoint {
  double t;
  double v;
};

struct Trace {
  std::vector<TracePoint> points;  ///< t = 0, dt, ..., duration
  std::vector<std::string> warnings;
};

/// wI (1 - exp(-t / tau)).
double lif_constant_response(double t, double tau, double wi);

/// Constant input: closed form or V_n = V_{n-1} + (dt/tau)(wI - V_{n-1}).
/// Impulses: each spike at t_i adds w to V; between spikes V decays as
/// exp(-dt/tau) (analytic) or by (1 - dt/tau) per step (discrete). A spike
/// lands on the first grid point at or after t_i.
/// Throws DomainError for tau <= 0, dt <= 0 or duration < 0. Warns when
/// dt >= tau in discrete mode.
Trace trace_neuron(const TraceConfig& config);

/// "t,V" header plus one row per point.
std::string trace_csv(const Trace& trace);

}  // namespace plif

#endif  // PLIF_TRACE_HPP
