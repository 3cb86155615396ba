// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include "plif/trace.hpp"

#include <cmath>
#include <sstream>

#include "plif/errors.hpp"

namespace plif {

double lif_constant_response(double t, double tau, double wi) {
  return wi * -std::expm1(-t / tau);
}

Trace trace_neuron(const TraceConfig& c) {
  if (!(c.tau > 0.0)) throw DomainError("trace: tau must be > 0");
  if (!(c.dt > 0.0)) throw DomainError("trace: dt must be > 0");
  if (!(c.duration >= 0.0)) throw DomainError("trace: duration must be >= 0");
  Trace out;
  if (c.method == TraceMethod::kDiscrete && c.dt >= c.tau) {
    std::ostringstream os;
    os << "dt = " << c.dt << " >= tau = " << c.tau
       << ": the discrete map no longer approximates the continuous dynamics";
    out.warnings.push_back(os.str());
  }
  const long n = std::lround(std::floor(c.duration / c.dt + 1e-9));
  const double wi = c.w * c.current;
  // Impulses arriving in (t_{i-1}, t_i], or at or before t_0.
  auto arrivals = [&](long i) {
    int count = 0;
    const double hi = static_cast<double>(i) * c.dt;
    const double lo = static_cast<double>(i - 1) * c.dt;
    for (double s : c.impulses)
      if (s <= hi + 1e-9 && (i == 0 || s > lo + 1e-9)) ++count;
    return count;
  };
  double v = 0.0;
  const double decay = c.method == TraceMethod::kAnalytic ? std::exp(-c.dt / c.tau)
                                                           : 1.0 - c.dt / c.tau;
  for (long i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) * c.dt;
    if (c.input == TraceInput::kConstant) {
      if (c.method == TraceMethod::kAnalytic)
        v = lif_constant_response(t, c.tau, wi);
      else if (i > 0)
        v += c.dt / c.tau * (wi - v);
    } else {
      if (i > 0) v *= decay;
      v += c.w * arrivals(i);
    }
    out.points.push_back({t, v});
  }
  return out;
}

std::string trace_csv(const Trace& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "t,V\n";
  for (const auto& p : trace.points) os << p.t << ',' << p.v << '\n';
  return os.str();
}

}  // namespace plif
