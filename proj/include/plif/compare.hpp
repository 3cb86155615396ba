// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_COMPARE_HPP
#define PLIF_COMPARE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace plif {

struct RunEpoch {
  long epoch = 0;
  double train_loss = 0.0;
  double accuracy = 0.0;     ///< test (protocol A) or validation (B)
  std::vector<double> taus;  ///< every neuron layer; LIF entries are constant
};

struct RunSummary {
  std::string source;
  std::string dataset;
  std::string network;
  std::uint64_t seed = 0;
  std::vector<std::string> kinds;  ///< "PLIF" or "LIF" per neuron layer
  std::vector<double> initial_taus;
  std::vector<RunEpoch> epochs;
};

/// Parses a run.jsonl. Throws DataError naming the line on malformed input.
RunSummary parse_run_log(const std::string& text, const std::string& source);
RunSummary load_run_log(const std::string& path);

/// max_i |tau_a(i) - tau_b(i)|.
double tau_gap(const std::vector<double>& a, const std::vector<double>& b);

struct Comparison {
  double gap_start = 0.0;  ///< largest pairwise gap before training
  double gap_end = 0.0;    ///< largest pairwise gap after the last common epoch
  long epochs = 0;         ///< common epochs
  std::string csv;         ///< aligned per-epoch curves
  std::vector<std::string> warnings;
};

/// Throws DataError when fewer than two runs are given, datasets differ or
/// the neuron layer counts differ. Differing seeds only warn.
Comparison compare_runs(const std::vector<RunSummary>& runs);

}  // namespace plif

#endif  // PLIF_COMPARE_HPP
