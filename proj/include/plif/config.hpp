// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_CONFIG_HPP
#define PLIF_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "plif/layers.hpp"
#include "plif/loss.hpp"

namespace plif {

/// Training run settings. The text form is documented in docs/config.md.
struct TrainConfig {
  std::string network;
  std::string dataset = "mnist";      ///< mnist | temporal_xor
  std::string data_dir;               ///< IDX directory for mnist
  Index steps = 8;                    ///< simulation time-steps T
  Index classes = 10;

  Index batch = 16;
  Index epochs = 30;
  double lr = 1e-3;
  double lr_min = 0.0;
  int t_schedule = 64;
  double dropout = 0.5;

  double tau0 = 2.0;                  ///< initial tau of PLIF layers
  double v_th = 1.0;
  double v_reset = 0.0;
  bool detach_reset = true;
  TiePolicy tie_policy = TiePolicy::kFirst;

  Protocol protocol = Protocol::kA;
  double val_fraction = 0.15;         ///< protocol B only

  bool normalize = true;
  bool augment_flip = false;
  Index augment_pad = 0;

  // temporal_xor
  Index xor_train = 512;
  Index xor_test = 256;
  Index xor_size = 8;
  double xor_noise = 0.05;

  std::uint64_t seed = 0;
  std::string out_dir = "run";
  Index checkpoint_every = 0;         ///< 0: only last.ckpt and best.ckpt
  int threads = 1;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys, bad
/// values and duplicates throw ConfigError with the line number. Relative
/// `data_dir` and `out_dir` values are resolved against `base_dir`.
TrainConfig parse_config(const std::string& text,
                         const std::string& source = "<config>",
                         const std::string& base_dir = "");
TrainConfig load_config(const std::string& path);

/// Applies one `key=value` override with the same rules as the file.
void apply_override(TrainConfig& config, const std::string& key,
                    const std::string& value);

/// Canonical text of every setting that affects results (excludes out_dir,
/// threads and checkpoint cadence).
std::string canonical_config(const TrainConfig& config);
/// FNV-1a 64 of canonical_config().
std::uint64_t config_hash(const TrainConfig& config);

std::string protocol_name(Protocol p);
std::string tie_policy_name(TiePolicy p);

}  // namespace plif

#endif  // PLIF_CONFIG_HPP
