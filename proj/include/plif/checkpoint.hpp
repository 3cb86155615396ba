// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_CHECKPOINT_HPP
#define PLIF_CHECKPOINT_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "plif/loss.hpp"
#include "plif/tensor.hpp"

namespace plif {

// Binary layout, all integers and doubles little-endian:
//
//   "PLIFCKPT" u32 version
//   u64 config_hash  i64 epoch  i64 adam_step
//   str config_text  str rng_state
//   protocol: f64 best_test f64 best_validation i64 best_epoch
//             f64 final_test i64 test_evaluations
//   u32 n_tensors  { str name  u32 rank  u64 extents[rank]  f64 values[] }
//   u32 n_lines    { str line }
//
// where str is a u64 length followed by bytes. Tensor names are prefixed
// "param/", "buffer/", "adam_m/" or "adam_v/".

constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint64_t config_hash = 0;
  std::int64_t epoch = 0;  ///< completed epochs
  std::int64_t adam_step = 0;
  std::string config_text;
  std::string rng_state;
  ProtocolTracker::Snapshot protocol;
  std::vector<std::pair<std::string, Tensor>> tensors;
  std::vector<std::string> log_lines;  ///< run-log records so far

  /// Throws DataError when `name` is missing.
  const Tensor& tensor(const std::string& name) const;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Throws DataError on bad magic, unknown version or truncation.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes,
                             const std::string& source = "<memory>");

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace plif

#endif  // PLIF_CHECKPOINT_HPP
