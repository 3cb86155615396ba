// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_TRAINER_HPP
#define PLIF_TRAINER_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plif/checkpoint.hpp"
#include "plif/config.hpp"
#include "plif/data.hpp"
#include "plif/network.hpp"
#include "plif/optim.hpp"

namespace plif {

/// Samples for one task, either static images (held over T) or sequences.
struct TaskData {
  bool is_static = true;
  Tensor train;               ///< [N, C, H, W] raw pixels or [N, T, ...]
  std::vector<int> train_labels;
  Tensor test;
  std::vector<int> test_labels;
  ChannelStats stats;         ///< identity when normalization is off

  Shape feature_shape() const;
};

/// Loads or generates the data named by `config`.
TaskData load_task(const TrainConfig& config);

/// Network input for samples `idx` of `samples`: [1, B, C, H, W] for static
/// data (normalized, augmented when `augment` is given) or [T, B, ...].
Tensor make_batch(const TaskData& data, const Tensor& samples,
                  const std::vector<std::size_t>& idx, const TrainConfig& config,
                  Rng* augment_rng);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Evaluation-mode pass over `idx` (all samples when empty).
Evaluation evaluate(Network& net, const TaskData& data, const Tensor& samples,
                    const std::vector<int>& labels, const TrainConfig& config,
                    std::vector<std::size_t> idx = {});

struct EpochRecord {
  Index epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> val_accuracy;
  std::optional<double> test_accuracy;
  std::vector<double> taus;  ///< PLIF layers only
};

struct TrainResult {
  std::vector<EpochRecord> epochs;  ///< this invocation's epochs
  std::optional<double> reported_accuracy;
  std::vector<double> final_taus;
};

/// Runs the training loop, writing into config.out_dir:
///   run.jsonl    header plus one record per epoch (deterministic)
///   timing.jsonl wall-clock seconds per epoch
///   last.ckpt, best.ckpt, epoch_<n>.ckpt (every checkpoint_every epochs)
class Trainer {
 public:
  explicit Trainer(TrainConfig config);

  /// Continues from a checkpoint written under an identical configuration.
  /// Throws ConfigError when the configuration hash differs.
  void resume(const std::string& checkpoint_path);

  TrainResult run();

  /// Called after each epoch (progress display).
  std::function<void(const EpochRecord&)> on_epoch;

  Network& network() { return net_; }
  const TaskData& data() const { return data_; }
  const TrainConfig& config() const { return config_; }

  /// Model and optimizer state for the current epoch.
  Checkpoint snapshot() const;
  /// Parameters and buffers only (evaluation of a saved model).
  void load_weights(const Checkpoint& c) { restore(c, false); }

 private:
  EpochRecord train_epoch(Index epoch);
  void restore(const Checkpoint& c, bool with_optimizer);
  std::string header_line() const;
  std::string epoch_line(const EpochRecord& r) const;
  void write_log() const;
  std::vector<double> plif_taus() const;

  TrainConfig config_;
  TaskData data_;
  Rng rng_;
  Network net_;
  OptimState optim_;
  ProtocolTracker tracker_;
  std::vector<std::size_t> train_idx_;
  std::vector<std::size_t> val_idx_;
  Index epoch_ = 0;
  std::vector<std::string> log_lines_;
};

/// Rebuilds the network stored in a checkpoint (parameters and buffers).
Network network_from_checkpoint(const Checkpoint& ckpt, TrainConfig* config = nullptr);

/// Keeps large freed blocks in the heap so per-batch activations reuse
/// memory instead of faulting in fresh pages (glibc only; no-op elsewhere).
void tune_allocator();

}  // namespace plif

#endif  // PLIF_TRAINER_HPP
