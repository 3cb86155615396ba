// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_LOSS_HPP
#define PLIF_LOSS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "plif/tensor.hpp"

namespace plif {

// Output records are C x T matrices: O(i, t) is the voted output of class i
// at step t.

/// Y(l, t) = 1 for every t, zero elsewhere.
Eigen::MatrixXd encode_target(Index label, Index classes, Index steps);

/// (1/T) sum_t (1/C) sum_i (O(i,t) - Y(i,t))^2
double mse_loss(const Eigen::MatrixXd& output, const Eigen::MatrixXd& target);

/// dL/dO = 2 (O - Y) / (T C)
Eigen::MatrixXd mse_grad(const Eigen::MatrixXd& output,
                         const Eigen::MatrixXd& target);

/// argmax over classes of the mean over time; ties (within 1e-12) go to the
/// lowest index.
Index predict(const Eigen::MatrixXd& output);

/// Output record of sample `b` from a network output [T, B, C].
Eigen::MatrixXd output_record(const Tensor& output, Index b);

struct BatchLoss {
  double loss = 0.0;      ///< mean of per-sample losses
  Tensor grad;            ///< dL/d(output), [T, B, C]
  std::vector<Index> predictions;
};

BatchLoss batch_mse(const Tensor& output, const std::vector<int>& labels);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Per-class stratified split: round(fraction * n_c) samples of each class
/// go to validation. Deterministic in `seed`; both parts are sorted. Every
/// class in [0, classes) must have a sample.
Split split_train_val(const std::vector<int>& labels, Index classes,
                      double fraction, std::uint64_t seed);

enum class Protocol { kA, kB };

/// Accuracy reporting. A: maximum per-epoch test accuracy. B: a single test
/// evaluation of the best-validation model.
class ProtocolTracker {
 public:
  ProtocolTracker(Protocol protocol, bool has_validation);

  Protocol protocol() const { return protocol_; }

  /// A: records one epoch's test accuracy and returns the running maximum.
  double record_test(double accuracy);
  /// B: returns true when `accuracy` beats every earlier epoch.
  bool record_validation(std::size_t epoch, double accuracy);
  /// B: the one test evaluation. Throws ContractViolation on a second call.
  void record_final_test(double accuracy);

  std::optional<double> report() const;
  std::optional<std::size_t> best_epoch() const { return best_epoch_; }
  double best_validation() const { return best_validation_; }
  int test_evaluations() const { return test_evaluations_; }

  // Serialized with checkpoints.
  struct Snapshot {
    double best_test = -1.0;
    double best_validation = -1.0;
    std::int64_t best_epoch = -1;
    double final_test = -1.0;
    std::int64_t test_evaluations = 0;
  };
  Snapshot snapshot() const;
  void restore(const Snapshot& s);

 private:
  Protocol protocol_;
  double best_test_ = -1.0;
  double best_validation_ = -1.0;
  std::optional<std::size_t> best_epoch_;
  std::optional<double> final_test_;
  int test_evaluations_ = 0;
};

/// Reported accuracy of a finished run from its per-epoch records. B takes
/// the test accuracy measured with the best-validation model.
double evaluate_protocol(Protocol protocol, const std::vector<double>& test,
                         const std::vector<double>& validation = {},
                         std::optional<double> test_at_best = std::nullopt);

}  // namespace plif

#endif  // PLIF_LOSS_HPP
