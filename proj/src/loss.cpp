// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include "plif/loss.hpp"

#include <algorithm>
#include <cmath>

#include "plif/random.hpp"

namespace plif {

Eigen::MatrixXd encode_target(Index label, Index classes, Index steps) {
  if (classes < 1 || steps < 1)
    throw ShapeError("target needs classes >= 1 and steps >= 1");
  if (label < 0 || label >= classes)
    throw DomainError("label " + std::to_string(label) + " outside [0, " +
                      std::to_string(classes) + ")");
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(classes, steps);
  y.row(label).setOnes();
  return y;
}

namespace {

void check_pair(const Eigen::MatrixXd& o, const Eigen::MatrixXd& y) {
  if (o.rows() != y.rows() || o.cols() != y.cols() || o.size() == 0)
    throw ShapeError("loss: output " + std::to_string(o.rows()) + "x" +
                     std::to_string(o.cols()) + " vs target " +
                     std::to_string(y.rows()) + "x" + std::to_string(y.cols()));
}

}  // namespace

double mse_loss(const Eigen::MatrixXd& output, const Eigen::MatrixXd& target) {
  check_pair(output, target);
  return (output - target).squaredNorm() /
         static_cast<double>(output.rows() * output.cols());
}

Eigen::MatrixXd mse_grad(const Eigen::MatrixXd& output,
                         const Eigen::MatrixXd& target) {
  check_pair(output, target);
  return 2.0 * (output - target) /
         static_cast<double>(output.rows() * output.cols());
}

Index predict(const Eigen::MatrixXd& output) {
  if (output.size() == 0) throw ShapeError("predict: empty output");
  // Rates are multiples of 1/M, so equal means can differ by rounding in
  // the sum; anything closer than kTie is a tie.
  constexpr double kTie = 1e-12;
  const Eigen::VectorXd mean = output.rowwise().mean();
  Index best = 0;
  for (Index i = 1; i < mean.size(); ++i)
    if (mean[i] > mean[best] + kTie) best = i;
  return best;
}

Eigen::MatrixXd output_record(const Tensor& output, Index b) {
  if (output.rank() != 3)
    throw ShapeError("output record needs [T, B, C], got " +
                     shape_string(output.shape()));
  const Index steps = output.dim(0), batch = output.dim(1), c = output.dim(2);
  if (b < 0 || b >= batch) throw ContractViolation("sample index out of range");
  Eigen::MatrixXd o(c, steps);
  for (Index t = 0; t < steps; ++t)
    for (Index i = 0; i < c; ++i) o(i, t) = output[(t * batch + b) * c + i];
  return o;
}

BatchLoss batch_mse(const Tensor& output, const std::vector<int>& labels) {
  if (output.rank() != 3 ||
      output.dim(1) != static_cast<Index>(labels.size()))
    throw ShapeError("batch loss: output " + shape_string(output.shape()) +
                     " for " + std::to_string(labels.size()) + " labels");
  const Index steps = output.dim(0), batch = output.dim(1), c = output.dim(2);
  BatchLoss r;
  r.grad = Tensor(output.shape());
  r.predictions.resize(static_cast<std::size_t>(batch));
  for (Index b = 0; b < batch; ++b) {
    const Eigen::MatrixXd o = output_record(output, b);
    const Eigen::MatrixXd y = encode_target(labels[b], c, steps);
    r.loss += mse_loss(o, y);
    const Eigen::MatrixXd g = mse_grad(o, y) / static_cast<double>(batch);
    for (Index t = 0; t < steps; ++t)
      for (Index i = 0; i < c; ++i) r.grad[(t * batch + b) * c + i] = g(i, t);
    r.predictions[static_cast<std::size_t>(b)] = predict(o);
  }
  r.loss /= static_cast<double>(batch);
  return r;
}

Split split_train_val(const std::vector<int>& labels, Index classes,
                      double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw ConfigError("validation fraction must be in [0, 1)");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes)
      throw DataError("label " + std::to_string(labels[i]) + " outside [0, " +
                      std::to_string(classes) + ")");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  Rng rng(seed);
  Split s;
  for (std::size_t label = 0; label < by_class.size(); ++label) {
    auto& idx = by_class[label];
    if (idx.empty())
      throw DataError("class " + std::to_string(label) + " has no samples");
    shuffle(idx.begin(), idx.end(), rng);
    const auto n_val = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(idx.size())));
    s.validation.insert(s.validation.end(), idx.begin(), idx.begin() + n_val);
    s.train.insert(s.train.end(), idx.begin() + n_val, idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  return s;
}

double evaluate_protocol(Protocol protocol, const std::vector<double>& test,
                         const std::vector<double>& validation,
                         std::optional<double> test_at_best) {
  if (protocol == Protocol::kA) {
    if (test.empty()) throw ContractViolation("protocol A needs test records");
    return *std::max_element(test.begin(), test.end());
  }
  if (validation.empty()) throw ConfigError("protocol B needs a validation split");
  if (!test_at_best)
    throw ContractViolation("protocol B needs the best-validation test accuracy");
  return *test_at_best;
}

ProtocolTracker::ProtocolTracker(Protocol protocol, bool has_validation)
    : protocol_(protocol) {
  if (protocol == Protocol::kB && !has_validation)
    throw ConfigError("protocol B needs a validation split");
}

double ProtocolTracker::record_test(double accuracy) {
  if (protocol_ != Protocol::kA)
    throw ContractViolation("per-epoch test evaluation under protocol B");
  ++test_evaluations_;
  best_test_ = std::max(best_test_, accuracy);
  return best_test_;
}

bool ProtocolTracker::record_validation(std::size_t epoch, double accuracy) {
  if (protocol_ != Protocol::kB)
    throw ContractViolation("validation tracking is a protocol B feature");
  if (final_test_) throw ContractViolation("validation after the final test");
  if (best_epoch_ && accuracy <= best_validation_) return false;
  best_validation_ = accuracy;
  best_epoch_ = epoch;
  return true;
}

void ProtocolTracker::record_final_test(double accuracy) {
  if (protocol_ != Protocol::kB)
    throw ContractViolation("final test is a protocol B feature");
  if (final_test_) throw ContractViolation("test set already evaluated once");
  ++test_evaluations_;
  final_test_ = accuracy;
}

std::optional<double> ProtocolTracker::report() const {
  if (protocol_ == Protocol::kA) {
    if (test_evaluations_ == 0) return std::nullopt;
    return best_test_;
  }
  return final_test_;
}

ProtocolTracker::Snapshot ProtocolTracker::snapshot() const {
  Snapshot s;
  s.best_test = best_test_;
  s.best_validation = best_validation_;
  s.best_epoch = best_epoch_ ? static_cast<std::int64_t>(*best_epoch_) : -1;
  s.final_test = final_test_.value_or(-1.0);
  s.test_evaluations = test_evaluations_;
  return s;
}

void ProtocolTracker::restore(const Snapshot& s) {
  best_test_ = s.best_test;
  best_validation_ = s.best_validation;
  best_epoch_.reset();
  if (s.best_epoch >= 0) best_epoch_ = static_cast<std::size_t>(s.best_epoch);
  final_test_.reset();
  if (s.final_test >= 0.0) final_test_ = s.final_test;
  test_evaluations_ = static_cast<int>(s.test_evaluations);
}

}  // namespace plif
