// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_ERRORS_HPP
#define PLIF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace plif {

/// Tensor extents that do not fit the operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition was broken by the caller (non-binary spikes,
/// incomplete caches, out-of-range indices).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite loss or gradient during training.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace plif

#endif  // PLIF_ERRORS_HPP
