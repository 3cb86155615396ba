// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_TENSOR_HPP
#define PLIF_TENSOR_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "plif/errors.hpp"

namespace plif {

using Index = std::ptrdiff_t;
using Shape = std::vector<Index>;

inline Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1},
                         std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

/// Dense row-major N-dimensional array.
///
/// The shape is fixed at construction. Element storage is an Eigen column
/// array so whole-tensor arithmetic can be written as Eigen expressions over
/// `values()`; `matrix(r, c)` exposes the buffer as a row-major matrix view
/// for GEMM-shaped kernels.
template <typename Scalar>
class BasicTensor {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using RowMatrix =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatrixMap = Eigen::Map<RowMatrix>;
  using ConstMatrixMap = Eigen::Map<const RowMatrix>;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, Scalar fill = Scalar(0))
      : shape_(std::move(shape)) {
    validate_shape();
    values_ = Array::Constant(shape_size(shape_), fill);
  }

  BasicTensor(Shape shape, std::initializer_list<Scalar> values)
      : shape_(std::move(shape)) {
    validate_shape();
    if (static_cast<Index>(values.size()) != shape_size(shape_))
      throw ShapeError("tensor: " + std::to_string(values.size()) +
                       " values for shape " + shape_string(shape_));
    values_.resize(shape_size(shape_));
    std::copy(values.begin(), values.end(), values_.data());
  }

  template <typename Derived>
  BasicTensor(Shape shape, const Eigen::DenseBase<Derived>& values)
      : shape_(std::move(shape)) {
    validate_shape();
    if (values.size() != shape_size(shape_))
      throw ShapeError("tensor: " + std::to_string(values.size()) +
                       " values for shape " + shape_string(shape_));
    values_ = values.derived().array().template cast<Scalar>();
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  Index size() const { return values_.size(); }
  bool empty() const { return values_.size() == 0; }

  Scalar* data() { return values_.data(); }
  const Scalar* data() const { return values_.data(); }

  Array& values() { return values_; }
  const Array& values() const { return values_; }

  Scalar& operator[](Index i) { return values_[i]; }
  Scalar operator[](Index i) const { return values_[i]; }

  /// Multi-index element access; bounds are checked.
  Scalar& at(std::initializer_list<Index> idx) { return values_[offset(idx)]; }
  Scalar at(std::initializer_list<Index> idx) const {
    return values_[offset(idx)];
  }

  MatrixMap matrix(Index rows, Index cols) {
    check_matrix(rows, cols);
    return MatrixMap(values_.data(), rows, cols);
  }
  ConstMatrixMap matrix(Index rows, Index cols) const {
    check_matrix(rows, cols);
    return ConstMatrixMap(values_.data(), rows, cols);
  }

  /// Same elements under a new shape with the identical element count.
  BasicTensor reshaped(Shape shape) const& {
    BasicTensor out = *this;
    out.reshape_in_place(std::move(shape));
    return out;
  }
  BasicTensor reshaped(Shape shape) && {
    reshape_in_place(std::move(shape));
    return std::move(*this);
  }

  /// Contiguous slab `i` of the leading axis, as a tensor of the remaining
  /// extents (copy).
  BasicTensor slab(Index i) const {
    if (rank() < 2 || i < 0 || i >= shape_[0])
      throw ShapeError("slab " + std::to_string(i) + " of " +
                       shape_string(shape_));
    Shape inner(shape_.begin() + 1, shape_.end());
    const Index n = shape_size(inner);
    return BasicTensor(std::move(inner), values_.segment(i * n, n));
  }

  auto slab_values(Index i) {
    const Index n = size() / shape_.at(0);
    return values_.segment(i * n, n);
  }
  auto slab_values(Index i) const {
    const Index n = size() / shape_.at(0);
    return values_.segment(i * n, n);
  }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && (a.values_ == b.values_).all();
  }

 private:
  void validate_shape() const {
    for (Index e : shape_)
      if (e <= 0)
        throw ShapeError("tensor extents must be positive, got " +
                         shape_string(shape_));
  }

  void reshape_in_place(Shape shape) {
    for (Index e : shape)
      if (e <= 0) throw ShapeError("reshape to " + shape_string(shape));
    if (shape_size(shape) != size())
      throw ShapeError("cannot reshape " + shape_string(shape_) + " to " +
                       shape_string(shape));
    shape_ = std::move(shape);
  }

  void check_matrix(Index rows, Index cols) const {
    if (rows * cols != size())
      throw ShapeError("matrix view " + std::to_string(rows) + "x" +
                       std::to_string(cols) + " of " + shape_string(shape_));
  }

  Index offset(std::initializer_list<Index> idx) const {
    if (static_cast<Index>(idx.size()) != rank())
      throw ShapeError("index rank mismatch for " + shape_string(shape_));
    Index off = 0;
    std::size_t d = 0;
    for (Index i : idx) {
      if (i < 0 || i >= shape_[d])
        throw ContractViolation("index out of range for " +
                                shape_string(shape_));
      off = off * shape_[d] + i;
      ++d;
    }
    return off;
  }

  Shape shape_;
  Array values_;
};

using Tensor = BasicTensor<double>;

template <typename Scalar>
void require_same_shape(const BasicTensor<Scalar>& a,
                        const BasicTensor<Scalar>& b, const char* what) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(what) + ": shape " + shape_string(a.shape()) +
                     " vs " + shape_string(b.shape()));
}

}  // namespace plif

#endif  // PLIF_TENSOR_HPP
