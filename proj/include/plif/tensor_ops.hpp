// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_TENSOR_OPS_HPP
#define PLIF_TENSOR_OPS_HPP

#include <string>

#include "plif/tensor.hpp"

namespace plif {

// ---------------------------------------------------------------------------
// Element-wise helpers. No broadcasting beyond tensor-scalar.

template <typename Scalar>
BasicTensor<Scalar> add(const BasicTensor<Scalar>& a,
                        const BasicTensor<Scalar>& b) {
  require_same_shape(a, b, "add");
  return BasicTensor<Scalar>(a.shape(), a.values() + b.values());
}

template <typename Scalar>
BasicTensor<Scalar> hadamard(const BasicTensor<Scalar>& a,
                             const BasicTensor<Scalar>& b) {
  require_same_shape(a, b, "hadamard");
  return BasicTensor<Scalar>(a.shape(), a.values() * b.values());
}

template <typename Scalar>
BasicTensor<Scalar> scale(const BasicTensor<Scalar>& a, Scalar s) {
  return BasicTensor<Scalar>(a.shape(), a.values() * s);
}

// ---------------------------------------------------------------------------
// matmul

template <typename Scalar>
BasicTensor<Scalar> matmul(const BasicTensor<Scalar>& a,
                           const BasicTensor<Scalar>& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw ShapeError("matmul expects rank-2 operands, got " +
                     shape_string(a.shape()) + " and " +
                     shape_string(b.shape()));
  if (a.dim(1) != b.dim(0))
    throw ShapeError("matmul inner dimensions differ: " +
                     shape_string(a.shape()) + " x " + shape_string(b.shape()));
  BasicTensor<Scalar> out({a.dim(0), b.dim(1)});
  out.matrix(a.dim(0), b.dim(1)).noalias() =
      a.matrix(a.dim(0), a.dim(1)) * b.matrix(b.dim(0), b.dim(1));
  return out;
}

// ---------------------------------------------------------------------------
// 2-D cross-correlation, NCHW input, [Cout, Cin, kh, kw] kernel, zero padding.

inline Index conv_out_extent(Index in, Index k, Index stride, Index padding) {
  return (in + 2 * padding - k) / stride + 1;
}

namespace detail {

// Unfolds sample `n` into columns of shape [Cin*kh*kw, Ho*Wo].
template <typename Scalar>
void im2col(const Scalar* img, Index cin, Index h, Index w, Index kh, Index kw,
            Index stride, Index pad, Index ho, Index wo, Scalar* cols) {
  for (Index c = 0; c < cin; ++c)
    for (Index ky = 0; ky < kh; ++ky)
      for (Index kx = 0; kx < kw; ++kx) {
        Scalar* row = cols + ((c * kh + ky) * kw + kx) * ho * wo;
        for (Index oy = 0; oy < ho; ++oy) {
          const Index iy = oy * stride - pad + ky;
          for (Index ox = 0; ox < wo; ++ox) {
            const Index ix = ox * stride - pad + kx;
            row[oy * wo + ox] = (iy >= 0 && iy < h && ix >= 0 && ix < w)
                                    ? img[(c * h + iy) * w + ix]
                                    : Scalar(0);
          }
        }
      }
}

template <typename Scalar>
void col2im_add(const Scalar* cols, Index cin, Index h, Index w, Index kh,
                Index kw, Index stride, Index pad, Index ho, Index wo,
                Scalar* img) {
  for (Index c = 0; c < cin; ++c)
    for (Index ky = 0; ky < kh; ++ky)
      for (Index kx = 0; kx < kw; ++kx) {
        const Scalar* row = cols + ((c * kh + ky) * kw + kx) * ho * wo;
        for (Index oy = 0; oy < ho; ++oy) {
          const Index iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          for (Index ox = 0; ox < wo; ++ox) {
            const Index ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= w) continue;
            img[(c * h + iy) * w + ix] += row[oy * wo + ox];
          }
        }
      }
}

}  // namespace detail

struct Conv2dGeometry {
  Index batch, cin, h, w, cout, kh, kw, ho, wo;
};

template <typename Scalar>
Conv2dGeometry conv2d_geometry(const BasicTensor<Scalar>& input,
                               const BasicTensor<Scalar>& kernel, Index stride,
                               Index padding) {
  if (input.rank() != 4 || kernel.rank() != 4)
    throw ShapeError("conv2d expects NCHW input and OIHW kernel, got " +
                     shape_string(input.shape()) + " and " +
                     shape_string(kernel.shape()));
  if (input.dim(1) != kernel.dim(1))
    throw ShapeError("conv2d channel mismatch: input " +
                     shape_string(input.shape()) + ", kernel " +
                     shape_string(kernel.shape()));
  if (stride < 1 || padding < 0)
    throw ShapeError("conv2d stride must be >= 1 and padding >= 0");
  Conv2dGeometry g{input.dim(0), input.dim(1), input.dim(2), input.dim(3),
                   kernel.dim(0), kernel.dim(2), kernel.dim(3), 0, 0};
  if (g.kh > g.h + 2 * padding || g.kw > g.w + 2 * padding)
    throw ShapeError("conv2d kernel larger than padded input");
  g.ho = conv_out_extent(g.h, g.kh, stride, padding);
  g.wo = conv_out_extent(g.w, g.kw, stride, padding);
  return g;
}

template <typename Scalar>
BasicTensor<Scalar> conv2d(const BasicTensor<Scalar>& input,
                           const BasicTensor<Scalar>& kernel, Index stride,
                           Index padding) {
  using RowMatrix = typename BasicTensor<Scalar>::RowMatrix;
  const Conv2dGeometry g = conv2d_geometry(input, kernel, stride, padding);
  const Index patch = g.cin * g.kh * g.kw;
  const Index pixels = g.ho * g.wo;
  BasicTensor<Scalar> out({g.batch, g.cout, g.ho, g.wo});
  const auto k = kernel.matrix(g.cout, patch);
  RowMatrix cols(patch, pixels);
  for (Index n = 0; n < g.batch; ++n) {
    detail::im2col(input.data() + n * g.cin * g.h * g.w, g.cin, g.h, g.w, g.kh,
                   g.kw, stride, padding, g.ho, g.wo, cols.data());
    Eigen::Map<RowMatrix> o(out.data() + n * g.cout * pixels, g.cout, pixels);
    o.noalias() = k * cols;
  }
  return out;
}

/// Forward operands retained for the backward pass.
template <typename Scalar>
struct BasicConv2dCache {
  BasicTensor<Scalar> input;
  BasicTensor<Scalar> kernel;
  Index stride = 1;
  Index padding = 0;
};
using Conv2dCache = BasicConv2dCache<double>;

template <typename Scalar>
struct BasicConv2dGrads {
  BasicTensor<Scalar> grad_input;
  BasicTensor<Scalar> grad_kernel;
};
using Conv2dGrads = BasicConv2dGrads<double>;

template <typename Scalar>
BasicConv2dGrads<Scalar> conv2d_grads(const BasicConv2dCache<Scalar>& cache,
                                      const BasicTensor<Scalar>& upstream) {
  using RowMatrix = typename BasicTensor<Scalar>::RowMatrix;
  const Conv2dGeometry g =
      conv2d_geometry(cache.input, cache.kernel, cache.stride, cache.padding);
  if (upstream.shape() != Shape{g.batch, g.cout, g.ho, g.wo})
    throw ShapeError("conv2d_grads upstream " + shape_string(upstream.shape()));
  const Index patch = g.cin * g.kh * g.kw;
  const Index pixels = g.ho * g.wo;
  BasicConv2dGrads<Scalar> grads{BasicTensor<Scalar>(cache.input.shape()),
                                 BasicTensor<Scalar>(cache.kernel.shape())};
  auto gk = grads.grad_kernel.matrix(g.cout, patch);
  const auto k = cache.kernel.matrix(g.cout, patch);
  RowMatrix cols(patch, pixels);
  RowMatrix dcols(patch, pixels);
  for (Index n = 0; n < g.batch; ++n) {
    const Scalar* img = cache.input.data() + n * g.cin * g.h * g.w;
    detail::im2col(img, g.cin, g.h, g.w, g.kh, g.kw, cache.stride,
                   cache.padding, g.ho, g.wo, cols.data());
    Eigen::Map<const RowMatrix> dy(upstream.data() + n * g.cout * pixels,
                                   g.cout, pixels);
    gk.noalias() += dy * cols.transpose();
    dcols.noalias() = k.transpose() * dy;
    detail::col2im_add(dcols.data(), g.cin, g.h, g.w, g.kh, g.kw, cache.stride,
                       cache.padding, g.ho, g.wo,
                       grads.grad_input.data() + n * g.cin * g.h * g.w);
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Average pooling over NCHW windows.

template <typename Scalar>
BasicTensor<Scalar> avg_pool2d(const BasicTensor<Scalar>& input, Index k,
                               Index stride) {
  if (input.rank() != 4) throw ShapeError("avg_pool2d expects NCHW input");
  if (k < 1 || stride < 1 || k > input.dim(2) || k > input.dim(3))
    throw ShapeError("avg_pool2d window does not fit " +
                     shape_string(input.shape()));
  const Index n = input.dim(0) * input.dim(1), h = input.dim(2),
              w = input.dim(3);
  const Index ho = conv_out_extent(h, k, stride, 0);
  const Index wo = conv_out_extent(w, k, stride, 0);
  BasicTensor<Scalar> out({input.dim(0), input.dim(1), ho, wo});
  const Scalar inv = Scalar(1) / Scalar(k * k);
  for (Index p = 0; p < n; ++p) {
    const Scalar* src = input.data() + p * h * w;
    Scalar* dst = out.data() + p * ho * wo;
    for (Index oy = 0; oy < ho; ++oy)
      for (Index ox = 0; ox < wo; ++ox) {
        Scalar acc = 0;
        for (Index dy = 0; dy < k; ++dy)
          for (Index dx = 0; dx < k; ++dx)
            acc += src[(oy * stride + dy) * w + ox * stride + dx];
        dst[oy * wo + ox] = acc * inv;
      }
  }
  return out;
}

template <typename Scalar>
BasicTensor<Scalar> avg_pool2d_backward(const Shape& input_shape, Index k,
                                        Index stride,
                                        const BasicTensor<Scalar>& upstream) {
  const Index n = input_shape.at(0) * input_shape.at(1), h = input_shape.at(2),
              w = input_shape.at(3);
  const Index ho = conv_out_extent(h, k, stride, 0);
  const Index wo = conv_out_extent(w, k, stride, 0);
  if (upstream.shape() != Shape{input_shape[0], input_shape[1], ho, wo})
    throw ShapeError("avg_pool2d_backward upstream " +
                     shape_string(upstream.shape()));
  BasicTensor<Scalar> grad(input_shape);
  const Scalar inv = Scalar(1) / Scalar(k * k);
  for (Index p = 0; p < n; ++p) {
    const Scalar* src = upstream.data() + p * ho * wo;
    Scalar* dst = grad.data() + p * h * w;
    for (Index oy = 0; oy < ho; ++oy)
      for (Index ox = 0; ox < wo; ++ox) {
        const Scalar g = src[oy * wo + ox] * inv;
        for (Index dy = 0; dy < k; ++dy)
          for (Index dx = 0; dx < k; ++dx)
            dst[(oy * stride + dy) * w + ox * stride + dx] += g;
      }
  }
  return grad;
}

}  // namespace plif

#endif  // PLIF_TENSOR_OPS_HPP
