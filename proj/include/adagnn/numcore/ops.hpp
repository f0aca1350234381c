#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adagnn/numcore/tape.hpp"
#include "adagnn/numcore/tensor.hpp"

namespace adagnn::numcore {

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kProbFloor = 1e-12;
inline constexpr double kProbCeil = 1.0 - 1e-12;

// Every op below records itself on the active tape when any input requires
// gradients. Shape mismatches throw NumError naming the op and both shapes.

/// (m,k) x (k,n) -> (m,n)
Tensor matmul(const Tensor& a, const Tensor& b);

/// Same shape, or b of shape (1,n) added to every row of a.
Tensor add(const Tensor& a, const Tensor& b);

/// Same shape, or b of shape (m,1) scaling every column of a.
Tensor mul(const Tensor& a, const Tensor& b);

Tensor concat_columns(std::span<const Tensor> parts);
Tensor concat_columns(const Tensor& a, const Tensor& b);

/// Mean of the rows: (m,n) -> (1,n).
Tensor row_mean(const Tensor& x);

/// Sum of all entries: -> (1,1).
Tensor reduce_sum(const Tensor& x);

Tensor sigmoid(const Tensor& x);
Tensor exp(const Tensor& x);

/// Natural log. Throws on any non-positive entry.
Tensor log(const Tensor& x);

/// log(clamp(x, lo, hi)); the gradient is zero where the clamp is active.
Tensor log_clamped(const Tensor& x, double lo = kProbFloor, double hi = kProbCeil);

Tensor leaky_relu(const Tensor& x, double slope = kLeakySlope);

/// Row-wise softmax of a 2-D tensor.
Tensor softmax_rows(const Tensor& x);

/// out.row(i) = x.row(index[i]).
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> index);

/// Segments are row ranges [offsets[s], offsets[s+1]); offsets.front() == 0
/// and offsets.back() == x.rows(). Output has one row per segment; an empty
/// segment yields a zero row.
Tensor segment_sum(const Tensor& x, std::span<const std::size_t> offsets);
Tensor segment_mean(const Tensor& x, std::span<const std::size_t> offsets);

/// Softmax of a column vector (m,1) within each segment.
Tensor segment_softmax(const Tensor& scores, std::span<const std::size_t> offsets);

/// scale * x + shift, elementwise.
Tensor affine(const Tensor& x, double scale, double shift);

/// Uniform entry point over the core op kinds (matmul .. softmax_rows).
/// Unary kinds take one input, binary kinds two, concat_columns any number.
Tensor forward_op(OpKind kind, std::span<const Tensor> inputs);

}  // namespace adagnn::numcore
