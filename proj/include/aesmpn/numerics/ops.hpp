// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aesmpn/numerics/graph.hpp"

// Differentiable tensor operations. Each records its gradient rule on the
// graph owning its inputs. Binary elementwise ops accept equal shapes, or a
// matrix on the left and a bias vector on the right that is broadcast over
// rows.

namespace aesmpn::numerics {

Var matmul(Var a, Var b);
/// a [m x k] times b [n x k] transposed, giving [m x n].
Var matmul_nt(Var a, Var b);
Var transpose(Var a);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);

Var sigmoid(Var x);
Var tanh_op(Var x);
Var selu(Var x);
Var abs_op(Var x);

inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;

Var concat(std::span<const Var> parts, std::size_t axis);
inline Var concat(std::initializer_list<Var> parts, std::size_t axis) {
  return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}

/// Sum of all elements, shape [1].
Var reduce_sum(Var x);
/// Sum along an axis; the axis is removed ([m x n] -> [n] for axis 0).
Var reduce_sum(Var x, std::size_t axis);
Var reduce_mean(Var x);
Var reduce_mean(Var x, std::size_t axis);

Var reshape(Var x, Shape shape);

/// out[r] = x[index[r]] for a matrix x.
Var gather_rows(Var x, std::span<const std::size_t> index);
/// Copy of base with rows index[r] replaced by rows[r]. Indices must be distinct.
Var scatter_rows(Var base, std::span<const std::size_t> index, Var rows);
/// out[s] = sum of x[r] over all r with segment[r] == s, for s < count.
/// Each output element is summed in ascending value order, so the result
/// does not depend on the order of the rows.
Var segment_sum(Var x, std::span<const std::size_t> segment, std::size_t count);

/// Sum of values taken in ascending order (values are reordered in place).
double sorted_sum(std::span<double> values);

}  // namespace aesmpn::numerics
