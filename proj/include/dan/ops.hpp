#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dan/tensor.hpp"

namespace dan {

// Differentiable primitives. Every op throws DimensionError on shape misuse.

// [m x k] . [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);

// Batched product over the leading axis: [B x m x k] . [B x k x n], or
// [B x m x k] . [B x n x k]^T when transpose_b is set.
Tensor bmm(const Tensor& a, const Tensor& b, bool transpose_b = false);

Tensor transpose(const Tensor& a);

enum class Pointwise { Sigmoid, Tanh, Add, Mul };

Tensor pointwise(const Tensor& x, Pointwise f);
Tensor pointwise(const Tensor& x, const Tensor& y, Pointwise f);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

// x[..., n] + bias[n], broadcast over the leading axes.
Tensor add_bias(const Tensor& x, const Tensor& bias);

Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
// Index `index` along `axis`, dropping that axis.
Tensor select(const Tensor& x, std::size_t axis, std::size_t index);
// Stacks equal-shape tensors along a new axis.
Tensor stack(std::span<const Tensor> parts, std::size_t axis);
Tensor reshape(const Tensor& x, Shape shape);
// Inserts a new axis of extent `count` at `axis`; every copy is the same node,
// so the backward rule sums the copies' gradients.
Tensor repeat_axis(const Tensor& x, std::size_t axis, std::size_t count);

// Softmax over the last axis with max-subtraction.
Tensor softmax_rows(const Tensor& x);
// Softmax over the last axis where entries with mask 0 get weight exactly 0.
// `mask` has the shape of x without its second-to-last axis (or [n] for a
// rank-2 x). A row whose entries are all masked falls back to a plain softmax.
Tensor masked_softmax_rows(const Tensor& x, const Tensor& mask);

constexpr double kLogClamp = 1e-12;

// -sum_t sum_l mask_t * y_{t,l} * log(max(p_{t,l}, kLogClamp)). The last axis
// of p and y is the label axis; mask has the remaining shape.
Tensor cross_entropy(const Tensor& p, const Tensor& y_onehot, const Tensor& mask);

Tensor sum(const Tensor& x);

// Gathers columns of a [d x V] table: result row i is column indices[i].
Tensor gather_columns(const Tensor& table, std::span<const std::int32_t> indices);

}  // namespace dan
