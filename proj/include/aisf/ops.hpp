#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aisf/autograd.hpp"
#include "aisf/tensor.hpp"

/// Differentiable primitives over Tape nodes. Each records its own gradient
/// rule; composite layers are built from these.
namespace aisf::op {

/// (p x q) . (q x r) -> (p x r).
Var matmul(Var a, Var b);

/// x . W^T + b over the last axis of x: (..., in) -> (..., out).
/// `weight` is (out x in); `bias` is (out).
Var linear(Var x, Var weight, Var bias);
Var linear(Var x, Var weight);

/// Stride-1 cross-correlation with (k-1)/2 zero padding on both ends.
/// input (B, Cin, L), weight (Cout, Cin, k) with k odd, bias (Cout) -> (B, Cout, L).
Var crosscorr1d(Var input, Var weight, Var bias);

Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Hadamard product.
Var mul(Var a, Var b);
Var scale(Var a, double s);

Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);

/// Sum / mean of all elements -> scalar.
Var sum(Var a);
Var mean(Var a);

Var reshape(Var a, Shape shape);
/// (A, B, C) -> (A, C, B), copying.
Var swap_last(Var a);

/// x[:, t, :] for x of shape (B, T, F) -> (B, F).
Var select_step(Var x, std::size_t t);
/// Stacks equally shaped (B, F) nodes along a new axis 1 -> (B, T, F).
Var stack_steps(const std::vector<Var>& steps);
/// Columns [start, start + len) of a (N, C) node.
Var slice_cols(Var x, std::size_t start, std::size_t len);
/// Concatenates (N, Ci) nodes along the columns.
Var concat_cols(const std::vector<Var>& parts);

/// x * scale[j] + shift[j] where j indexes the last axis.
Var affine_last(Var x, std::span<const double> scale, std::span<const double> shift);
/// Clamp per last-axis column to [lo[j], hi[j]]; gradient is zero where clamped.
Var clamp_last(Var x, std::span<const double> lo, std::span<const double> hi);

}  // namespace aisf::op
