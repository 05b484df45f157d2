#pragma once

#include "aisf/nn/recurrent.hpp"
#include "aisf/tensor.hpp"

/// Plain-loop forward passes and hand-derived backward passes for the
/// parameterized layers. These do not touch the tape; the gradient-check
/// suite compares them against tape gradients as a second derivation.
namespace aisf::nn::reference {

struct LinearGrads {
    Tensor dx, dw, db;
};

/// x (N, in), w (out, in), b (out) -> (N, out)
Tensor linear_forward(const Tensor& x, const Tensor& w, const Tensor& b);
LinearGrads linear_backward(const Tensor& x, const Tensor& w, const Tensor& gy);

struct ConvGrads {
    Tensor dx, dw, db;
};

/// x (B, Cin, L), w (Cout, Cin, k), b (Cout) -> (B, Cout, L)
Tensor conv1d_forward(const Tensor& x, const Tensor& w, const Tensor& b);
ConvGrads conv1d_backward(const Tensor& x, const Tensor& w, const Tensor& gy);

struct CellGrads {
    Tensor dx, dw_ih, dw_hh, db_ih, db_hh;
};

/// Single-direction pass from a zero state. x (B, T, F) -> hidden sequence (B, T, H).
Tensor recurrent_forward(const RecurrentCell& cell, const Tensor& x);
/// Backpropagation through time given dLoss/dh for every step (B, T, H).
CellGrads recurrent_backward(const RecurrentCell& cell, const Tensor& x, const Tensor& d_hseq);

}  // namespace aisf::nn::reference
