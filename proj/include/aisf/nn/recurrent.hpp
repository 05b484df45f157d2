#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aisf/autograd.hpp"
#include "aisf/rng.hpp"

namespace aisf::nn {

enum class RnnKind { kLstm, kGru, kElman };

std::string_view to_string(RnnKind kind);
RnnKind parse_rnn_kind(std::string_view name);
/// Number of stacked gate blocks in the packed weights (LSTM 4, GRU 3, Elman 1).
std::size_t gate_count(RnnKind kind);

enum class LstmGate { kInput = 0, kForget = 1, kCell = 2, kOutput = 3 };
enum class GruGate { kReset = 0, kUpdate = 1, kNew = 2 };

/// Weights of one direction of one recurrent layer.
///
/// Gate matrices are packed row-wise, so rows [g*H, (g+1)*H) of `w_ih` hold
/// the input weights of gate g (W_ii, W_if, W_ig, W_io for an LSTM; W_ir,
/// W_iz, W_in for a GRU). Both bias vectors are kept for LSTM and GRU; the
/// Elman cell has a single bias and leaves `b_hh` empty.
struct RecurrentCell {
    RnnKind kind = RnnKind::kLstm;
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
    Parameter w_ih;  // (G*H, F)
    Parameter w_hh;  // (G*H, H)
    Parameter b_ih;  // (G*H)
    Parameter b_hh;  // (G*H), absent for Elman

    RecurrentCell() = default;
    RecurrentCell(const std::string& name, RnnKind kind, std::size_t input_size, std::size_t hidden_size);

    void init(Rng& rng);
    std::vector<Parameter*> parameters();

    /// Copy of the (H, F) input weight block of gate `g`.
    [[nodiscard]] Tensor input_weight(std::size_t g) const;
    [[nodiscard]] Tensor hidden_weight(std::size_t g) const;
};

/// Cell parameters bound to a tape for one forward pass.
struct BoundCell {
    RnnKind kind;
    std::size_t hidden;
    Var w_ih, w_hh, b_ih, b_hh;
};

BoundCell bind(Tape& tape, RecurrentCell& cell);

/// One LSTM step. x_t (B, F), h_prev/c_prev (B, H) -> (h_t, c_t).
std::pair<Var, Var> lstm_step(Var x_t, Var h_prev, Var c_prev, const BoundCell& cell);
/// One GRU step: r, z gates; n = tanh(W_in x + b_in + r*(W_hn h + b_hn)); h = (1-z)*n + z*h_prev.
Var gru_step(Var x_t, Var h_prev, const BoundCell& cell);
/// One Elman step: h = tanh(W_x x + b + W_h h_prev).
Var elman_step(Var x_t, Var h_prev, const BoundCell& cell);

struct RecurrentConfig {
    RnnKind kind = RnnKind::kLstm;
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
    std::size_t num_layers = 1;
    bool bidirectional = false;
};

/// Stacked, optionally bidirectional recurrent layer with zero initial state.
class RecurrentLayer {
public:
    RecurrentLayer() = default;
    RecurrentLayer(const std::string& name, const RecurrentConfig& config);

    void init(Rng& rng);

    /// x (B, T, F). Returns (B, T, D*H) when `return_sequence`, else (B, D*H)
    /// where D = 2 for bidirectional layers. The non-sequence output is the
    /// final forward state concatenated with the backward state after it has
    /// consumed the whole sequence (i.e. at t = 0).
    Var forward(Tape& tape, Var x, bool return_sequence);

    [[nodiscard]] const RecurrentConfig& config() const { return config_; }
    [[nodiscard]] std::size_t output_size() const
    {
        return config_.hidden_size * (config_.bidirectional ? 2 : 1);
    }
    std::vector<Parameter*> parameters();
    /// cells()[layer * D + direction]
    std::vector<RecurrentCell>& cells() { return cells_; }

private:
    std::vector<Var> run_direction(Tape& tape, RecurrentCell& cell, Var x, bool reverse);

    RecurrentConfig config_;
    std::vector<RecurrentCell> cells_;
};

}  // namespace aisf::nn
