#include "aisf/nn/recurrent.hpp"

#include <tuple>

#include "aisf/errors.hpp"
#include "aisf/nn/layers.hpp"
#include "aisf/ops.hpp"

namespace aisf::nn {

std::string_view to_string(RnnKind kind)
{
    switch (kind) {
    case RnnKind::kLstm: return "lstm";
    case RnnKind::kGru: return "gru";
    case RnnKind::kElman: return "elman";
    }
    return "?";
}

RnnKind parse_rnn_kind(std::string_view name)
{
    if (name == "lstm") return RnnKind::kLstm;
    if (name == "gru") return RnnKind::kGru;
    if (name == "elman") return RnnKind::kElman;
    throw ConfigError("unknown recurrent kind '" + std::string(name) + "'");
}

std::size_t gate_count(RnnKind kind)
{
    switch (kind) {
    case RnnKind::kLstm: return 4;
    case RnnKind::kGru: return 3;
    case RnnKind::kElman: return 1;
    }
    return 0;
}

RecurrentCell::RecurrentCell(const std::string& name, RnnKind k, std::size_t in, std::size_t hidden)
  : kind(k)
  , input_size(in)
  , hidden_size(hidden)
{
    if (in == 0 || hidden == 0) {
        throw ConfigError("recurrent cell " + name + " needs positive input and hidden sizes");
    }
    const std::size_t rows = gate_count(k) * hidden;
    w_ih = Parameter(name + ".w_ih", Tensor({rows, in}));
    w_hh = Parameter(name + ".w_hh", Tensor({rows, hidden}));
    b_ih = Parameter(name + ".b_ih", Tensor({rows}));
    if (k != RnnKind::kElman) {
        b_hh = Parameter(name + ".b_hh", Tensor({rows}));
    }
}

void RecurrentCell::init(Rng& rng)
{
    init_uniform(w_ih, input_size, rng);
    init_uniform(w_hh, hidden_size, rng);
    b_ih.value.fill(0.0);
    b_hh.value.fill(0.0);
}

std::vector<Parameter*> RecurrentCell::parameters()
{
    if (kind == RnnKind::kElman) {
        return {&w_ih, &w_hh, &b_ih};
    }
    return {&w_ih, &w_hh, &b_ih, &b_hh};
}

namespace {
Tensor gate_block(const Tensor& packed, std::size_t g, std::size_t hidden)
{
    const std::size_t cols = packed.shape()[1];
    Tensor out({hidden, cols});
    for (std::size_t r = 0; r < hidden; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out.at(r, c) = packed.at(g * hidden + r, c);
        }
    }
    return out;
}
}  // namespace

Tensor RecurrentCell::input_weight(std::size_t g) const
{
    return gate_block(w_ih.value, g, hidden_size);
}

Tensor RecurrentCell::hidden_weight(std::size_t g) const
{
    return gate_block(w_hh.value, g, hidden_size);
}

BoundCell bind(Tape& tape, RecurrentCell& cell)
{
    BoundCell b{cell.kind, cell.hidden_size, tape.parameter(cell.w_ih), tape.parameter(cell.w_hh),
                tape.parameter(cell.b_ih), Var{}};
    if (cell.kind != RnnKind::kElman) {
        b.b_hh = tape.parameter(cell.b_hh);
    }
    return b;
}

namespace {

std::pair<Var, Var> lstm_gates(Var x_proj, Var h_prev, Var c_prev, const BoundCell& cell)
{
    const std::size_t h = cell.hidden;
    Var pre = op::add(x_proj, op::linear(h_prev, cell.w_hh, cell.b_hh));
    Var i = op::sigmoid(op::slice_cols(pre, 0, h));
    Var f = op::sigmoid(op::slice_cols(pre, h, h));
    Var g = op::tanh(op::slice_cols(pre, 2 * h, h));
    Var o = op::sigmoid(op::slice_cols(pre, 3 * h, h));
    Var c = op::add(op::mul(f, c_prev), op::mul(i, g));
    Var hn = op::mul(o, op::tanh(c));
    return {hn, c};
}

Var gru_gates(Var x_proj, Var h_prev, const BoundCell& cell)
{
    const std::size_t h = cell.hidden;
    Var hp = op::linear(h_prev, cell.w_hh, cell.b_hh);
    Var r = op::sigmoid(op::add(op::slice_cols(x_proj, 0, h), op::slice_cols(hp, 0, h)));
    Var z = op::sigmoid(op::add(op::slice_cols(x_proj, h, h), op::slice_cols(hp, h, h)));
    Var n = op::tanh(op::add(op::slice_cols(x_proj, 2 * h, h), op::mul(r, op::slice_cols(hp, 2 * h, h))));
    return op::add(n, op::mul(z, op::sub(h_prev, n)));
}

Var elman_gates(Var x_proj, Var h_prev, const BoundCell& cell)
{
    return op::tanh(op::add(x_proj, op::linear(h_prev, cell.w_hh)));
}

void check_step_shapes(Var x_t, Var h_prev, const BoundCell& cell)
{
    const Shape& xs = x_t.shape();
    const Shape& hs = h_prev.shape();
    const std::size_t f = cell.w_ih.shape()[1];
    if (xs.size() != 2 || xs[1] != f || hs != Shape{xs[0], cell.hidden}) {
        throw DimensionError("recurrent step: x " + shape_str(xs) + " / h " + shape_str(hs)
                             + " inconsistent with input size " + std::to_string(f) + " and hidden size "
                             + std::to_string(cell.hidden));
    }
}

}  // namespace

std::pair<Var, Var> lstm_step(Var x_t, Var h_prev, Var c_prev, const BoundCell& cell)
{
    check_step_shapes(x_t, h_prev, cell);
    if (c_prev.shape() != h_prev.shape()) {
        throw DimensionError("lstm_step: cell state " + shape_str(c_prev.shape()) + " vs hidden "
                             + shape_str(h_prev.shape()));
    }
    return lstm_gates(op::linear(x_t, cell.w_ih, cell.b_ih), h_prev, c_prev, cell);
}

Var gru_step(Var x_t, Var h_prev, const BoundCell& cell)
{
    check_step_shapes(x_t, h_prev, cell);
    return gru_gates(op::linear(x_t, cell.w_ih, cell.b_ih), h_prev, cell);
}

Var elman_step(Var x_t, Var h_prev, const BoundCell& cell)
{
    check_step_shapes(x_t, h_prev, cell);
    return elman_gates(op::linear(x_t, cell.w_ih, cell.b_ih), h_prev, cell);
}

RecurrentLayer::RecurrentLayer(const std::string& name, const RecurrentConfig& config)
  : config_(config)
{
    if (config.num_layers < 1 || config.num_layers > 3) {
        throw ConfigError("recurrent layer " + name + ": num_layers must be 1, 2 or 3");
    }
    const std::size_t dirs = config.bidirectional ? 2 : 1;
    for (std::size_t l = 0; l < config.num_layers; ++l) {
        const std::size_t in = l == 0 ? config.input_size : config.hidden_size * dirs;
        for (std::size_t d = 0; d < dirs; ++d) {
            const std::string cell_name = name + ".l" + std::to_string(l) + (d ? "_reverse" : "");
            cells_.emplace_back(cell_name, config.kind, in, config.hidden_size);
        }
    }
}

void RecurrentLayer::init(Rng& rng)
{
    for (auto& c : cells_) {
        c.init(rng);
    }
}

std::vector<Parameter*> RecurrentLayer::parameters()
{
    std::vector<Parameter*> out;
    for (auto& c : cells_) {
        for (Parameter* p : c.parameters()) {
            out.push_back(p);
        }
    }
    return out;
}

std::vector<Var> RecurrentLayer::run_direction(Tape& tape, RecurrentCell& cell, Var x, bool reverse)
{
    const std::size_t batch = x.shape()[0], steps = x.shape()[1];
    const BoundCell bc = bind(tape, cell);
    // Input projections for every step at once.
    Var proj = op::linear(x, bc.w_ih, bc.b_ih);
    Var h = tape.constant(Tensor({batch, cell.hidden_size}));
    Var c = h;
    std::vector<Var> out(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const std::size_t t = reverse ? steps - 1 - k : k;
        Var xp = op::select_step(proj, t);
        switch (cell.kind) {
        case RnnKind::kLstm: std::tie(h, c) = lstm_gates(xp, h, c, bc); break;
        case RnnKind::kGru: h = gru_gates(xp, h, bc); break;
        case RnnKind::kElman: h = elman_gates(xp, h, bc); break;
        }
        out[t] = h;
    }
    return out;
}

Var RecurrentLayer::forward(Tape& tape, Var x, bool return_sequence)
{
    const Shape& xs = x.shape();
    if (xs.size() != 3 || xs[2] != config_.input_size) {
        throw DimensionError("recurrent forward: expected (B,T," + std::to_string(config_.input_size) + "), got "
                             + shape_str(xs));
    }
    if (xs[1] == 0) {
        throw DimensionError("recurrent forward: sequence length must be at least 1");
    }
    const std::size_t dirs = config_.bidirectional ? 2 : 1;
    const std::size_t steps = xs[1];
    Var seq = x;
    for (std::size_t l = 0; l < config_.num_layers; ++l) {
        std::vector<Var> fwd = run_direction(tape, cells_[l * dirs], seq, false);
        std::vector<Var> bwd;
        if (dirs == 2) {
            bwd = run_direction(tape, cells_[l * dirs + 1], seq, true);
        }
        const bool last = l + 1 == config_.num_layers;
        if (last && !return_sequence) {
            if (dirs == 1) {
                return fwd[steps - 1];
            }
            return op::concat_cols({fwd[steps - 1], bwd[0]});
        }
        if (dirs == 1) {
            seq = op::stack_steps(fwd);
        } else {
            std::vector<Var> merged(steps);
            for (std::size_t t = 0; t < steps; ++t) {
                merged[t] = op::concat_cols({fwd[t], bwd[t]});
            }
            seq = op::stack_steps(merged);
        }
    }
    return seq;
}

}  // namespace aisf::nn
