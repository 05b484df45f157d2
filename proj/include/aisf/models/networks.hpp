#pragma once

#include "aisf/models/forecaster.hpp"
#include "aisf/nn/layers.hpp"
#include "aisf/nn/recurrent.hpp"

namespace aisf::models {

/// Two stacked conv/recurrent/decoder blocks plus a linear input->output shortcut.
///
/// Block alpha reads the window as w channels over the m variables, runs the
/// recurrent encoder along the variable axis and decodes every position back
/// to w values (ReLU, dropout), giving a (B, m, w) tensor. Block omega reads
/// that tensor as m channels over w steps, encodes it and linearly decodes the
/// final state to s*m values. The shortcut maps the flattened window to the
/// flattened horizon and is added to block omega's output.
class ProposedNet : public NeuralForecaster {
public:
    explicit ProposedNet(const ModelConfig& config);

    void init(Rng& rng) override;
    Var forward(Tape& tape, Var x, nn::Mode mode, Rng& dropout_rng) override;
    std::vector<Parameter*> parameters() override;

    nn::Conv1d alpha_conv;
    nn::RecurrentLayer alpha_rnn;
    nn::Linear alpha_decoder;
    nn::Conv1d omega_conv;
    nn::RecurrentLayer omega_rnn;
    nn::Linear omega_decoder;
    nn::Linear shortcut;
};

/// flatten -> Linear(w*m, hidden) -> ReLU -> dropout -> Linear(hidden, s*m)
class FeedForwardNet : public NeuralForecaster {
public:
    explicit FeedForwardNet(const ModelConfig& config);

    void init(Rng& rng) override;
    Var forward(Tape& tape, Var x, nn::Mode mode, Rng& dropout_rng) override;
    std::vector<Parameter*> parameters() override;

    nn::Linear hidden;
    nn::Linear output;
};

/// Recurrent pass over the (B, w, m) window; final state -> Linear(s*m).
class RnnBaseline : public NeuralForecaster {
public:
    explicit RnnBaseline(const ModelConfig& config);

    void init(Rng& rng) override;
    Var forward(Tape& tape, Var x, nn::Mode mode, Rng& dropout_rng) override;
    std::vector<Parameter*> parameters() override;

    nn::RecurrentLayer rnn;
    nn::Linear output;
};

/// Conv over the variables with w input channels, flatten, Linear(s*m).
class FcCnnNet : public NeuralForecaster {
public:
    explicit FcCnnNet(const ModelConfig& config);

    void init(Rng& rng) override;
    Var forward(Tape& tape, Var x, nn::Mode mode, Rng& dropout_rng) override;
    std::vector<Parameter*> parameters() override;

    nn::Conv1d conv;
    nn::Linear output;
};

}  // namespace aisf::models
