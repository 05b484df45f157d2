#include "aisf/models/networks.hpp"

#include "aisf/ops.hpp"

namespace aisf::models {

namespace {

nn::RecurrentConfig rnn_config(const BlockConfig& b, nn::RnnKind kind, std::size_t input)
{
    return nn::RecurrentConfig{kind, input, b.hidden_size, b.num_layers, b.bidirectional};
}

template <typename... Layers>
std::vector<Parameter*> gather(Layers&... layers)
{
    std::vector<Parameter*> out;
    (
        [&] {
            for (Parameter* p : layers.parameters()) {
                out.push_back(p);
            }
        }(),
        ...);
    return out;
}

nn::RnnKind baseline_rnn(ForecasterKind kind)
{
    switch (kind) {
    case ForecasterKind::kElman: return nn::RnnKind::kElman;
    case ForecasterKind::kGru: return nn::RnnKind::kGru;
    default: return nn::RnnKind::kLstm;
    }
}

}  // namespace

// ---- proposed -------------------------------------------------------------

ProposedNet::ProposedNet(const ModelConfig& c)
  : NeuralForecaster(c)
  , alpha_conv("alpha.conv", c.window, c.block.conv_out_channels, c.block.isolate_variables ? 1 : c.block.kernel)
  , alpha_rnn("alpha.rnn", rnn_config(c.block, c.block.rnn, c.block.conv_out_channels))
  , alpha_decoder("alpha.decoder", alpha_rnn.output_size(), c.window)
  , omega_conv("omega.conv", c.variables, c.block.conv_out_channels, c.block.kernel)
  , omega_rnn("omega.rnn", rnn_config(c.block, c.block.rnn, c.block.conv_out_channels))
  , omega_decoder("omega.decoder", omega_rnn.output_size(), c.horizon * c.variables)
  , shortcut("shortcut", c.window * c.variables, c.horizon * c.variables)
{ }

void ProposedNet::init(Rng& rng)
{
    alpha_conv.init(rng);
    alpha_rnn.init(rng);
    alpha_decoder.init(rng);
    omega_conv.init(rng);
    omega_rnn.init(rng);
    omega_decoder.init(rng);
    shortcut.init(rng);
}

std::vector<Parameter*> ProposedNet::parameters()
{
    return gather(alpha_conv, alpha_rnn, alpha_decoder, omega_conv, omega_rnn, omega_decoder, shortcut);
}

Var ProposedNet::forward(Tape& tape, Var x, nn::Mode mode, Rng& dropout_rng)
{
    check_input(x.shape());
    const ModelConfig& c = config();
    const std::size_t batch = x.shape()[0];

    // Block alpha: w channels over m variables -> (B, m, w).
    Var a = alpha_conv.forward(tape, x);                 // (B, O, m)
    a = op::swap_last(a);                                // (B, m, O)
    a = alpha_rnn.forward(tape, a, true);                // (B, m, H)
    a = alpha_decoder.forward(tape, a);                  // (B, m, w)
    a = op::relu(a);
    a = nn::dropout(a, nn::DropoutSpec{c.block.dropout_p, mode}, dropout_rng);

    // Block omega: m channels over w steps -> (B, s*m).
    Var o = omega_conv.forward(tape, a);                 // (B, O, w)
    o = op::swap_last(o);                                // (B, w, O)
    o = omega_rnn.forward(tape, o, false);               // (B, H)
    o = omega_decoder.forward(tape, o);                  // (B, s*m)

    Var ar = shortcut.forward(tape, op::reshape(x, {batch, c.window * c.variables}));
    return op::reshape(op::add(ar, o), {batch, c.horizon, c.variables});
}

// ---- feed-forward ---------------------------------------------------------

FeedForwardNet::FeedForwardNet(const ModelConfig& c)
  : NeuralForecaster(c)
  , hidden("ff.hidden", c.window * c.variables, c.ff_hidden)
  , output("ff.output", c.ff_hidden, c.horizon * c.variables)
{ }

void FeedForwardNet::init(Rng& rng)
{
    hidden.init(rng);
    output.init(rng);
}

std::vector<Parameter*> FeedForwardNet::parameters()
{
    return gather(hidden, output);
}

Var FeedForwardNet::forward(Tape& tape, Var x, nn::Mode mode, Rng& dropout_rng)
{
    check_input(x.shape());
    const ModelConfig& c = config();
    const std::size_t batch = x.shape()[0];
    Var h = hidden.forward(tape, op::reshape(x, {batch, c.window * c.variables}));
    h = nn::dropout(op::relu(h), nn::DropoutSpec{c.block.dropout_p, mode}, dropout_rng);
    return op::reshape(output.forward(tape, h), {batch, c.horizon, c.variables});
}

// ---- recurrent baselines --------------------------------------------------

RnnBaseline::RnnBaseline(const ModelConfig& c)
  : NeuralForecaster(c)
  , rnn("rnn", rnn_config(c.block, baseline_rnn(c.kind), c.variables))
  , output("rnn.output", rnn.output_size(), c.horizon * c.variables)
{ }

void RnnBaseline::init(Rng& rng)
{
    rnn.init(rng);
    output.init(rng);
}

std::vector<Parameter*> RnnBaseline::parameters()
{
    return gather(rnn, output);
}

Var RnnBaseline::forward(Tape& tape, Var x, nn::Mode, Rng&)
{
    check_input(x.shape());
    const ModelConfig& c = config();
    const std::size_t batch = x.shape()[0];
    Var h = rnn.forward(tape, x, false);
    return op::reshape(output.forward(tape, h), {batch, c.horizon, c.variables});
}

// ---- temporal CNN ---------------------------------------------------------

FcCnnNet::FcCnnNet(const ModelConfig& c)
  : NeuralForecaster(c)
  , conv("cnn.conv", c.window, c.block.conv_out_channels, c.block.kernel)
  , output("cnn.output", c.block.conv_out_channels * c.variables, c.horizon * c.variables)
{ }

void FcCnnNet::init(Rng& rng)
{
    conv.init(rng);
    output.init(rng);
}

std::vector<Parameter*> FcCnnNet::parameters()
{
    return gather(conv, output);
}

Var FcCnnNet::forward(Tape& tape, Var x, nn::Mode, Rng&)
{
    check_input(x.shape());
    const ModelConfig& c = config();
    const std::size_t batch = x.shape()[0];
    Var h = conv.forward(tape, x);  // (B, O, m)
    h = op::reshape(h, {batch, c.block.conv_out_channels * c.variables});
    return op::reshape(output.forward(tape, h), {batch, c.horizon, c.variables});
}

}  // namespace aisf::models
