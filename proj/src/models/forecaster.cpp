#include "aisf/models/forecaster.hpp"

#include "aisf/errors.hpp"
#include "aisf/models/baselines.hpp"
#include "aisf/models/networks.hpp"

namespace aisf::models {

std::string_view to_string(ForecasterKind kind)
{
    switch (kind) {
    case ForecasterKind::kProposed: return "proposed";
    case ForecasterKind::kFeedForward: return "feed_forward";
    case ForecasterKind::kElman: return "elman";
    case ForecasterKind::kGru: return "gru";
    case ForecasterKind::kLstm: return "lstm";
    case ForecasterKind::kFcCnn: return "fc_cnn";
    case ForecasterKind::kControl: return "control";
    case ForecasterKind::kChainLinear: return "chain";
    }
    return "?";
}

ForecasterKind parse_kind(std::string_view name)
{
    for (auto k : {ForecasterKind::kProposed, ForecasterKind::kFeedForward, ForecasterKind::kElman,
                   ForecasterKind::kGru, ForecasterKind::kLstm, ForecasterKind::kFcCnn, ForecasterKind::kControl,
                   ForecasterKind::kChainLinear}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

void ModelConfig::validate() const
{
    if (window < 1 || horizon < 1 || variables < 1) {
        throw ConfigError("window, horizon and variable count must all be >= 1");
    }
    if (block.conv_out_channels < 1 || block.hidden_size < 1) {
        throw ConfigError("conv_out_channels and hidden_size must be >= 1");
    }
    if (block.kernel % 2 == 0) {
        throw ConfigError("kernel size must be odd");
    }
    if (block.num_layers < 1 || block.num_layers > 3) {
        throw ConfigError("num_layers must be 1, 2 or 3");
    }
    if (!(block.dropout_p >= 0.0 && block.dropout_p < 1.0)) {
        throw ConfigError("dropout probability must be in [0, 1)");
    }
}

Forecaster::Forecaster(ModelConfig config)
  : config_(std::move(config))
{
    config_.validate();
}

std::vector<const Parameter*> Forecaster::parameters_const() const
{
    std::vector<const Parameter*> out;
    for (Parameter* p : const_cast<Forecaster*>(this)->parameters()) {
        out.push_back(p);
    }
    return out;
}

void Forecaster::check_input(const Shape& shape) const
{
    if (shape.size() != 3 || shape[1] != config_.window || shape[2] != config_.variables) {
        throw DimensionError("forecaster expects (B," + std::to_string(config_.window) + ","
                             + std::to_string(config_.variables) + ") input, got " + shape_str(shape));
    }
}

Tensor NeuralForecaster::predict(const Tensor& x)
{
    Tape tape;
    Rng unused(0);
    return forward(tape, tape.constant(x), nn::Mode::kEval, unused).value();
}

std::unique_ptr<Forecaster> make_forecaster(const ModelConfig& config, Rng& init_rng)
{
    std::unique_ptr<NeuralForecaster> net;
    switch (config.kind) {
    case ForecasterKind::kControl: return std::make_unique<ControlModel>(config);
    case ForecasterKind::kChainLinear: return std::make_unique<ChainModel>(config);
    case ForecasterKind::kProposed: net = std::make_unique<ProposedNet>(config); break;
    case ForecasterKind::kFeedForward: net = std::make_unique<FeedForwardNet>(config); break;
    case ForecasterKind::kFcCnn: net = std::make_unique<FcCnnNet>(config); break;
    case ForecasterKind::kElman:
    case ForecasterKind::kGru:
    case ForecasterKind::kLstm: net = std::make_unique<RnnBaseline>(config); break;
    }
    net->init(init_rng);
    return net;
}

void copy_parameters(const std::vector<Parameter*>& dst, const std::vector<const Parameter*>& src)
{
    if (dst.size() != src.size()) {
        throw DimensionError("parameter count mismatch: " + std::to_string(dst.size()) + " vs "
                             + std::to_string(src.size()));
    }
    for (std::size_t i = 0; i < dst.size(); ++i) {
        if (dst[i]->value.shape() != src[i]->value.shape()) {
            throw DimensionError("parameter " + dst[i]->name + " has shape " + shape_str(dst[i]->value.shape())
                                 + ", source has " + shape_str(src[i]->value.shape()));
        }
        dst[i]->value = src[i]->value;
    }
}

}  // namespace aisf::models
