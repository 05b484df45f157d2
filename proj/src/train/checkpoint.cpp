#include "aisf/train/checkpoint.hpp"

#include <fstream>

#include "aisf/errors.hpp"
#include "aisf/rng.hpp"

namespace aisf::train {

using nlohmann::json;

json to_json(const models::ModelConfig& cfg)
{
    const auto& b = cfg.block;
    return {{"kind", models::to_string(cfg.kind)},
            {"window", cfg.window},
            {"horizon", cfg.horizon},
            {"variables", cfg.variables},
            {"ff_hidden", cfg.ff_hidden},
            {"block",
             {{"conv_out_channels", b.conv_out_channels},
              {"kernel", b.kernel},
              {"hidden_size", b.hidden_size},
              {"rnn", nn::to_string(b.rnn)},
              {"num_layers", b.num_layers},
              {"bidirectional", b.bidirectional},
              {"dropout_p", b.dropout_p},
              {"isolate_variables", b.isolate_variables}}}};
}

models::ModelConfig model_config_from_json(const json& j)
{
    try {
        models::ModelConfig cfg;
        cfg.kind = models::parse_kind(j.at("kind").get<std::string>());
        cfg.window = j.at("window").get<std::size_t>();
        cfg.horizon = j.at("horizon").get<std::size_t>();
        cfg.variables = j.at("variables").get<std::size_t>();
        cfg.ff_hidden = j.at("ff_hidden").get<std::size_t>();
        const json& b = j.at("block");
        cfg.block.conv_out_channels = b.at("conv_out_channels").get<std::size_t>();
        cfg.block.kernel = b.at("kernel").get<std::size_t>();
        cfg.block.hidden_size = b.at("hidden_size").get<std::size_t>();
        cfg.block.rnn = nn::parse_rnn_kind(b.at("rnn").get<std::string>());
        cfg.block.num_layers = b.at("num_layers").get<std::size_t>();
        cfg.block.bidirectional = b.at("bidirectional").get<bool>();
        cfg.block.dropout_p = b.at("dropout_p").get<double>();
        cfg.block.isolate_variables = b.at("isolate_variables").get<bool>();
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid model config in checkpoint: ") + e.what());
    }
}

Checkpoint make_checkpoint(const models::Forecaster& model, const data::Scaler& scaler, std::uint64_t seed,
                           double test_fraction, std::size_t windows_per_vessel)
{
    Checkpoint c;
    c.model = model.config();
    c.seed = seed;
    c.test_fraction = test_fraction;
    c.windows_per_vessel = windows_per_vessel;
    c.scaler = scaler;
    for (const Parameter* p : model.parameters_const()) {
        c.parameters.push_back({p->name, p->value});
    }
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt)
{
    json params = json::array();
    for (const auto& p : ckpt.parameters) {
        params.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"data", p.value.values()}});
    }
    const json j{{"format", kCheckpointFormat},
                 {"version", kCheckpointVersion},
                 {"model", to_json(ckpt.model)},
                 {"seed", ckpt.seed},
                 {"test_fraction", ckpt.test_fraction},
                 {"windows_per_vessel", ckpt.windows_per_vessel},
                 {"scaler",
                  {{"mean", ckpt.scaler.mean()},
                   {"std", ckpt.scaler.stddev()},
                   {"zmin", ckpt.scaler.zmin()},
                   {"zmax", ckpt.scaler.zmax()}}},
                 {"parameters", params}};
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot write checkpoint " + path.string());
    }
    out << j.dump() << '\n';
    if (!out) {
        throw FormatError("failed writing checkpoint " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open checkpoint " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!j.is_object() || j.value("format", std::string()) != kCheckpointFormat) {
        throw FormatError(path.string() + " is not a forecaster checkpoint");
    }
    const int version = j.value("version", -1);
    if (version != kCheckpointVersion) {
        throw FormatError("checkpoint version " + std::to_string(version) + " is not supported (expected "
                          + std::to_string(kCheckpointVersion) + ")");
    }
    try {
        Checkpoint c;
        c.model = model_config_from_json(j.at("model"));
        c.seed = j.at("seed").get<std::uint64_t>();
        c.test_fraction = j.at("test_fraction").get<double>();
        c.windows_per_vessel = j.at("windows_per_vessel").get<std::size_t>();
        const json& s = j.at("scaler");
        c.scaler = data::Scaler(s.at("mean").get<std::vector<double>>(), s.at("std").get<std::vector<double>>(),
                                s.at("zmin").get<std::vector<double>>(), s.at("zmax").get<std::vector<double>>());
        for (const json& p : j.at("parameters")) {
            c.parameters.push_back({p.at("name").get<std::string>(),
                                    Tensor(p.at("shape").get<Shape>(), p.at("data").get<std::vector<double>>())});
        }
        return c;
    } catch (const json::exception& e) {
        throw FormatError("malformed checkpoint " + path.string() + ": " + e.what());
    }
}

std::unique_ptr<models::Forecaster> restore_model(const Checkpoint& ckpt)
{
    Rng unused(0);
    auto model = models::make_forecaster(ckpt.model, unused);
    std::vector<Parameter*> params = model->parameters();
    if (params.size() != ckpt.parameters.size()) {
        throw DimensionError("checkpoint stores " + std::to_string(ckpt.parameters.size()) + " tensors, model has "
                             + std::to_string(params.size()));
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        const auto& stored = ckpt.parameters[k];
        if (stored.name != params[k]->name || stored.value.shape() != params[k]->value.shape()) {
            throw DimensionError("checkpoint tensor '" + stored.name + "' " + shape_str(stored.value.shape())
                                 + " does not match model tensor '" + params[k]->name + "' "
                                 + shape_str(params[k]->value.shape()));
        }
        params[k]->value = stored.value;
        params[k]->zero_grad();
    }
    model->on_parameters_loaded();
    return model;
}

}  // namespace aisf::train
