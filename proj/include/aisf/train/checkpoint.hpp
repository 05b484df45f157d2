#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "aisf/data/scaler.hpp"
#include "aisf/models/forecaster.hpp"

namespace aisf::train {

inline constexpr const char* kCheckpointFormat = "aisf-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct StoredTensor {
    std::string name;
    Tensor value;
};

/// Everything needed to rebuild a trained forecaster and its data transform.
struct Checkpoint {
    models::ModelConfig model;
    std::uint64_t seed = 0;
    double test_fraction = 0.2;
    std::size_t windows_per_vessel = 25;
    data::Scaler scaler;
    std::vector<StoredTensor> parameters;
};

nlohmann::json to_json(const models::ModelConfig& cfg);
models::ModelConfig model_config_from_json(const nlohmann::json& j);

/// Captures the model's current parameter values.
Checkpoint make_checkpoint(const models::Forecaster& model, const data::Scaler& scaler, std::uint64_t seed,
                           double test_fraction, std::size_t windows_per_vessel);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws FormatError on unreadable files, a foreign format or an unsupported version.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Builds the stored model and copies the parameters in. Throws DimensionError
/// when a stored tensor's name or shape does not match the rebuilt model.
std::unique_ptr<models::Forecaster> restore_model(const Checkpoint& ckpt);

}  // namespace aisf::train
