#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aisf/data/ais.hpp"
#include "aisf/data/scaler.hpp"
#include "aisf/data/windows.hpp"
#include "aisf/models/forecaster.hpp"
#include "aisf/train/metrics.hpp"
#include "aisf/train/trainer.hpp"

namespace aisf::experiment {

struct Regime {
    std::size_t window;
    std::size_t horizon;
};

/// low (15, 5), medium (15, 25), high (30, 50). Throws ConfigError otherwise.
Regime regime_preset(std::string_view name);

struct RunSpec {
    models::ModelConfig model;
    train::TrainConfig train;
    std::size_t windows_per_vessel = data::kDefaultWindowsPerVessel;
    double test_fraction = 0.2;
};

struct PreparedData {
    std::vector<data::WindowSample> train;
    std::vector<data::WindowSample> test;
    data::Scaler scaler;
    std::vector<std::pair<std::string, std::string>> skipped;
};

/// Windows, split and scaler for one seed. Window sampling and the split draw
/// from the seed's own streams. Throws DataError naming the minimum trajectory
/// length w + s when no vessel is long enough.
PreparedData prepare_data(const data::TrajectoryNetwork& network, std::size_t window, std::size_t horizon,
                          std::size_t windows_per_vessel, double test_fraction, std::uint64_t seed);

struct RunOutput {
    std::uint64_t seed = 0;
    std::unique_ptr<models::Forecaster> model;
    data::Scaler scaler;
    /// Empty for models without gradient training.
    std::vector<train::EpochRecord> epochs;
    std::size_t best_epoch = 0;
    train::MetricReport test_report;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
};

/// Prepares data and fits, trains or simply evaluates the model for `spec.train.seed`.
RunOutput run(const data::TrajectoryNetwork& network, const RunSpec& spec, const train::EpochCallback& on_epoch = {});

/// Same spec for each seed, at most `max_threads` at a time. Results follow `seeds` order.
std::vector<RunOutput> run_seeds(const data::TrajectoryNetwork& network, const RunSpec& spec,
                                 std::span<const std::uint64_t> seeds, std::size_t max_threads);

/// Thread cap from AISF_THREADS, else the hardware concurrency (at least 1).
std::size_t thread_cap();

struct Summary {
    double mean = 0.0;
    /// Sample standard deviation (0 for a single run).
    double stddev = 0.0;
};

/// mean +- std for hte, mae, huber, rmse and rpd across runs.
nlohmann::json aggregate(std::span<const RunOutput> runs);
Summary summarize(std::span<const double> values);

/// Report JSON for one run: metrics plus run metadata.
nlohmann::json run_json(const RunOutput& run, const RunSpec& spec);

}  // namespace aisf::experiment
