#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "aisf/data/ais.hpp"
#include "aisf/data/scaler.hpp"
#include "aisf/data/windows.hpp"
#include "aisf/models/baselines.hpp"
#include "aisf/models/forecaster.hpp"
#include "aisf/train/metrics.hpp"
#include "aisf/train/optim.hpp"

namespace aisf::train {

inline constexpr std::uint64_t kProtocolSeeds[] = {2021, 2121, 2221, 2321, 2421};

struct TrainConfig {
    double lr = 1e-3;
    double grad_clip_norm = 1.0;
    std::size_t plateau_patience = 3;
    double lr_decay_factor = 0.2;
    double plateau_threshold = 1e-6;
    /// Windows per mini-batch.
    std::size_t batch_size = 128;
    std::size_t max_epochs = 50;
    std::uint64_t seed = 2021;
    AdamWConfig adamw;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    /// Mean HTE over all training elements seen this epoch (train mode).
    double train_hte = 0.0;
    /// Eval-mode HTE on the test windows.
    double test_hte = 0.0;
    /// Learning rate used during the epoch.
    double lr = 0.0;
};

struct TrainResult {
    std::vector<EpochRecord> epochs;
    /// 1-based epoch whose parameters were kept.
    std::size_t best_epoch = 0;
    MetricReport test_report;
};

/// Scaled model input for a set of windows: (N, w, m).
Tensor scaled_inputs(std::span<const data::WindowSample> samples, const data::Scaler& scaler);

/// Runs `model` on `samples` and maps the output back to original units,
/// clipped to the variable domains: (N, s, m). Batches internally.
Tensor predict_original(models::Forecaster& model, std::span<const data::WindowSample> samples,
                        const data::Scaler& scaler, const data::ClipBounds& bounds = {});

/// All five metrics on original units. Throws DimensionError when the scaler
/// and the model disagree on the number of variables.
MetricReport evaluate(models::Forecaster& model, std::span<const data::WindowSample> samples,
                      const data::Scaler& scaler, const data::ClipBounds& bounds = {});

/// Per-horizon-step breakdown of `evaluate`.
std::vector<MetricReport> evaluate_per_step(models::Forecaster& model, std::span<const data::WindowSample> samples,
                                            const data::Scaler& scaler, const data::ClipBounds& bounds = {});

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training with HTE on inverse-transformed, clipped outputs.
///
/// Each epoch shuffles the training windows from the run's shuffle stream,
/// takes AdamW steps with global gradient clipping, then evaluates on `test`
/// and feeds the test HTE to the plateau scheduler. On return the model holds
/// the parameters of the epoch with the lowest test HTE. A non-finite loss
/// aborts with NumericalError giving the epoch, batch and parameter norms.
TrainResult train(models::NeuralForecaster& model, std::span<const data::WindowSample> train_set,
                  std::span<const data::WindowSample> test_set, const data::Scaler& scaler, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {}, const data::ClipBounds& bounds = {});

/// Closed-form fit of the regression chain on scaled training windows.
void fit_chain(models::ChainModel& model, std::span<const data::WindowSample> train_set, const data::Scaler& scaler);

/// `epoch,train_hte,test_hte,lr` with round-trip precision.
void write_epoch_log(const std::filesystem::path& path, std::span<const EpochRecord> epochs);

/// Per-step CSV: `step,variable,hte,mae,huber,rmse,rpd,n_elements`, s rows per variable.
void write_per_step_csv(const std::filesystem::path& path, std::span<const MetricReport> steps);

}  // namespace aisf::train
