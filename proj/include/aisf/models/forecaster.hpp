#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "aisf/autograd.hpp"
#include "aisf/nn/layers.hpp"
#include "aisf/nn/recurrent.hpp"
#include "aisf/rng.hpp"

namespace aisf::models {

enum class ForecasterKind { kProposed, kFeedForward, kElman, kGru, kLstm, kFcCnn, kControl, kChainLinear };

/// CLI names: proposed, feed_forward, elman, gru, lstm, fc_cnn, control, chain.
std::string_view to_string(ForecasterKind kind);
ForecasterKind parse_kind(std::string_view name);

/// Hyperparameters of one conv + recurrent + decoder block (also reused by the
/// recurrent and CNN baselines).
struct BlockConfig {
    std::size_t conv_out_channels = 128;
    std::size_t kernel = 3;
    std::size_t hidden_size = 128;
    nn::RnnKind rnn = nn::RnnKind::kLstm;
    std::size_t num_layers = 1;
    bool bidirectional = false;
    double dropout_p = 0.1;
    /// Use a width-1 kernel in the first block so variables never mix.
    bool isolate_variables = false;
};

struct ModelConfig {
    ForecasterKind kind = ForecasterKind::kProposed;
    std::size_t window = 15;
    std::size_t horizon = 5;
    std::size_t variables = 5;
    BlockConfig block;
    /// Hidden width of the feed-forward baseline.
    std::size_t ff_hidden = 128;

    void validate() const;
};

/// Common multi-step forecaster contract: (B, w, m) scaled inputs to
/// (B, s, m) scaled predictions.
class Forecaster {
public:
    explicit Forecaster(ModelConfig config);
    virtual ~Forecaster() = default;
    Forecaster(const Forecaster&) = delete;
    Forecaster& operator=(const Forecaster&) = delete;

    [[nodiscard]] const ModelConfig& config() const { return config_; }
    [[nodiscard]] ForecasterKind kind() const { return config_.kind; }

    /// Gradient-trained models return true and implement `forward`.
    [[nodiscard]] virtual bool trainable() const { return false; }
    /// Models with learned state (including the fitted chain) return true.
    [[nodiscard]] virtual bool has_state() const { return !parameters_const().empty(); }

    virtual std::vector<Parameter*> parameters() { return {}; }
    [[nodiscard]] std::vector<const Parameter*> parameters_const() const;

    /// Eval-mode prediction.
    virtual Tensor predict(const Tensor& x) = 0;

    /// Called after parameter values were restored from a checkpoint.
    virtual void on_parameters_loaded() { }

protected:
    void check_input(const Shape& shape) const;

private:
    ModelConfig config_;
};

/// A forecaster trained by gradient descent on a tape.
class NeuralForecaster : public Forecaster {
public:
    using Forecaster::Forecaster;

    [[nodiscard]] bool trainable() const override { return true; }
    [[nodiscard]] bool has_state() const override { return true; }

    virtual void init(Rng& rng) = 0;
    /// `dropout_rng` is consumed only in train mode.
    virtual Var forward(Tape& tape, Var x, nn::Mode mode, Rng& dropout_rng) = 0;

    Tensor predict(const Tensor& x) override;
};

/// Builds the forecaster for `config`; neural models are initialised from `init_rng`.
std::unique_ptr<Forecaster> make_forecaster(const ModelConfig& config, Rng& init_rng);

/// Copies parameter values from `src` into `dst` by position (shapes must match).
void copy_parameters(const std::vector<Parameter*>& dst, const std::vector<const Parameter*>& src);

}  // namespace aisf::models
