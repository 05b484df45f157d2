#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "aisf/autograd.hpp"

namespace aisf::train {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

/// First and second moments, one tensor per parameter, plus the step count.
struct OptimState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::uint64_t step = 0;
};

/// One decoupled-weight-decay Adam update using `p.grad`:
///   p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p)
/// The state is sized on first use. Throws NumericalError naming the first
/// parameter with a non-finite gradient (nothing is updated in that case) and
/// DimensionError if the parameter list no longer matches the state.
void adamw_step(std::span<Parameter* const> params, OptimState& state, double lr, const AdamWConfig& cfg = {});

/// Global L2 norm over every gradient.
double grad_norm(std::span<Parameter* const> params);

/// Rescales all gradients by max_norm / norm when the global norm exceeds
/// max_norm. Returns the norm before clipping. Throws ConfigError unless max_norm > 0.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

/// Reduce-on-plateau learning-rate schedule.
///
/// An epoch improves when loss < best - threshold. After `patience`
/// consecutive non-improving epochs the rate is multiplied by `factor` and the
/// stall counter resets.
class PlateauScheduler {
public:
    PlateauScheduler(double lr, std::size_t patience = 3, double factor = 0.2, double threshold = 1e-6);

    /// Feeds one epoch's validation loss; returns the learning rate for the next epoch.
    double step(double loss);

    [[nodiscard]] double lr() const { return lr_; }
    [[nodiscard]] double best() const { return best_; }
    [[nodiscard]] std::size_t stalls() const { return stalls_; }

private:
    double lr_;
    std::size_t patience_;
    double factor_;
    double threshold_;
    double best_ = std::numeric_limits<double>::infinity();
    std::size_t stalls_ = 0;
};

}  // namespace aisf::train
