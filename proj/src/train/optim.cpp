#include "aisf/train/optim.hpp"

#include <cmath>
#include <string>

#include "aisf/errors.hpp"

namespace aisf::train {

void adamw_step(std::span<Parameter* const> params, OptimState& state, double lr, const AdamWConfig& cfg)
{
    if (state.m.empty() && state.step == 0) {
        for (const Parameter* p : params) {
            state.m.emplace_back(p->value.shape());
            state.v.emplace_back(p->value.shape());
        }
    }
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw DimensionError("optimizer state holds " + std::to_string(state.m.size()) + " moments for "
                             + std::to_string(params.size()) + " parameters");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        const Parameter& p = *params[k];
        if (p.grad.shape() != p.value.shape() || state.m[k].shape() != p.value.shape()) {
            throw DimensionError("parameter '" + p.name + "' shape " + shape_str(p.value.shape())
                                 + " does not match its gradient or optimizer state");
        }
        for (double g : p.grad.data()) {
            if (!std::isfinite(g)) {
                throw NumericalError("non-finite gradient in parameter '" + p.name + "'");
            }
        }
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto w = params[k]->value.data();
        const auto g = params[k]->grad.data();
        auto m = state.m[k].data();
        auto v = state.v[k].data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            w[i] -= lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * w[i]);
        }
    }
}

double grad_norm(std::span<Parameter* const> params)
{
    double sq = 0.0;
    for (const Parameter* p : params) {
        sq += l2_norm_sq(p->grad);
    }
    return std::sqrt(sq);
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm)
{
    if (!(max_norm > 0.0)) {
        throw ConfigError("gradient clip norm must be positive");
    }
    const double norm = grad_norm(params);
    if (norm > max_norm) {
        const double s = max_norm / norm;
        for (Parameter* p : params) {
            p->grad.scale_(s);
        }
    }
    return norm;
}

PlateauScheduler::PlateauScheduler(double lr, std::size_t patience, double factor, double threshold)
  : lr_(lr)
  , patience_(patience)
  , factor_(factor)
  , threshold_(threshold)
{
    if (!(lr > 0.0) || patience == 0 || !(factor > 0.0 && factor < 1.0) || !(threshold >= 0.0)) {
        throw ConfigError("plateau scheduler needs lr > 0, patience >= 1, factor in (0, 1), threshold >= 0");
    }
}

double PlateauScheduler::step(double loss)
{
    if (loss < best_ - threshold_) {
        best_ = loss;
        stalls_ = 0;
    } else if (++stalls_ >= patience_) {
        lr_ *= factor_;
        stalls_ = 0;
    }
    return lr_;
}

}  // namespace aisf::train
