#pragma once

#include <vector>

#include "aisf/models/forecaster.hpp"

namespace aisf::models {

/// Predicts the per-variable window mean at every horizon step.
class ControlModel : public Forecaster {
public:
    explicit ControlModel(const ModelConfig& config);

    Tensor predict(const Tensor& x) override;
};

/// Regression chain of ridge-damped least-squares estimators.
///
/// Each variable is handled on its own. The estimator for horizon step t of
/// variable v regresses on the w window values of v, the t previous horizon
/// values of v and an intercept. Fitting uses the true previous targets; at
/// prediction time the chained estimates are fed forward instead.
class ChainModel : public Forecaster {
public:
    static constexpr double kRidge = 1e-8;

    explicit ChainModel(const ModelConfig& config);

    /// x (N, w, m), y (N, s, m), both in the same units.
    void fit(const Tensor& x, const Tensor& y);
    [[nodiscard]] bool fitted() const { return fitted_; }

    Tensor predict(const Tensor& x) override;
    std::vector<Parameter*> parameters() override;
    void on_parameters_loaded() override { fitted_ = true; }

    /// coefficients()[v * s + t] has length w + t + 1 (window, previous steps, intercept).
    [[nodiscard]] const std::vector<Parameter>& coefficients() const { return coef_; }

private:
    std::vector<Parameter> coef_;
    bool fitted_ = false;
};

/// Control-model output computed directly into an (N, s, m) tensor.
Tensor window_mean_forecast(const Tensor& x, std::size_t horizon);

}  // namespace aisf::models
