#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "aisf/autograd.hpp"
#include "aisf/tensor.hpp"

namespace aisf::train {

/// Elementwise means over residuals r = y - y_hat. All throw DimensionError on
/// shape mismatch.
double hte(const Tensor& pred, const Tensor& target);
/// mean of 2(y - y_hat) / (|y| + |y_hat|), with 0/0 taken as 0. Positive when
/// predictions fall below the truth.
double rpd(const Tensor& pred, const Tensor& target);
double rmse(const Tensor& pred, const Tensor& target);
double mae(const Tensor& pred, const Tensor& target);
double huber(const Tensor& pred, const Tensor& target, double delta = 1.0);

/// Differentiable HTE: mean of r * tanh(r).
Var hte_loss(Var pred, Var target);

/// Per-element terms, shared by the direct and streaming paths.
double hte_term(double r);
double rpd_term(double y, double y_hat);
double huber_term(double r, double delta = 1.0);

struct Metrics {
    double hte = 0.0;
    double mae = 0.0;
    double huber = 0.0;
    double rmse = 0.0;
    double rpd = 0.0;
    std::size_t n_elements = 0;
};

struct MetricReport : Metrics {
    /// One entry per variable (last axis).
    std::vector<Metrics> per_variable;
};

/// Single-pass accumulator over (prediction, truth) pairs tagged with their variable.
class MetricAccumulator {
public:
    explicit MetricAccumulator(std::size_t variables);

    void add(std::size_t variable, double pred, double target);
    /// Adds every element of two equally shaped (..., m) tensors.
    void add(const Tensor& pred, const Tensor& target);

    [[nodiscard]] MetricReport report() const;

private:
    struct Sums {
        double hte = 0.0, abs = 0.0, huber = 0.0, sq = 0.0, rpd = 0.0;
        std::size_t n = 0;
    };
    static Metrics finish(const Sums& s);

    std::vector<Sums> per_var_;
};

/// Report over (..., m) tensors with the per-variable breakdown along the last axis.
MetricReport compute_report(const Tensor& pred, const Tensor& target);

/// One report per horizon step for (N, s, m) tensors.
std::vector<MetricReport> per_step_reports(const Tensor& pred, const Tensor& target);

/// {hte, mae, huber, rmse, rpd, n_elements, per_variable: {name: {...}}}.
/// Variable names follow the AIS order when m == 5, otherwise v0, v1, ...
nlohmann::json to_json(const MetricReport& report);
nlohmann::json to_json(const Metrics& metrics);

}  // namespace aisf::train
