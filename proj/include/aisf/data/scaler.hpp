#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aisf/data/windows.hpp"
#include "aisf/tensor.hpp"

namespace aisf::data {

/// Per-variable z-score followed by min-max scaling, fitted on training data.
///
/// transform:  z = (x - mean) / max(std, eps);  out = (z - zmin) / max(zmax - zmin, eps)
/// Population std. A constant column maps to 0.
class Scaler {
public:
    static constexpr double kEps = 1e-12;

    Scaler() = default;
    /// Restores a fitted scaler from stored statistics.
    Scaler(std::vector<double> mean, std::vector<double> std, std::vector<double> min, std::vector<double> max);

    /// Fits on rows of a (..., m) tensor.
    void fit(const Tensor& rows);
    /// Fits on every input and target row of the samples.
    void fit(std::span<const WindowSample> samples);

    [[nodiscard]] bool fitted() const { return fitted_; }
    [[nodiscard]] std::size_t variables() const { return mean_.size(); }

    /// (..., m) -> (..., m). Throws StateError before fit, DimensionError on m mismatch.
    [[nodiscard]] Tensor transform(const Tensor& x) const;
    [[nodiscard]] Tensor inverse_transform(const Tensor& x) const;

    /// inverse(x) = x * inverse_scale()[v] + inverse_shift()[v]
    [[nodiscard]] const std::vector<double>& inverse_scale() const { return inv_scale_; }
    [[nodiscard]] const std::vector<double>& inverse_shift() const { return inv_shift_; }

    [[nodiscard]] const std::vector<double>& mean() const { return mean_; }
    [[nodiscard]] const std::vector<double>& stddev() const { return std_; }
    [[nodiscard]] const std::vector<double>& zmin() const { return min_; }
    [[nodiscard]] const std::vector<double>& zmax() const { return max_; }

private:
    void finalize();
    void check(const Tensor& x) const;

    std::vector<double> mean_, std_, min_, max_;
    std::vector<double> inv_scale_, inv_shift_;
    bool fitted_ = false;
};

}  // namespace aisf::data
