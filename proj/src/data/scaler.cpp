#include "aisf/data/scaler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aisf/errors.hpp"

namespace aisf::data {

Scaler::Scaler(std::vector<double> mean, std::vector<double> std, std::vector<double> min, std::vector<double> max)
  : mean_(std::move(mean))
  , std_(std::move(std))
  , min_(std::move(min))
  , max_(std::move(max))
{
    const std::size_t m = mean_.size();
    if (m == 0 || std_.size() != m || min_.size() != m || max_.size() != m) {
        throw DimensionError("scaler statistics have inconsistent lengths");
    }
    finalize();
}

void Scaler::fit(const Tensor& rows)
{
    if (rows.rank() < 1 || rows.shape().back() == 0) {
        throw DimensionError("scaler fit: expected (..., m) data, got " + shape_str(rows.shape()));
    }
    const std::size_t m = rows.shape().back();
    const std::size_t n = rows.size() / m;
    if (n == 0) {
        throw DimensionError("scaler fit: no rows");
    }
    mean_.assign(m, 0.0);
    std_.assign(m, 0.0);
    min_.assign(m, std::numeric_limits<double>::infinity());
    max_.assign(m, -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t v = 0; v < m; ++v) {
            mean_[v] += rows[r * m + v];
        }
    }
    for (double& v : mean_) {
        v /= static_cast<double>(n);
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t v = 0; v < m; ++v) {
            const double d = rows[r * m + v] - mean_[v];
            std_[v] += d * d;
        }
    }
    for (double& v : std_) {
        v = std::sqrt(v / static_cast<double>(n));
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t v = 0; v < m; ++v) {
            const double z = (rows[r * m + v] - mean_[v]) / std::max(std_[v], kEps);
            min_[v] = std::min(min_[v], z);
            max_[v] = std::max(max_[v], z);
        }
    }
    finalize();
}

void Scaler::fit(std::span<const WindowSample> samples)
{
    if (samples.empty()) {
        throw DimensionError("scaler fit: no samples");
    }
    const std::size_t m = samples[0].x.shape()[1];
    std::vector<double> rows;
    for (const auto& s : samples) {
        rows.insert(rows.end(), s.x.data().begin(), s.x.data().end());
        rows.insert(rows.end(), s.y.data().begin(), s.y.data().end());
    }
    const std::size_t n = rows.size() / m;
    fit(Tensor({n, m}, std::move(rows)));
}

void Scaler::finalize()
{
    const std::size_t m = mean_.size();
    inv_scale_.resize(m);
    inv_shift_.resize(m);
    for (std::size_t v = 0; v < m; ++v) {
        const double sd = std::max(std_[v], kEps);
        const double range = std::max(max_[v] - min_[v], kEps);
        inv_scale_[v] = range * sd;
        inv_shift_[v] = min_[v] * sd + mean_[v];
    }
    fitted_ = true;
}

void Scaler::check(const Tensor& x) const
{
    if (!fitted_) {
        throw StateError("scaler used before fit");
    }
    if (x.rank() < 1 || x.shape().back() != mean_.size()) {
        throw DimensionError("scaler fitted for " + std::to_string(mean_.size()) + " variables, got "
                             + shape_str(x.shape()));
    }
}

Tensor Scaler::transform(const Tensor& x) const
{
    check(x);
    const std::size_t m = mean_.size();
    Tensor out = x;
    auto d = out.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const std::size_t v = i % m;
        const double z = (d[i] - mean_[v]) / std::max(std_[v], kEps);
        d[i] = (z - min_[v]) / std::max(max_[v] - min_[v], kEps);
    }
    return out;
}

Tensor Scaler::inverse_transform(const Tensor& x) const
{
    check(x);
    const std::size_t m = mean_.size();
    Tensor out = x;
    auto d = out.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const std::size_t v = i % m;
        d[i] = d[i] * inv_scale_[v] + inv_shift_[v];
    }
    return out;
}

}  // namespace aisf::data
