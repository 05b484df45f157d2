#include "aisf/models/baselines.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "aisf/errors.hpp"

namespace aisf::models {

Tensor window_mean_forecast(const Tensor& x, std::size_t horizon)
{
    if (x.rank() != 3 || x.shape()[1] == 0) {
        throw DimensionError("window_mean_forecast: expected (B,w,m) with w >= 1, got " + shape_str(x.shape()));
    }
    const std::size_t batch = x.shape()[0], w = x.shape()[1], m = x.shape()[2];
    Tensor out({batch, horizon, m});
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t v = 0; v < m; ++v) {
            double s = 0.0;
            for (std::size_t t = 0; t < w; ++t) {
                s += x.at(b, t, v);
            }
            const double mean = s / static_cast<double>(w);
            for (std::size_t t = 0; t < horizon; ++t) {
                out.at(b, t, v) = mean;
            }
        }
    }
    return out;
}

ControlModel::ControlModel(const ModelConfig& config)
  : Forecaster(config)
{ }

Tensor ControlModel::predict(const Tensor& x)
{
    check_input(x.shape());
    return window_mean_forecast(x, config().horizon);
}

ChainModel::ChainModel(const ModelConfig& config)
  : Forecaster(config)
{
    const std::size_t w = config.window, s = config.horizon;
    for (std::size_t v = 0; v < config.variables; ++v) {
        for (std::size_t t = 0; t < s; ++t) {
            coef_.emplace_back("chain.v" + std::to_string(v) + ".t" + std::to_string(t), Tensor({w + t + 1}));
        }
    }
}

std::vector<Parameter*> ChainModel::parameters()
{
    std::vector<Parameter*> out;
    for (auto& p : coef_) {
        out.push_back(&p);
    }
    return out;
}

void ChainModel::fit(const Tensor& x, const Tensor& y)
{
    const ModelConfig& c = config();
    check_input(x.shape());
    if (y.rank() != 3 || y.shape()[0] != x.shape()[0] || y.shape()[1] != c.horizon || y.shape()[2] != c.variables) {
        throw DimensionError("chain fit: targets " + shape_str(y.shape()) + " do not match inputs "
                             + shape_str(x.shape()));
    }
    const std::size_t n = x.shape()[0], w = c.window, s = c.horizon;
    if (n == 0) {
        throw DimensionError("chain fit: no samples");
    }
    for (std::size_t v = 0; v < c.variables; ++v) {
        for (std::size_t t = 0; t < s; ++t) {
            const std::size_t d = w + t + 1;
            Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
            Eigen::VectorXd target(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) {
                const auto row = static_cast<Eigen::Index>(i);
                for (std::size_t k = 0; k < w; ++k) {
                    design(row, static_cast<Eigen::Index>(k)) = x.at(i, k, v);
                }
                for (std::size_t k = 0; k < t; ++k) {
                    design(row, static_cast<Eigen::Index>(w + k)) = y.at(i, k, v);
                }
                design(row, static_cast<Eigen::Index>(d - 1)) = 1.0;
                target(row) = y.at(i, t, v);
            }
            Eigen::MatrixXd normal = design.transpose() * design;
            normal.diagonal().array() += kRidge;
            const Eigen::VectorXd rhs = design.transpose() * target;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
            const double rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
            if (ldlt.info() != Eigen::Success || !(rcond > 1e-16)) {
                std::ostringstream os;
                os << "chain fit: singular normal equations for variable " << v << ", step " << t
                   << " (estimated reciprocal condition " << rcond << ", " << n << " samples, " << d
                   << " unknowns)";
                throw NumericalError(os.str());
            }
            const Eigen::VectorXd beta = ldlt.solve(rhs);
            Parameter& p = coef_[v * s + t];
            for (std::size_t k = 0; k < d; ++k) {
                p.value[k] = beta(static_cast<Eigen::Index>(k));
                if (!std::isfinite(p.value[k])) {
                    throw NumericalError("chain fit: non-finite coefficient for variable " + std::to_string(v));
                }
            }
        }
    }
    fitted_ = true;
}

Tensor ChainModel::predict(const Tensor& x)
{
    if (!fitted_) {
        throw StateError("chain model used before fit");
    }
    check_input(x.shape());
    const ModelConfig& c = config();
    const std::size_t n = x.shape()[0], w = c.window, s = c.horizon;
    Tensor out({n, s, c.variables});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t v = 0; v < c.variables; ++v) {
            for (std::size_t t = 0; t < s; ++t) {
                const Tensor& beta = coef_[v * s + t].value;
                double pred = beta[w + t];
                for (std::size_t k = 0; k < w; ++k) {
                    pred += beta[k] * x.at(i, k, v);
                }
                for (std::size_t k = 0; k < t; ++k) {
                    pred += beta[w + k] * out.at(i, k, v);
                }
                out.at(i, t, v) = pred;
            }
        }
    }
    return out;
}

}  // namespace aisf::models
