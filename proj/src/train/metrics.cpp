#include "aisf/train/metrics.hpp"

#include <cmath>

#include "aisf/data/ais.hpp"
#include "aisf/errors.hpp"
#include "aisf/ops.hpp"

namespace aisf::train {

namespace {

void check_pair(const Tensor& pred, const Tensor& target, const char* what)
{
    if (pred.shape() != target.shape()) {
        throw DimensionError(std::string(what) + ": prediction " + shape_str(pred.shape()) + " vs target "
                             + shape_str(target.shape()));
    }
    if (pred.size() == 0) {
        throw DimensionError(std::string(what) + ": empty input");
    }
}

template <typename Term>
double elementwise_mean(const Tensor& pred, const Tensor& target, const char* what, Term term)
{
    check_pair(pred, target, what);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        acc += term(target[i], pred[i]);
    }
    return acc / static_cast<double>(pred.size());
}

}  // namespace

double hte_term(double r) { return r * std::tanh(r); }

double rpd_term(double y, double y_hat)
{
    const double denom = std::abs(y) + std::abs(y_hat);
    return denom == 0.0 ? 0.0 : 2.0 * (y - y_hat) / denom;
}

double huber_term(double r, double delta)
{
    const double a = std::abs(r);
    return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

double hte(const Tensor& pred, const Tensor& target)
{
    return elementwise_mean(pred, target, "hte", [](double y, double p) { return hte_term(y - p); });
}

double rpd(const Tensor& pred, const Tensor& target)
{
    return elementwise_mean(pred, target, "rpd", [](double y, double p) { return rpd_term(y, p); });
}

double rmse(const Tensor& pred, const Tensor& target)
{
    return std::sqrt(elementwise_mean(pred, target, "rmse", [](double y, double p) { return (y - p) * (y - p); }));
}

double mae(const Tensor& pred, const Tensor& target)
{
    return elementwise_mean(pred, target, "mae", [](double y, double p) { return std::abs(y - p); });
}

double huber(const Tensor& pred, const Tensor& target, double delta)
{
    return elementwise_mean(pred, target, "huber", [delta](double y, double p) { return huber_term(y - p, delta); });
}

Var hte_loss(Var pred, Var target)
{
    if (pred.shape() != target.shape()) {
        throw DimensionError("hte_loss: prediction " + shape_str(pred.shape()) + " vs target "
                             + shape_str(target.shape()));
    }
    const Var r = op::sub(target, pred);
    return op::mean(op::mul(r, op::tanh(r)));
}

MetricAccumulator::MetricAccumulator(std::size_t variables)
  : per_var_(variables)
{
    if (variables == 0) {
        throw DimensionError("metric accumulator needs at least one variable");
    }
}

void MetricAccumulator::add(std::size_t variable, double pred, double target)
{
    Sums& s = per_var_.at(variable);
    const double r = target - pred;
    s.hte += hte_term(r);
    s.abs += std::abs(r);
    s.huber += huber_term(r);
    s.sq += r * r;
    s.rpd += rpd_term(target, pred);
    ++s.n;
}

void MetricAccumulator::add(const Tensor& pred, const Tensor& target)
{
    check_pair(pred, target, "metrics");
    const std::size_t m = per_var_.size();
    if (pred.shape().back() != m) {
        throw DimensionError("metrics: expected " + std::to_string(m) + " variables, got " + shape_str(pred.shape()));
    }
    for (std::size_t i = 0; i < pred.size(); ++i) {
        add(i % m, pred[i], target[i]);
    }
}

Metrics MetricAccumulator::finish(const Sums& s)
{
    Metrics out;
    out.n_elements = s.n;
    if (s.n == 0) {
        return out;
    }
    const double n = static_cast<double>(s.n);
    out.hte = s.hte / n;
    out.mae = s.abs / n;
    out.huber = s.huber / n;
    out.rmse = std::sqrt(s.sq / n);
    out.rpd = s.rpd / n;
    return out;
}

MetricReport MetricAccumulator::report() const
{
    MetricReport rep;
    Sums total;
    for (const Sums& s : per_var_) {
        rep.per_variable.push_back(finish(s));
        total.hte += s.hte;
        total.abs += s.abs;
        total.huber += s.huber;
        total.sq += s.sq;
        total.rpd += s.rpd;
        total.n += s.n;
    }
    static_cast<Metrics&>(rep) = finish(total);
    return rep;
}

MetricReport compute_report(const Tensor& pred, const Tensor& target)
{
    check_pair(pred, target, "metrics");
    MetricAccumulator acc(pred.shape().back());
    acc.add(pred, target);
    return acc.report();
}

std::vector<MetricReport> per_step_reports(const Tensor& pred, const Tensor& target)
{
    check_pair(pred, target, "per-step metrics");
    if (pred.rank() != 3) {
        throw DimensionError("per-step metrics: expected (N, s, m), got " + shape_str(pred.shape()));
    }
    const std::size_t n = pred.dim(0), s = pred.dim(1), m = pred.dim(2);
    std::vector<MetricAccumulator> acc(s, MetricAccumulator(m));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < s; ++t) {
            for (std::size_t v = 0; v < m; ++v) {
                const std::size_t k = (i * s + t) * m + v;
                acc[t].add(v, pred[k], target[k]);
            }
        }
    }
    std::vector<MetricReport> out;
    out.reserve(s);
    for (const auto& a : acc) {
        out.push_back(a.report());
    }
    return out;
}

nlohmann::json to_json(const Metrics& metrics)
{
    return {{"hte", metrics.hte},     {"mae", metrics.mae}, {"huber", metrics.huber},
            {"rmse", metrics.rmse},   {"rpd", metrics.rpd}, {"n_elements", metrics.n_elements}};
}

nlohmann::json to_json(const MetricReport& report)
{
    nlohmann::json j = to_json(static_cast<const Metrics&>(report));
    nlohmann::json per = nlohmann::json::object();
    const bool ais = report.per_variable.size() == data::kNumVariables;
    for (std::size_t v = 0; v < report.per_variable.size(); ++v) {
        const std::string name = ais ? std::string(data::kVariableNames[v]) : "v" + std::to_string(v);
        per[name] = to_json(report.per_variable[v]);
    }
    j["per_variable"] = per;
    return j;
}

}  // namespace aisf::train
