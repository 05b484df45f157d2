#include "aisf/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "aisf/errors.hpp"
#include "aisf/ops.hpp"
#include "aisf/rng.hpp"

namespace aisf::train {

namespace {

constexpr std::size_t kEvalBatch = 256;

Tensor gather_rows(const Tensor& all, std::span<const std::size_t> rows)
{
    Shape shape = all.shape();
    const std::size_t stride = all.size() / shape[0];
    shape[0] = rows.size();
    std::vector<double> out(rows.size() * stride);
    const auto src = all.data();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(rows[r] * stride), stride,
                    out.begin() + static_cast<std::ptrdiff_t>(r * stride));
    }
    return Tensor(std::move(shape), std::move(out));
}

void check_compatible(const models::Forecaster& model, const data::Scaler& scaler)
{
    if (!scaler.fitted()) {
        throw StateError("scaler is not fitted");
    }
    if (scaler.variables() != model.config().variables) {
        throw DimensionError("scaler has " + std::to_string(scaler.variables()) + " variables, model expects "
                             + std::to_string(model.config().variables));
    }
}

void check_samples(const models::Forecaster& model, std::span<const data::WindowSample> samples)
{
    if (samples.empty()) {
        throw DataError("no windows to process");
    }
    const auto& c = model.config();
    const Shape want_x{c.window, c.variables};
    const Shape want_y{c.horizon, c.variables};
    if (samples[0].x.shape() != want_x || samples[0].y.shape() != want_y) {
        throw DimensionError("windows are x " + shape_str(samples[0].x.shape()) + " / y "
                             + shape_str(samples[0].y.shape()) + ", model expects x " + shape_str(want_x) + " / y "
                             + shape_str(want_y));
    }
}

std::vector<double> bound_vector(const data::ClipBounds& b, bool upper, std::size_t m)
{
    std::vector<double> out(m);
    for (std::size_t v = 0; v < m; ++v) {
        out[v] = v < data::kNumVariables ? (upper ? b.hi[v] : b.lo[v])
                                         : (upper ? data::ClipBounds::kInf : -data::ClipBounds::kInf);
    }
    return out;
}

std::string parameter_norms(const std::vector<Parameter*>& params)
{
    std::ostringstream os;
    for (const Parameter* p : params) {
        os << "\n  " << p->name << ": |w|=" << std::sqrt(l2_norm_sq(p->value))
           << " |g|=" << std::sqrt(l2_norm_sq(p->grad));
    }
    return os.str();
}

}  // namespace

void TrainConfig::validate() const
{
    if (!(lr > 0.0) || !(grad_clip_norm > 0.0) || plateau_patience == 0 || batch_size == 0 || max_epochs == 0) {
        throw ConfigError("learning rate, clip norm, patience, batch size and epochs must all be positive");
    }
    if (!(lr_decay_factor > 0.0 && lr_decay_factor < 1.0)) {
        throw ConfigError("learning-rate decay factor must be in (0, 1)");
    }
    if (!(plateau_threshold >= 0.0)) {
        throw ConfigError("plateau threshold must be non-negative");
    }
}

Tensor scaled_inputs(std::span<const data::WindowSample> samples, const data::Scaler& scaler)
{
    return scaler.transform(data::stack_inputs(samples));
}

Tensor predict_original(models::Forecaster& model, std::span<const data::WindowSample> samples,
                        const data::Scaler& scaler, const data::ClipBounds& bounds)
{
    check_compatible(model, scaler);
    check_samples(model, samples);
    const auto& c = model.config();
    std::vector<double> out;
    out.reserve(samples.size() * c.horizon * c.variables);
    for (std::size_t begin = 0; begin < samples.size(); begin += kEvalBatch) {
        const auto chunk = samples.subspan(begin, std::min(kEvalBatch, samples.size() - begin));
        const Tensor pred = scaler.inverse_transform(model.predict(scaled_inputs(chunk, scaler)));
        const auto d = pred.data();
        for (std::size_t i = 0; i < d.size(); ++i) {
            const std::size_t v = i % c.variables;
            double x = d[i];
            if (v < data::kNumVariables) {
                x = std::clamp(x, bounds.lo[v], bounds.hi[v]);
            }
            out.push_back(x);
        }
    }
    return Tensor({samples.size(), c.horizon, c.variables}, std::move(out));
}

MetricReport evaluate(models::Forecaster& model, std::span<const data::WindowSample> samples,
                      const data::Scaler& scaler, const data::ClipBounds& bounds)
{
    return compute_report(predict_original(model, samples, scaler, bounds), data::stack_targets(samples));
}

std::vector<MetricReport> evaluate_per_step(models::Forecaster& model, std::span<const data::WindowSample> samples,
                                            const data::Scaler& scaler, const data::ClipBounds& bounds)
{
    return per_step_reports(predict_original(model, samples, scaler, bounds), data::stack_targets(samples));
}

TrainResult train(models::NeuralForecaster& model, std::span<const data::WindowSample> train_set,
                  std::span<const data::WindowSample> test_set, const data::Scaler& scaler, const TrainConfig& cfg,
                  const EpochCallback& on_epoch, const data::ClipBounds& bounds)
{
    cfg.validate();
    check_compatible(model, scaler);
    check_samples(model, train_set);
    check_samples(model, test_set);

    const std::size_t m = model.config().variables;
    const std::vector<double> lo = bound_vector(bounds, false, m);
    const std::vector<double> hi = bound_vector(bounds, true, m);
    const Tensor x_all = scaled_inputs(train_set, scaler);
    const Tensor y_all = data::stack_targets(train_set);
    const std::size_t n = train_set.size();

    const Rng root(cfg.seed);
    Rng shuffle_rng = root.fork(Stream::kShuffle);
    Rng dropout_rng = root.fork(Stream::kDropout);

    std::vector<Parameter*> params = model.parameters();
    OptimState state;
    PlateauScheduler scheduler(cfg.lr, cfg.plateau_patience, cfg.lr_decay_factor, cfg.plateau_threshold);

    TrainResult result;
    double best_test = std::numeric_limits<double>::infinity();
    std::vector<Tensor> best_values;

    std::vector<std::size_t> order(n);
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const double lr = scheduler.lr();
        for (std::size_t i = 0; i < n; ++i) {
            order[i] = i;
        }
        for (std::size_t i = n; i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        }

        double loss_sum = 0.0;
        std::size_t seen = 0;
        std::size_t batch_index = 0;
        for (std::size_t begin = 0; begin < n; begin += cfg.batch_size, ++batch_index) {
            const std::span<const std::size_t> rows(order.data() + begin, std::min(cfg.batch_size, n - begin));
            for (Parameter* p : params) {
                p->zero_grad();
            }
            Tape tape;
            const Var x = tape.constant(gather_rows(x_all, rows));
            const Var y = tape.constant(gather_rows(y_all, rows));
            Var out = model.forward(tape, x, nn::Mode::kTrain, dropout_rng);
            out = op::affine_last(out, scaler.inverse_scale(), scaler.inverse_shift());
            out = op::clamp_last(out, lo, hi);
            const Var loss = hte_loss(out, y);
            const double value = loss.value().item();
            if (!std::isfinite(value)) {
                throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch "
                                     + std::to_string(batch_index) + "; parameter norms:" + parameter_norms(params));
            }
            tape.backward(loss);
            clip_grad_norm(params, cfg.grad_clip_norm);
            adamw_step(params, state, lr, cfg.adamw);
            loss_sum += value * static_cast<double>(rows.size());
            seen += rows.size();
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_hte = loss_sum / static_cast<double>(seen);
        rec.lr = lr;
        const MetricReport test_report = evaluate(model, test_set, scaler, bounds);
        rec.test_hte = test_report.hte;
        if (!std::isfinite(rec.test_hte)) {
            throw NumericalError("non-finite test loss at epoch " + std::to_string(epoch) + "; parameter norms:"
                                 + parameter_norms(params));
        }
        if (rec.test_hte < best_test) {
            best_test = rec.test_hte;
            result.best_epoch = epoch;
            result.test_report = test_report;
            best_values.clear();
            for (const Parameter* p : params) {
                best_values.push_back(p->value);
            }
        }
        scheduler.step(rec.test_hte);
        result.epochs.push_back(rec);
        if (on_epoch) {
            on_epoch(rec);
        }
    }

    for (std::size_t k = 0; k < params.size(); ++k) {
        params[k]->value = best_values[k];
        params[k]->zero_grad();
    }
    return result;
}

void fit_chain(models::ChainModel& model, std::span<const data::WindowSample> train_set, const data::Scaler& scaler)
{
    check_compatible(model, scaler);
    check_samples(model, train_set);
    model.fit(scaled_inputs(train_set, scaler), scaler.transform(data::stack_targets(train_set)));
}

void write_epoch_log(const std::filesystem::path& path, std::span<const EpochRecord> epochs)
{
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) {
        throw FormatError("cannot write epoch log " + path.string());
    }
    std::fputs("epoch,train_hte,test_hte,lr\n", f);
    for (const auto& e : epochs) {
        std::fprintf(f, "%zu,%.17g,%.17g,%.17g\n", e.epoch, e.train_hte, e.test_hte, e.lr);
    }
    if (std::fclose(f) != 0) {
        throw FormatError("failed writing epoch log " + path.string());
    }
}

void write_per_step_csv(const std::filesystem::path& path, std::span<const MetricReport> steps)
{
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) {
        throw FormatError("cannot write per-step CSV " + path.string());
    }
    std::fputs("step,variable,hte,mae,huber,rmse,rpd,n_elements\n", f);
    for (std::size_t t = 0; t < steps.size(); ++t) {
        const auto& per = steps[t].per_variable;
        for (std::size_t v = 0; v < per.size(); ++v) {
            const std::string name = per.size() == data::kNumVariables ? std::string(data::kVariableNames[v])
                                                                       : "v" + std::to_string(v);
            const Metrics& mm = per[v];
            std::fprintf(f, "%zu,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%zu\n", t + 1, name.c_str(), mm.hte, mm.mae,
                         mm.huber, mm.rmse, mm.rpd, mm.n_elements);
        }
    }
    if (std::fclose(f) != 0) {
        throw FormatError("failed writing per-step CSV " + path.string());
    }
}

}  // namespace aisf::train
