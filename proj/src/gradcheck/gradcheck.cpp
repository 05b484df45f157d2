#include "aisf/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <memory>

#include "aisf/autograd.hpp"
#include "aisf/models/forecaster.hpp"
#include "aisf/nn/layers.hpp"
#include "aisf/nn/recurrent.hpp"
#include "aisf/nn/reference.hpp"
#include "aisf/ops.hpp"
#include "aisf/rng.hpp"
#include "aisf/train/metrics.hpp"

namespace aisf::gradcheck {

namespace {

constexpr double kLayerTol = 1e-5;
constexpr double kModelTol = 1e-4;
constexpr double kReferenceTol = 1e-9;

std::size_t dim(Rng& rng, std::size_t lo = 1, std::size_t hi = 8) { return lo + rng.below(hi - lo + 1); }

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0)
{
    Tensor t(std::move(shape));
    for (double& v : t.data()) {
        v = rng.uniform(lo, hi);
    }
    return t;
}

/// Storage and forward function of one randomized check.
struct Case {
    std::deque<Parameter> leaves;
    std::vector<Parameter*> wrt;
    std::function<Var(Tape&)> forward;
    std::shared_ptr<void> owner;

    Parameter& leaf(const std::string& name, Shape shape, Rng& rng)
    {
        leaves.emplace_back(name, random_tensor(std::move(shape), rng));
        wrt.push_back(&leaves.back());
        return leaves.back();
    }
    void add(const std::vector<Parameter*>& ps) { wrt.insert(wrt.end(), ps.begin(), ps.end()); }
};

using Factory = std::function<void(Case&, Rng&)>;

struct Spec {
    std::string name;
    Factory make;
    double tol;
};

double dot(const Tensor& a, const Tensor& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

/// One finite-difference trial: loss = <f(leaves), R> with random R.
double fd_trial(const Spec& spec, Rng& rng, const Options& opt)
{
    Case c;
    spec.make(c, rng);
    Tensor proj;
    {
        Tape tape;
        proj = random_tensor(c.forward(tape).shape(), rng);
    }
    for (Parameter* p : c.wrt) {
        p->zero_grad();
    }
    {
        Tape tape;
        const Var out = c.forward(tape);
        tape.backward(op::sum(op::mul(out, tape.constant(proj))));
    }
    const auto loss_at = [&] {
        Tape tape;
        return dot(c.forward(tape).value(), proj);
    };

    std::vector<Parameter*> probe;
    for (Parameter* p : c.wrt) {
        if (p->value.size() > 0) {
            probe.push_back(p);
        }
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < opt.coords_per_trial && !probe.empty(); ++k) {
        Parameter& p = *probe[rng.below(probe.size())];
        const std::size_t i = rng.below(p.value.size());
        const double saved = p.value[i];
        p.value[i] = saved + opt.step;
        const double up = loss_at();
        p.value[i] = saved - opt.step;
        const double down = loss_at();
        p.value[i] = saved;
        const double numeric = (up - down) / (2.0 * opt.step);
        const double analytic = opt.inject_wrong_sign ? -p.grad[i] : p.grad[i];
        worst = std::max(worst, std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic)));
    }
    return worst;
}

double rel_diff(const Tensor& a, const Tensor& b)
{
    if (a.shape() != b.shape()) {
        return std::numeric_limits<double>::infinity();
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
    }
    return worst;
}

Tensor signed_grad(const Tensor& g, bool flip)
{
    Tensor out = g;
    if (flip) {
        out.scale_(-1.0);
    }
    return out;
}

// ---- op and layer factories ----

Shape random_shape(Rng& rng, std::size_t max_rank = 3)
{
    Shape s(1 + rng.below(max_rank));
    for (auto& d : s) {
        d = dim(rng);
    }
    return s;
}

std::vector<Spec> op_specs()
{
    std::vector<Spec> specs;
    const auto unary = [&](const std::string& name, std::function<Var(Var)> f) {
        specs.push_back({name,
                         [f](Case& c, Rng& rng) {
                             Parameter& a = c.leaf("a", random_shape(rng), rng);
                             c.forward = [&a, f](Tape& t) { return f(t.parameter(a)); };
                         },
                         kLayerTol});
    };
    const auto binary = [&](const std::string& name, std::function<Var(Var, Var)> f) {
        specs.push_back({name,
                         [f](Case& c, Rng& rng) {
                             const Shape s = random_shape(rng);
                             Parameter& a = c.leaf("a", s, rng);
                             Parameter& b = c.leaf("b", s, rng);
                             c.forward = [&a, &b, f](Tape& t) { return f(t.parameter(a), t.parameter(b)); };
                         },
                         kLayerTol});
    };

    specs.push_back({"op.matmul",
                     [](Case& c, Rng& rng) {
                         const std::size_t p = dim(rng), q = dim(rng), r = dim(rng);
                         Parameter& a = c.leaf("a", {p, q}, rng);
                         Parameter& b = c.leaf("b", {q, r}, rng);
                         c.forward = [&a, &b](Tape& t) { return op::matmul(t.parameter(a), t.parameter(b)); };
                     },
                     kLayerTol});
    specs.push_back({"op.linear",
                     [](Case& c, Rng& rng) {
                         Shape xs = random_shape(rng);
                         const std::size_t in = xs.back(), out = dim(rng);
                         Parameter& x = c.leaf("x", xs, rng);
                         Parameter& w = c.leaf("w", {out, in}, rng);
                         Parameter& b = c.leaf("b", {out}, rng);
                         c.forward = [&x, &w, &b](Tape& t) {
                             return op::linear(t.parameter(x), t.parameter(w), t.parameter(b));
                         };
                     },
                     kLayerTol});
    specs.push_back({"op.crosscorr1d",
                     [](Case& c, Rng& rng) {
                         const std::size_t b = dim(rng, 1, 4), cin = dim(rng), cout = dim(rng), len = dim(rng);
                         const std::size_t k = 1 + 2 * rng.below(3);
                         Parameter& x = c.leaf("x", {b, cin, len}, rng);
                         Parameter& w = c.leaf("w", {cout, cin, k}, rng);
                         Parameter& bias = c.leaf("b", {cout}, rng);
                         c.forward = [&x, &w, &bias](Tape& t) {
                             return op::crosscorr1d(t.parameter(x), t.parameter(w), t.parameter(bias));
                         };
                     },
                     kLayerTol});
    binary("op.add", op::add);
    binary("op.sub", op::sub);
    binary("op.mul", op::mul);
    unary("op.scale", [](Var a) { return op::scale(a, -1.7); });
    unary("op.tanh", op::tanh);
    unary("op.sigmoid", op::sigmoid);
    unary("op.relu", op::relu);
    unary("op.sum", op::sum);
    unary("op.mean", op::mean);
    unary("op.reshape", [](Var a) { return op::reshape(a, {a.value().size()}); });
    specs.push_back({"op.swap_last",
                     [](Case& c, Rng& rng) {
                         Parameter& a = c.leaf("a", {dim(rng), dim(rng), dim(rng)}, rng);
                         c.forward = [&a](Tape& t) { return op::swap_last(t.parameter(a)); };
                     },
                     kLayerTol});
    specs.push_back({"op.select_step",
                     [](Case& c, Rng& rng) {
                         const std::size_t steps = dim(rng);
                         Parameter& a = c.leaf("a", {dim(rng), steps, dim(rng)}, rng);
                         const std::size_t step = rng.below(steps);
                         c.forward = [&a, step](Tape& t) { return op::select_step(t.parameter(a), step); };
                     },
                     kLayerTol});
    specs.push_back({"op.stack_steps",
                     [](Case& c, Rng& rng) {
                         const std::size_t b = dim(rng), f = dim(rng), steps = dim(rng, 1, 5);
                         std::vector<Parameter*> parts;
                         for (std::size_t i = 0; i < steps; ++i) {
                             parts.push_back(&c.leaf("s" + std::to_string(i), {b, f}, rng));
                         }
                         c.forward = [parts](Tape& t) {
                             std::vector<Var> vs;
                             for (Parameter* p : parts) {
                                 vs.push_back(t.parameter(*p));
                             }
                             return op::stack_steps(vs);
                         };
                     },
                     kLayerTol});
    specs.push_back({"op.slice_cols",
                     [](Case& c, Rng& rng) {
                         const std::size_t cols = dim(rng);
                         Parameter& a = c.leaf("a", {dim(rng), cols}, rng);
                         const std::size_t start = rng.below(cols);
                         const std::size_t len = 1 + rng.below(cols - start);
                         c.forward = [&a, start, len](Tape& t) { return op::slice_cols(t.parameter(a), start, len); };
                     },
                     kLayerTol});
    specs.push_back({"op.concat_cols",
                     [](Case& c, Rng& rng) {
                         const std::size_t n = dim(rng);
                         Parameter& a = c.leaf("a", {n, dim(rng)}, rng);
                         Parameter& b = c.leaf("b", {n, dim(rng)}, rng);
                         c.forward = [&a, &b](Tape& t) { return op::concat_cols({t.parameter(a), t.parameter(b)}); };
                     },
                     kLayerTol});
    specs.push_back({"op.affine_last",
                     [](Case& c, Rng& rng) {
                         const Shape s = random_shape(rng);
                         Parameter& a = c.leaf("a", s, rng);
                         auto coef = std::make_shared<std::pair<std::vector<double>, std::vector<double>>>();
                         for (std::size_t j = 0; j < s.back(); ++j) {
                             coef->first.push_back(rng.uniform(-3.0, 3.0));
                             coef->second.push_back(rng.uniform(-3.0, 3.0));
                         }
                         c.owner = coef;
                         c.forward = [&a, coef](Tape& t) {
                             return op::affine_last(t.parameter(a), coef->first, coef->second);
                         };
                     },
                     kLayerTol});
    specs.push_back({"op.clamp_last",
                     [](Case& c, Rng& rng) {
                         const Shape s = random_shape(rng);
                         Parameter& a = c.leaf("a", s, rng);
                         auto bounds = std::make_shared<std::pair<std::vector<double>, std::vector<double>>>();
                         for (std::size_t j = 0; j < s.back(); ++j) {
                             bounds->first.push_back(rng.uniform(-0.9, -0.1));
                             bounds->second.push_back(rng.uniform(0.1, 0.9));
                         }
                         c.owner = bounds;
                         c.forward = [&a, bounds](Tape& t) {
                             return op::clamp_last(t.parameter(a), bounds->first, bounds->second);
                         };
                     },
                     kLayerTol});
    specs.push_back({"op.dropout",
                     [](Case& c, Rng& rng) {
                         Parameter& a = c.leaf("a", random_shape(rng), rng);
                         const Rng mask = rng.fork(rng.next_u64());
                         c.forward = [&a, mask](Tape& t) {
                             Rng r = mask;
                             return nn::dropout(t.parameter(a), nn::DropoutSpec{0.3, nn::Mode::kTrain}, r);
                         };
                     },
                     kLayerTol});
    specs.push_back({"op.hte_loss",
                     [](Case& c, Rng& rng) {
                         const Shape s = random_shape(rng);
                         Parameter& p = c.leaf("pred", s, rng);
                         Parameter& y = c.leaf("target", s, rng);
                         for (double& v : y.value.data()) {
                             v *= 3.0;
                         }
                         c.forward = [&p, &y](Tape& t) { return train::hte_loss(t.parameter(p), t.parameter(y)); };
                     },
                     kLayerTol});
    return specs;
}

nn::RnnKind kind_of(const std::string& name)
{
    return nn::parse_rnn_kind(name);
}

std::vector<Spec> layer_specs()
{
    std::vector<Spec> specs;
    specs.push_back({"layer.linear",
                     [](Case& c, Rng& rng) {
                         Shape xs = random_shape(rng);
                         auto layer = std::make_shared<nn::Linear>("lin", xs.back(), dim(rng));
                         layer->init(rng);
                         Parameter& x = c.leaf("x", xs, rng);
                         c.add(layer->parameters());
                         c.owner = layer;
                         c.forward = [&x, layer](Tape& t) { return layer->forward(t, t.parameter(x)); };
                     },
                     kLayerTol});
    specs.push_back({"layer.conv1d",
                     [](Case& c, Rng& rng) {
                         const std::size_t cin = dim(rng);
                         auto layer = std::make_shared<nn::Conv1d>("conv", cin, dim(rng), 1 + 2 * rng.below(3));
                         layer->init(rng);
                         Parameter& x = c.leaf("x", {dim(rng, 1, 4), cin, dim(rng)}, rng);
                         c.add(layer->parameters());
                         c.owner = layer;
                         c.forward = [&x, layer](Tape& t) { return layer->forward(t, t.parameter(x)); };
                     },
                     kLayerTol});
    for (const char* k : {"lstm", "gru", "elman"}) {
        const nn::RnnKind kind = kind_of(k);
        specs.push_back({std::string("layer.") + k,
                         [kind](Case& c, Rng& rng) {
                             nn::RecurrentConfig cfg;
                             cfg.kind = kind;
                             cfg.input_size = dim(rng, 1, 6);
                             cfg.hidden_size = dim(rng, 1, 6);
                             cfg.num_layers = dim(rng, 1, 3);
                             cfg.bidirectional = rng.below(2) == 1;
                             const bool sequence = rng.below(2) == 1;
                             auto layer = std::make_shared<nn::RecurrentLayer>("rnn", cfg);
                             layer->init(rng);
                             // Wider weights than the default init so saturation paths are exercised.
                             for (Parameter* p : layer->parameters()) {
                                 for (double& v : p->value.data()) {
                                     v = rng.uniform(-1.0, 1.0);
                                 }
                             }
                             Parameter& x = c.leaf("x", {dim(rng, 1, 3), dim(rng, 1, 6), cfg.input_size}, rng);
                             c.add(layer->parameters());
                             c.owner = layer;
                             c.forward = [&x, layer, sequence](Tape& t) {
                                 return layer->forward(t, t.parameter(x), sequence);
                             };
                         },
                         kLayerTol});
    }
    return specs;
}

models::ModelConfig small_model(models::ForecasterKind kind, Rng& rng)
{
    models::ModelConfig cfg;
    cfg.kind = kind;
    cfg.window = 4;
    cfg.horizon = 2;
    cfg.variables = 5;
    cfg.ff_hidden = 6;
    cfg.block.conv_out_channels = 4;
    cfg.block.hidden_size = 4;
    cfg.block.dropout_p = 0.1;
    const nn::RnnKind kinds[] = {nn::RnnKind::kLstm, nn::RnnKind::kGru, nn::RnnKind::kElman};
    if (kind == models::ForecasterKind::kProposed) {
        cfg.block.rnn = kinds[rng.below(3)];
        cfg.block.num_layers = dim(rng, 1, 2);
        cfg.block.bidirectional = rng.below(2) == 1;
        cfg.block.isolate_variables = rng.below(4) == 0;
    }
    return cfg;
}

std::vector<Spec> model_specs()
{
    using models::ForecasterKind;
    std::vector<Spec> specs;
    const std::pair<const char*, ForecasterKind> kinds[] = {
        {"model.proposed", ForecasterKind::kProposed}, {"model.feed_forward", ForecasterKind::kFeedForward},
        {"model.lstm", ForecasterKind::kLstm},         {"model.gru", ForecasterKind::kGru},
        {"model.elman", ForecasterKind::kElman},       {"model.fc_cnn", ForecasterKind::kFcCnn},
    };
    for (const auto& [name, kind] : kinds) {
        specs.push_back({name,
                         [kind](Case& c, Rng& rng) {
                             const models::ModelConfig cfg = small_model(kind, rng);
                             std::shared_ptr<models::Forecaster> model = models::make_forecaster(cfg, rng);
                             auto* net = static_cast<models::NeuralForecaster*>(model.get());
                             Parameter& x = c.leaf("x", {dim(rng, 1, 3), cfg.window, cfg.variables}, rng);
                             c.add(model->parameters());
                             c.owner = model;
                             const Rng mask = rng.fork(rng.next_u64());
                             c.forward = [&x, net, mask](Tape& t) {
                                 Rng r = mask;
                                 return net->forward(t, t.parameter(x), nn::Mode::kTrain, r);
                             };
                         },
                         kModelTol});
    }
    return specs;
}

// ---- reference comparisons ----

double reference_linear(Rng& rng, bool flip)
{
    const std::size_t n = dim(rng), in = dim(rng), out = dim(rng);
    Parameter x("x", random_tensor({n, in}, rng));
    Parameter w("w", random_tensor({out, in}, rng));
    Parameter b("b", random_tensor({out}, rng));
    const Tensor gy = random_tensor({n, out}, rng);
    Tape tape;
    const Var y = op::linear(tape.parameter(x), tape.parameter(w), tape.parameter(b));
    tape.backward(op::sum(op::mul(y, tape.constant(gy))));
    const auto ref = nn::reference::linear_backward(x.value, w.value, gy);
    return std::max({rel_diff(nn::reference::linear_forward(x.value, w.value, b.value), y.value()),
                     rel_diff(ref.dx, signed_grad(x.grad, flip)), rel_diff(ref.dw, signed_grad(w.grad, flip)),
                     rel_diff(ref.db, signed_grad(b.grad, flip))});
}

double reference_conv(Rng& rng, bool flip)
{
    const std::size_t bsz = dim(rng, 1, 4), cin = dim(rng), cout = dim(rng), len = dim(rng);
    const std::size_t k = 1 + 2 * rng.below(3);
    Parameter x("x", random_tensor({bsz, cin, len}, rng));
    Parameter w("w", random_tensor({cout, cin, k}, rng));
    Parameter b("b", random_tensor({cout}, rng));
    const Tensor gy = random_tensor({bsz, cout, len}, rng);
    Tape tape;
    const Var y = op::crosscorr1d(tape.parameter(x), tape.parameter(w), tape.parameter(b));
    tape.backward(op::sum(op::mul(y, tape.constant(gy))));
    const auto ref = nn::reference::conv1d_backward(x.value, w.value, gy);
    return std::max({rel_diff(nn::reference::conv1d_forward(x.value, w.value, b.value), y.value()),
                     rel_diff(ref.dx, signed_grad(x.grad, flip)), rel_diff(ref.dw, signed_grad(w.grad, flip)),
                     rel_diff(ref.db, signed_grad(b.grad, flip))});
}

double reference_recurrent(nn::RnnKind kind, Rng& rng, bool flip)
{
    nn::RecurrentConfig cfg;
    cfg.kind = kind;
    cfg.input_size = dim(rng, 1, 6);
    cfg.hidden_size = dim(rng, 1, 6);
    nn::RecurrentLayer layer("rnn", cfg);
    layer.init(rng);
    for (Parameter* p : layer.parameters()) {
        for (double& v : p->value.data()) {
            v = rng.uniform(-1.0, 1.0);
        }
    }
    Parameter x("x", random_tensor({dim(rng, 1, 3), dim(rng, 1, 6), cfg.input_size}, rng));
    Tape tape;
    const Var h = layer.forward(tape, tape.parameter(x), true);
    const Tensor gy = random_tensor(h.shape(), rng);
    tape.backward(op::sum(op::mul(h, tape.constant(gy))));
    nn::RecurrentCell& cell = layer.cells()[0];
    const auto ref = nn::reference::recurrent_backward(cell, x.value, gy);
    double worst = std::max({rel_diff(nn::reference::recurrent_forward(cell, x.value), h.value()),
                             rel_diff(ref.dx, signed_grad(x.grad, flip)),
                             rel_diff(ref.dw_ih, signed_grad(cell.w_ih.grad, flip)),
                             rel_diff(ref.dw_hh, signed_grad(cell.w_hh.grad, flip)),
                             rel_diff(ref.db_ih, signed_grad(cell.b_ih.grad, flip))});
    if (cell.b_hh.value.size() > 0) {
        worst = std::max(worst, rel_diff(ref.db_hh, signed_grad(cell.b_hh.grad, flip)));
    }
    return worst;
}

struct RowPlan {
    std::string name;
    double tol;
    std::function<double(Rng&, const Options&)> trial;
};

std::vector<RowPlan> plan()
{
    std::vector<RowPlan> rows;
    for (auto&& group : {op_specs(), layer_specs()}) {
        for (const Spec& s : group) {
            rows.push_back({s.name, s.tol, [s](Rng& rng, const Options& o) { return fd_trial(s, rng, o); }});
        }
    }
    rows.push_back({"layer.linear.reference", kReferenceTol,
                    [](Rng& rng, const Options& o) { return reference_linear(rng, o.inject_wrong_sign); }});
    rows.push_back({"layer.conv1d.reference", kReferenceTol,
                    [](Rng& rng, const Options& o) { return reference_conv(rng, o.inject_wrong_sign); }});
    for (const char* k : {"lstm", "gru", "elman"}) {
        const nn::RnnKind kind = kind_of(k);
        rows.push_back({std::string("layer.") + k + ".reference", kReferenceTol,
                        [kind](Rng& rng, const Options& o) { return reference_recurrent(kind, rng, o.inject_wrong_sign); }});
    }
    for (const Spec& s : model_specs()) {
        rows.push_back({s.name, s.tol, [s](Rng& rng, const Options& o) { return fd_trial(s, rng, o); }});
    }
    return rows;
}

}  // namespace

std::vector<std::string> row_names()
{
    std::vector<std::string> out;
    for (const auto& r : plan()) {
        out.push_back(r.name);
    }
    return out;
}

std::vector<Row> run(const Options& options)
{
    const Rng root = Rng(options.seed).fork(Stream::kGradCheck);
    std::vector<Row> rows;
    std::uint64_t index = 0;
    for (const auto& p : plan()) {
        ++index;
        if (!options.filter.empty() && p.name.find(options.filter) == std::string::npos) {
            continue;
        }
        Rng rng = root.fork(index);
        Row row;
        row.name = p.name;
        row.tolerance = p.tol;
        for (std::size_t t = 0; t < options.trials; ++t) {
            const double err = p.trial(rng, options);
            row.max_rel_error = std::isnan(err) ? std::numeric_limits<double>::infinity()
                                                : std::max(row.max_rel_error, err);
            ++row.trials;
        }
        row.passed = row.max_rel_error < row.tolerance;
        rows.push_back(row);
    }
    return rows;
}

std::string format_table(const std::vector<Row>& rows)
{
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-26s %7s %14s %10s  %s\n", "row", "trials", "max_rel_err", "tol", "result");
    out += line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-26s %7zu %14.3e %10.0e  %s\n", r.name.c_str(), r.trials, r.max_rel_error,
                      r.tolerance, r.passed ? "PASS" : "FAIL");
        out += line;
    }
    return out;
}

}  // namespace aisf::gradcheck
