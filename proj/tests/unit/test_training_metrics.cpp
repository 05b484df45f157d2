#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "aisf/data/synthetic.hpp"
#include "aisf/errors.hpp"
#include "aisf/experiment.hpp"
#include "aisf/models/baselines.hpp"
#include "aisf/ops.hpp"
#include "aisf/train/checkpoint.hpp"
#include "aisf/train/metrics.hpp"
#include "aisf/train/optim.hpp"
#include "aisf/train/trainer.hpp"

using namespace aisf;
using namespace aisf::train;
namespace fs = std::filesystem;

namespace {

Tensor vec(std::initializer_list<double> v) { return Tensor::from({v.size()}, v); }

std::vector<Parameter*> ptrs(std::vector<Parameter>& ps)
{
    std::vector<Parameter*> out;
    for (auto& p : ps) out.push_back(&p);
    return out;
}

const data::TrajectoryNetwork& fixture()
{
    static const data::TrajectoryNetwork net = [] {
        data::GeneratorConfig gen;
        gen.n_vessels = 4;
        return data::generate_synthetic(gen, Rng(2021).fork(Stream::kGenerator));
    }();
    return net;
}

}  // namespace

TEST_CASE("hte")
{
    CHECK(hte(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
    CHECK(hte(vec({0}), vec({1})) == doctest::Approx(0.761594).epsilon(1e-6));
    CHECK_THROWS_AS((void)hte(vec({0, 1}), vec({1})), DimensionError);
    CHECK_THROWS_AS((void)hte(Tensor({0}), Tensor({0})), DimensionError);

    Tape tape;
    const auto pred = tape.variable(vec({0}));
    const auto loss = hte_loss(pred, tape.constant(vec({1})));
    CHECK(loss.value().item() == doctest::Approx(0.761594).epsilon(1e-6));
    tape.backward(loss);
    // d/d(pred) = -d/dr.
    CHECK(-tape.grad(pred)[0] == doctest::Approx(1.181568).epsilon(1e-6));
    const double h = 1e-6;
    const double fd = (hte_term(1 + h) - hte_term(1 - h)) / (2 * h);
    CHECK(fd == doctest::Approx(1.181568).epsilon(1e-6));
}

TEST_CASE("rpd, rmse, mae, huber")
{
    CHECK(rpd(vec({1}), vec({1})) == 0.0);
    CHECK(rpd(vec({0}), vec({1})) == 2.0);
    CHECK(rpd(vec({1}), vec({0})) == -2.0);
    CHECK(rpd_term(0, 0) == 0.0);
    CHECK(rmse(vec({3, 4}), vec({0, 0})) == doctest::Approx(3.535534).epsilon(1e-6));
    CHECK(mae(vec({3, -4}), vec({0, 0})) == 3.5);
    CHECK(huber(vec({0.5, 3}), vec({0, 0})) == doctest::Approx((0.125 + 2.5) / 2));

    Rng rng(4);
    Tensor y({100}), below({100}), above({100});
    for (std::size_t i = 0; i < 100; ++i) {
        y[i] = rng.uniform(-50, 50);
        below[i] = y[i] - rng.uniform(0.1, 5);
        above[i] = y[i] + rng.uniform(0.1, 5);
    }
    CHECK(rpd(below, y) > 0.0);
    CHECK(rpd(above, y) < 0.0);
}

TEST_CASE("hte bounds against mae and mse")
{
    Rng rng(2021);
    for (int i = 0; i < 10000; ++i) {
        const double r = rng.normal() * std::pow(10.0, rng.uniform(-3, 3));
        const double t = hte_term(r);
        CHECK(t >= 0.0);
        CHECK(t <= std::abs(r));
        CHECK(t <= r * r + 1e-300);
        if (std::abs(r) >= 3) CHECK(t >= 0.995 * std::abs(r));
    }
    Tensor p({500}), y({500});
    for (std::size_t i = 0; i < 500; ++i) {
        p[i] = rng.normal() * 4;
        y[i] = rng.normal() * 4;
    }
    CHECK(hte(p, y) <= mae(p, y));
    CHECK(hte(p, y) <= rmse(p, y) * rmse(p, y));
}

TEST_CASE("streaming report matches a two-pass recomputation")
{
    Rng rng(7);
    Tensor p({40, 5, 5}), y({40, 5, 5});
    for (std::size_t i = 0; i < p.size(); ++i) {
        y[i] = rng.normal() * 100;
        p[i] = y[i] + rng.normal() * 10;
    }
    MetricAccumulator acc(5);
    for (std::size_t b = 0; b < 40; b += 8) {
        Tensor pb({8, 5, 5}), yb({8, 5, 5});
        std::copy_n(p.values().begin() + b * 25, 200, pb.data().begin());
        std::copy_n(y.values().begin() + b * 25, 200, yb.data().begin());
        acc.add(pb, yb);
    }
    const MetricReport r = acc.report();
    CHECK(r.n_elements == 1000);
    CHECK(std::abs(r.hte - hte(p, y)) <= 1e-10 * hte(p, y));
    CHECK(std::abs(r.mae - mae(p, y)) <= 1e-10 * mae(p, y));
    CHECK(std::abs(r.rmse - rmse(p, y)) <= 1e-10 * rmse(p, y));
    CHECK(std::abs(r.huber - huber(p, y)) <= 1e-10 * huber(p, y));
    CHECK(std::abs(r.rpd - rpd(p, y)) <= 1e-10);
    CHECK((r.rpd >= -2 && r.rpd <= 2));

    REQUIRE(r.per_variable.size() == 5);
    double mean_of_vars = 0.0;
    for (const auto& v : r.per_variable) {
        CHECK(v.n_elements == 200);
        mean_of_vars += v.hte / 5;
    }
    CHECK(mean_of_vars == doctest::Approx(r.hte).epsilon(1e-12));

    const auto steps = per_step_reports(p, y);
    REQUIRE(steps.size() == 5);
    CHECK(steps[0].n_elements == 200);

    const auto j = to_json(r);
    for (const char* key : {"hte", "mae", "huber", "rmse", "rpd", "n_elements", "per_variable"}) CHECK(j.contains(key));
    for (const char* var : {"lat", "lon", "delta_t", "cog", "sog"}) CHECK(j["per_variable"].contains(var));
}

TEST_CASE("adamw")
{
    std::vector<Parameter> ps{Parameter("a", vec({1.0, -2.0})), Parameter("b", vec({3.0}))};
    OptimState st;
    adamw_step(ptrs(ps), st, 1e-3);
    const double shrink = 1 - 1e-3 * 0.01;
    CHECK(ps[0].value[0] == doctest::Approx(1.0 * shrink).epsilon(1e-15));
    CHECK(ps[0].value[1] == doctest::Approx(-2.0 * shrink).epsilon(1e-15));
    CHECK(ps[1].value[0] == doctest::Approx(3.0 * shrink).epsilon(1e-15));
    CHECK(st.step == 1);
    REQUIRE(st.m.size() == 2);
    CHECK(st.m[0].shape() == ps[0].value.shape());

    // m = 0.1, v = 0.001, m_hat = v_hat = 1: w = 1 - 1e-3 * (1 / (1 + 1e-8) + 0.01).
    std::vector<Parameter> one{Parameter("w", vec({1.0}))};
    one[0].grad = vec({1.0});
    OptimState s1;
    adamw_step(ptrs(one), s1, 1e-3);
    CHECK(one[0].value[0] == doctest::Approx(0.99899000001).epsilon(1e-14));

    std::vector<Parameter> bad{Parameter("broken.weight", vec({1.0}))};
    bad[0].grad = vec({std::nan("")});
    OptimState s2;
    try {
        adamw_step(ptrs(bad), s2, 1e-3);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("broken.weight") != std::string::npos);
    }
    CHECK(bad[0].value[0] == 1.0);
}

TEST_CASE("adamw trajectories are deterministic")
{
    const auto run = [] {
        std::vector<Parameter> ps{Parameter("w", vec({0.5, -0.5, 2.0}))};
        OptimState st;
        for (int i = 0; i < 50; ++i) {
            for (std::size_t k = 0; k < 3; ++k) ps[0].grad[k] = std::sin(ps[0].value[k] * (k + 1.0));
            adamw_step(ptrs(ps), st, 1e-2);
        }
        return ps[0].value;
    };
    CHECK(run() == run());
}

TEST_CASE("gradient clipping")
{
    std::vector<Parameter> ps{Parameter("a", vec({0, 0})), Parameter("b", vec({0}))};
    ps[0].grad = vec({1.2, 0.0});
    ps[1].grad = vec({1.6});
    CHECK(clip_grad_norm(ptrs(ps), 1.0) == doctest::Approx(2.0));
    CHECK(ps[0].grad[0] == doctest::Approx(0.6));
    CHECK(ps[1].grad[0] == doctest::Approx(0.8));
    CHECK(grad_norm(ptrs(ps)) <= 1.0 + 1e-12);

    ps[0].grad = vec({0.3, 0.0});
    ps[1].grad = vec({0.4});
    clip_grad_norm(ptrs(ps), 1.0);
    CHECK(ps[0].grad == vec({0.3, 0.0}));
    CHECK(ps[1].grad == vec({0.4}));

    ps[0].grad = vec({0, 0});
    ps[1].grad = vec({0});
    clip_grad_norm(ptrs(ps), 1.0);
    CHECK(grad_norm(ptrs(ps)) == 0.0);
    CHECK_THROWS_AS((void)clip_grad_norm(ptrs(ps), 0.0), ConfigError);

    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        for (auto& p : ps) {
            for (double& g : p.grad.data()) g = rng.normal() * 10;
        }
        clip_grad_norm(ptrs(ps), 1.0);
        CHECK(grad_norm(ptrs(ps)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("plateau scheduler")
{
    PlateauScheduler improving(1e-3);
    for (double l : {1.0, 0.9, 0.8}) improving.step(l);
    CHECK(improving.lr() == 1e-3);

    PlateauScheduler flat(1e-3);
    for (int i = 0; i < 3; ++i) flat.step(1.0);
    CHECK(flat.lr() == 1e-3);
    flat.step(1.0);
    CHECK(flat.lr() == doctest::Approx(2e-4).epsilon(1e-12));
    CHECK(flat.stalls() == 0);
    for (int i = 0; i < 3; ++i) flat.step(1.0);
    CHECK(flat.lr() == doctest::Approx(4e-5).epsilon(1e-12));

    PlateauScheduler tiny(1e-3);
    tiny.step(1.0);
    for (int i = 0; i < 3; ++i) tiny.step(1.0 - 5e-7);
    CHECK(tiny.lr() == doctest::Approx(2e-4));
}

TEST_CASE("train config validation")
{
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.lr_decay_factor = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = TrainConfig{};
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = TrainConfig{};
    c.lr = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("control model on constant variables scores zero")
{
    data::TrajectoryNetwork net;
    for (int v = 0; v < 3; ++v) {
        data::Trajectory t;
        t.vessel_id = "v" + std::to_string(v);
        for (int i = 0; i < 40; ++i) {
            data::AisMessage m;
            m.timestamp = i * 30;
            m.lat = 50.0 + v;
            m.lon = -20.0;
            m.cog = 90.0;
            m.sog = 10.0 + 0.1 * i;
            t.messages.push_back(m);
        }
        net.add(data::derive_delta_t(std::move(t)));
    }
    const auto prepared = experiment::prepare_data(net, 15, 5, 25, 0.2, 2021);
    models::ModelConfig mc;
    mc.kind = models::ForecasterKind::kControl;
    models::ControlModel control(mc);
    const MetricReport r = evaluate(control, prepared.test, prepared.scaler);
    for (std::size_t v : {0u, 1u, 2u, 3u}) {
        INFO("variable " << v);
        CHECK(r.per_variable[v].hte == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
        CHECK(r.per_variable[v].rmse == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
        CHECK(r.per_variable[v].rpd == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    }
    CHECK(r.per_variable[4].hte > 0.0);
}

TEST_CASE("evaluation rejects a scaler with a different variable count")
{
    const auto prepared = experiment::prepare_data(fixture(), 15, 5, 25, 0.2, 2021);
    data::Scaler wrong;
    wrong.fit(Tensor({4, 3}, 1.0));
    models::ModelConfig mc;
    mc.kind = models::ForecasterKind::kControl;
    models::ControlModel control(mc);
    CHECK_THROWS_AS((void)evaluate(control, prepared.test, wrong), DimensionError);
}

TEST_CASE("training loss decreases over the first epochs in every regime")
{
    for (const char* regime : {"low", "medium", "high"}) {
        const auto r = experiment::regime_preset(regime);
        experiment::RunSpec spec;
        spec.model.window = r.window;
        spec.model.horizon = r.horizon;
        spec.train.max_epochs = 10;
        const auto out = experiment::run(fixture(), spec);
        REQUIRE(out.epochs.size() == 10);
        INFO(regime << " first " << out.epochs.front().train_hte << " last " << out.epochs.back().train_hte);
        CHECK(out.epochs.back().train_hte < out.epochs.front().train_hte);
        for (const auto& e : out.epochs) CHECK(std::isfinite(e.train_hte));
        CHECK((out.test_report.rpd >= -2 && out.test_report.rpd <= 2));
    }
}

TEST_CASE("same seed gives identical epoch losses")
{
    experiment::RunSpec spec;
    spec.model.block.conv_out_channels = 16;
    spec.model.block.hidden_size = 16;
    spec.train.max_epochs = 5;
    const auto a = experiment::run(fixture(), spec);
    const auto b = experiment::run(fixture(), spec);
    REQUIRE(a.epochs.size() == b.epochs.size());
    for (std::size_t i = 0; i < a.epochs.size(); ++i) {
        CHECK(a.epochs[i].train_hte == b.epochs[i].train_hte);
        CHECK(a.epochs[i].test_hte == b.epochs[i].test_hte);
        CHECK(a.epochs[i].lr == b.epochs[i].lr);
    }
    spec.train.seed = 2121;
    const auto c = experiment::run(fixture(), spec);
    CHECK(c.epochs[0].train_hte != a.epochs[0].train_hte);
}

TEST_CASE("multi-seed aggregate")
{
    experiment::RunSpec spec;
    spec.model.kind = models::ForecasterKind::kChainLinear;
    const std::vector<std::uint64_t> seeds(std::begin(kProtocolSeeds), std::end(kProtocolSeeds));
    const auto runs = experiment::run_seeds(fixture(), spec, seeds, 2);
    REQUIRE(runs.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(runs[i].seed == seeds[i]);
    const auto j = experiment::aggregate(runs);
    CHECK(j["n_runs"] == 5);
    std::vector<double> h;
    for (const auto& r : runs) h.push_back(r.test_report.hte);
    double mean = 0.0;
    for (double v : h) mean += v / 5;
    double var = 0.0;
    for (double v : h) var += (v - mean) * (v - mean) / 4;
    CHECK(j["hte"]["mean"].get<double>() == doctest::Approx(mean).epsilon(1e-12));
    CHECK(j["hte"]["std"].get<double>() == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
}

TEST_CASE("checkpoint round trip")
{
    const fs::path dir = fs::temp_directory_path() / "aisf_ckpt_test";
    fs::create_directories(dir);
    for (auto kind : {models::ForecasterKind::kProposed, models::ForecasterKind::kGru,
                      models::ForecasterKind::kChainLinear}) {
        experiment::RunSpec spec;
        spec.model.kind = kind;
        spec.model.block.conv_out_channels = 8;
        spec.model.block.hidden_size = 8;
        spec.model.block.bidirectional = true;
        spec.model.block.num_layers = 2;
        spec.train.max_epochs = 2;
        auto out = experiment::run(fixture(), spec);
        const auto prepared = experiment::prepare_data(fixture(), 15, 5, 25, 0.2, 2021);
        const fs::path file = dir / "model.json";
        save_checkpoint(file, make_checkpoint(*out.model, out.scaler, 2021, 0.2, 25));
        const Checkpoint ck = load_checkpoint(file);
        CHECK(ck.seed == 2021);
        CHECK(ck.model.block.num_layers == 2);
        CHECK(ck.model.block.bidirectional);
        CHECK(ck.scaler.mean() == out.scaler.mean());
        auto restored = restore_model(ck);
        const Tensor x = scaled_inputs(prepared.test, out.scaler);
        CHECK(restored->predict(x) == out.model->predict(x));
    }

    const fs::path bad = dir / "bad.json";
    std::ofstream(bad) << R"({"format":"aisf-checkpoint","version":99})";
    CHECK_THROWS_AS((void)load_checkpoint(bad), FormatError);
    std::ofstream(bad) << R"({"format":"something-else","version":1})";
    CHECK_THROWS_AS((void)load_checkpoint(bad), FormatError);
    fs::remove_all(dir);
}

TEST_CASE("epoch log format")
{
    const fs::path file = fs::temp_directory_path() / "aisf_epochs_test.csv";
    const std::vector<EpochRecord> recs{{1, 0.5, 0.25, 1e-3}};
    write_epoch_log(file, recs);
    std::ifstream in(file);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "epoch,train_hte,test_hte,lr");
    CHECK(row == "1,0.5,0.25,0.001");
    fs::remove(file);
}
