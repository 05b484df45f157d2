// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: aisf_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sys/wait.h>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aisf/data/ais.hpp"
#include "aisf/data/scaler.hpp"
#include "aisf/data/synthetic.hpp"
#include "aisf/data/windows.hpp"
#include "aisf/experiment.hpp"
#include "aisf/gradcheck.hpp"
#include "aisf/models/baselines.hpp"
#include "aisf/rng.hpp"
#include "aisf/train/metrics.hpp"
#include "aisf/train/trainer.hpp"

#ifndef AISF_CLI_PATH
#define AISF_CLI_PATH "aisf"
#endif

namespace fs = std::filesystem;
using namespace aisf;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename... Args>
std::string fmt(const char* f, Args... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

fs::path scratch_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("aisf_acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// 1. Gradient suite.
Outcome gradient_suite()
{
    const auto t0 = Clock::now();
    const auto rows = gradcheck::run({});
    const double secs = seconds_since(t0);
    double worst_layer = 0.0, worst_model = 0.0;
    bool ok = true;
    for (const auto& r : rows) {
        ok = ok && r.passed && r.trials == 100;
        (r.name.rfind("model.", 0) == 0 ? worst_model : worst_layer)
            = std::max(r.name.rfind("model.", 0) == 0 ? worst_model : worst_layer, r.max_rel_error);
        if (!r.passed) {
            std::printf("    failing row %s: %.3e\n", r.name.c_str(), r.max_rel_error);
        }
    }
    ok = ok && secs < 120.0;
    return {ok, fmt("%zu rows x 100 trials, worst layer %.2e (<1e-5), worst composite %.2e (<1e-4), %.1fs (<120s)",
                    rows.size(), worst_layer, worst_model, secs)};
}

// 2. Oracle equivalence.
Outcome oracle_equivalence()
{
    Rng rng(2021);
    double control_err = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t b = 1 + rng.below(6), w = 1 + rng.below(30), s = 1 + rng.below(50), m = 1 + rng.below(6);
        Tensor x({b, w, m});
        for (double& v : x.data()) {
            v = rng.uniform(-1e3, 1e3);
        }
        models::ModelConfig cfg;
        cfg.kind = models::ForecasterKind::kControl;
        cfg.window = w;
        cfg.horizon = s;
        cfg.variables = m;
        models::ControlModel control(cfg);
        const Tensor pred = control.predict(x);
        for (std::size_t i = 0; i < b; ++i) {
            for (std::size_t v = 0; v < m; ++v) {
                long double acc = 0.0L;
                for (std::size_t t = 0; t < w; ++t) {
                    acc += x.at(i, t, v);
                }
                const double mean = static_cast<double>(acc / static_cast<long double>(w));
                for (std::size_t t = 0; t < s; ++t) {
                    control_err = std::max(control_err, std::abs(pred.at(i, t, v) - mean));
                }
            }
        }
    }

    double chain_err = 0.0;
    for (const auto& [w, s] : {std::pair<std::size_t, std::size_t>{15, 5}, {15, 25}, {30, 50}}) {
        models::ModelConfig cfg;
        cfg.kind = models::ForecasterKind::kChainLinear;
        cfg.window = w;
        cfg.horizon = s;
        cfg.variables = 5;
        const auto series = [&](std::size_t n, Tensor& x, Tensor& y) {
            x = Tensor({n, w, 5});
            y = Tensor({n, s, 5});
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t v = 0; v < 5; ++v) {
                    const double a = rng.uniform(-2.0, 2.0), slope = rng.uniform(-0.1, 0.1);
                    for (std::size_t t = 0; t < w + s; ++t) {
                        const double value = a + slope * static_cast<double>(t);
                        (t < w ? x.at(i, t, v) : y.at(i, t - w, v)) = value;
                    }
                }
            }
        };
        Tensor x_fit, y_fit, x_new, y_new;
        series(200, x_fit, y_fit);
        series(100, x_new, y_new);
        models::ChainModel chain(cfg);
        chain.fit(x_fit, y_fit);
        const Tensor pred = chain.predict(x_new);
        chain_err = std::max(chain_err, max_abs_diff(pred, y_new));
    }
    return {control_err <= 1e-12 && chain_err <= 1e-6,
            fmt("control vs brute-force mean %.2e (<=1e-12), chain on linear series %.2e (<=1e-6)", control_err,
                chain_err)};
}

// 3. Metric identities.
Outcome metric_identities()
{
    Rng rng(2121);
    const Tensor zeros({4, 5, 5});
    const double hte0 = train::hte(zeros, zeros);

    bool hte_le_mae = true;
    for (int trial = 0; trial < 100; ++trial) {
        Tensor a({64}), b({64});
        const double spread = std::pow(10.0, rng.uniform(-3.0, 3.0));
        for (std::size_t i = 0; i < 64; ++i) {
            a[i] = spread * rng.normal();
            b[i] = spread * rng.normal();
        }
        hte_le_mae = hte_le_mae && train::hte(a, b) <= train::mae(a, b);
    }

    const double rpd_hi = train::rpd(Tensor::from({1}, {0.0}), Tensor::from({1}, {1.0}));
    const double rpd_lo = train::rpd(Tensor::from({1}, {1.0}), Tensor::from({1}, {0.0}));

    Tensor p({100000}), y({100000});
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double scale = std::pow(10.0, rng.uniform(-6.0, 6.0));
        p[i] = scale * rng.uniform(-1.0, 1.0);
        y[i] = (rng.below(10) == 0) ? 0.0 : scale * rng.uniform(-1.0, 1.0);
    }
    double rpd_min = 2.0, rpd_max = -2.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double r = train::rpd_term(y[i], p[i]);
        rpd_min = std::min(rpd_min, r);
        rpd_max = std::max(rpd_max, r);
    }
    const double rpd_mean = train::rpd(p, y);
    const double rmse = train::rmse(Tensor::from({2}, {3.0, 4.0}), Tensor::from({2}, {0.0, 0.0}));

    const bool ok = hte0 == 0.0 && hte_le_mae && rpd_hi == 2.0 && rpd_lo == -2.0 && rpd_min >= -2.0 && rpd_max <= 2.0
        && std::abs(rpd_mean) <= 2.0 && std::abs(rmse - 3.535534) <= 1e-6 && std::abs(rmse - std::sqrt(12.5)) <= 1e-9;
    return {ok, fmt("HTE(0)=%g, HTE<=MAE %s, RPD cases %+g/%+g, 1e5 random pairs in [%.4f, %.4f], RMSE %.9f", hte0,
                    yes_no(hte_le_mae), rpd_hi, rpd_lo, rpd_min, rpd_max, rmse)};
}

// 4. Pipeline identities.
Outcome pipeline_identities()
{
    Rng rng(2221);
    Tensor rows({500, 5});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = std::pow(10.0, static_cast<double>(i % 5) - 1.0) * rng.normal() + 50.0;
    }
    data::Scaler scaler;
    scaler.fit(rows);
    const double round_trip = max_abs_diff(scaler.inverse_transform(scaler.transform(rows)), rows);

    bool idempotent = true;
    for (int i = 0; i < 10000; ++i) {
        data::AisMessage m;
        m.lat = rng.uniform(-200.0, 200.0);
        m.lon = rng.uniform(-400.0, 400.0);
        m.cog = rng.uniform(-720.0, 720.0);
        m.sog = rng.uniform(-50.0, 50.0);
        m.delta_t = rng.uniform(-1e4, 1e6);
        const auto once = data::clip_message(m);
        const auto twice = data::clip_message(once);
        idempotent = idempotent && once.features() == twice.features();
    }

    data::GeneratorConfig gen;
    gen.n_vessels = 50;
    gen.delta_t_outlier_rate = 0.05;
    const auto net = data::generate_synthetic(gen, Rng(2221).fork(Stream::kGenerator));
    bool time_exact = true;
    for (const auto& [id, traj] : net) {
        for (std::size_t i = 1; i < traj.size(); ++i) {
            const auto& a = traj.messages[i - 1];
            const auto& b = traj.messages[i];
            time_exact = time_exact && a.timestamp + static_cast<std::int64_t>(b.delta_t) == b.timestamp
                && static_cast<double>(b.timestamp - a.timestamp) == b.delta_t;
        }
    }

    bool counts_ok = true;
    std::size_t fuzz = 0;
    for (int trial = 0; trial < 400; ++trial, ++fuzz) {
        const std::size_t w = 1 + rng.below(30), s = 1 + rng.below(50), len = rng.below(200);
        data::Trajectory traj{"F", {}};
        for (std::size_t i = 0; i < len; ++i) {
            data::AisMessage m;
            m.timestamp = static_cast<std::int64_t>(i * 10);
            traj.messages.push_back(m);
        }
        traj = data::derive_delta_t(std::move(traj));
        Rng wr = rng.fork(static_cast<std::uint64_t>(trial));
        const auto windows = data::sample_windows(traj, w, s, data::kDefaultWindowsPerVessel, wr);
        const std::size_t expected = len >= w + s ? std::min<std::size_t>(25, len - w - s + 1) : 0;
        counts_ok = counts_ok && windows.size() == expected;
    }
    const bool ok = round_trip <= 1e-9 && idempotent && time_exact && counts_ok;
    return {ok, fmt("scaler round-trip %.2e (<=1e-9), clip idempotent %s, timestamp + delta_t exact %s, window "
                    "counts on %zu fuzzed lengths %s",
                    round_trip, yes_no(idempotent), yes_no(time_exact), fuzz, yes_no(counts_ok))};
}

// 5. Overfit capacity.
Outcome overfit_capacity()
{
    const auto t0 = Clock::now();
    data::GeneratorConfig gen;
    gen.n_vessels = 4;
    const auto net = data::generate_synthetic(gen, Rng(2021).fork(Stream::kGenerator));
    bool ok = true;
    std::string detail;
    for (const char* regime : {"low", "medium", "high"}) {
        const auto r = experiment::regime_preset(regime);
        experiment::RunSpec spec;
        spec.model.window = r.window;
        spec.model.horizon = r.horizon;
        spec.train.seed = 2021;
        spec.train.max_epochs = 200;
        const auto prepared = experiment::prepare_data(net, r.window, r.horizon, spec.windows_per_vessel,
                                                       spec.test_fraction, spec.train.seed);
        Rng init = Rng(spec.train.seed).fork(Stream::kInit);
        auto model = models::make_forecaster(spec.model, init);
        auto& neural = dynamic_cast<models::NeuralForecaster&>(*model);
        const auto result = train::train(neural, prepared.train, prepared.test, prepared.scaler, spec.train);
        double best_train = result.epochs.front().train_hte;
        std::size_t best_epoch = 1;
        for (const auto& e : result.epochs) {
            if (e.train_hte < best_train) {
                best_train = e.train_hte;
                best_epoch = e.epoch;
            }
        }
        models::ModelConfig control_cfg = spec.model;
        control_cfg.kind = models::ForecasterKind::kControl;
        models::ControlModel control(control_cfg);
        const double control_hte = train::evaluate(control, prepared.train, prepared.scaler).hte;
        const double ratio = best_train / control_hte;
        ok = ok && ratio < 0.10;
        detail += std::string(regime) + fmt(" %.3f/%.3f=%.1f%%; ", best_train, control_hte, 100.0 * ratio);
        std::printf("    %s: best train HTE %.4f (epoch %zu), control %.4f, ratio %.2f%%, epoch 1 train HTE %.4f\n",
                    regime, best_train, best_epoch, control_hte, 100.0 * ratio,
                    result.epochs.front().train_hte);
        std::fflush(stdout);
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 600.0;
    return {ok, detail + fmt("%.0fs (<600s)", secs)};
}

// 6. Qualitative ordering at desk scale.
Outcome qualitative_ordering()
{
    constexpr std::size_t kEpochs = 20;
    const auto t0 = Clock::now();
    data::GeneratorConfig gen;
    gen.n_vessels = 200;
    gen.delta_t_outlier_rate = 0.05;
    const auto net = data::generate_synthetic(gen, Rng(2021).fork(Stream::kGenerator));
    const auto r = experiment::regime_preset("medium");
    experiment::RunSpec spec;
    spec.model.window = r.window;
    spec.model.horizon = r.horizon;
    spec.train.max_epochs = kEpochs;
    const std::vector<std::uint64_t> seeds(std::begin(train::kProtocolSeeds), std::end(train::kProtocolSeeds));

    std::vector<double> rpd_proposed, rpd_lstm;
    for (const auto kind : {models::ForecasterKind::kProposed, models::ForecasterKind::kLstm}) {
        experiment::RunSpec s = spec;
        s.model.kind = kind;
        const auto runs = experiment::run_seeds(net, s, seeds, experiment::thread_cap());
        for (const auto& run : runs) {
            (kind == models::ForecasterKind::kProposed ? rpd_proposed : rpd_lstm).push_back(run.test_report.rpd);
            std::printf("    %s seed %llu: test RPD %+.4f, HTE %.3f, best epoch %zu\n",
                        std::string(models::to_string(kind)).c_str(), static_cast<unsigned long long>(run.seed),
                        run.test_report.rpd, run.test_report.hte, run.best_epoch);
            std::fflush(stdout);
        }
    }
    const auto p = experiment::summarize(rpd_proposed);
    const auto l = experiment::summarize(rpd_lstm);
    const double secs = seconds_since(t0);
    const bool ok = std::abs(p.mean) <= std::abs(l.mean) && secs < 1800.0;
    return {ok, fmt("%zu epochs, mean test RPD proposed %+.4f +- %.4f vs LSTM %+.4f +- %.4f (|proposed| <= |LSTM|), "
                    "%.0fs (<1800s)",
                    kEpochs, p.mean, p.stddev, l.mean, l.stddev, secs)};
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

int run_cli(const std::string& args, const fs::path& log)
{
    const std::string cmd = std::string("\"") + AISF_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 7. Determinism.
Outcome determinism()
{
    const fs::path dir = scratch_dir("determinism");
    const std::string common = "train --generate --vessels 20 --model proposed --regime low --epochs 4 --seed 2021";
    const int a = run_cli(common + " --out \"" + (dir / "a").string() + "\"", dir / "a.log");
    const int b = run_cli(common + " --out \"" + (dir / "b").string() + "\"", dir / "b.log");
    const std::string csv_a = read_file(dir / "a" / "epochs.csv");
    const std::string csv_b = read_file(dir / "b" / "epochs.csv");
    const bool cli_same = a == 0 && b == 0 && !csv_a.empty() && csv_a == csv_b;

    // Concurrent runs of the same spec must not interfere either.
    data::GeneratorConfig gen;
    gen.n_vessels = 20;
    const auto net = data::generate_synthetic(gen, Rng(2021).fork(Stream::kGenerator));
    experiment::RunSpec spec;
    spec.model.window = 15;
    spec.model.horizon = 5;
    spec.model.block.conv_out_channels = 16;
    spec.model.block.hidden_size = 16;
    spec.train.max_epochs = 3;
    const std::vector<std::uint64_t> seeds{2021, 2021};
    const auto runs = experiment::run_seeds(net, spec, seeds, 2);
    train::write_epoch_log(dir / "t0.csv", runs[0].epochs);
    train::write_epoch_log(dir / "t1.csv", runs[1].epochs);
    const bool threads_same = read_file(dir / "t0.csv") == read_file(dir / "t1.csv");
    return {cli_same && threads_same,
            fmt("two CLI runs: exit %d/%d, epoch CSVs identical %s (%zu bytes); concurrent in-process runs identical %s",
                a, b, yes_no(cli_same), csv_a.size(), yes_no(threads_same))};
}

// 8. End-to-end CLI smoke.
Outcome cli_smoke()
{
    const auto t0 = Clock::now();
    const fs::path dir = scratch_dir("smoke");
    const std::string data = (dir / "data" / "ais.csv").string();
    const int g = run_cli("generate --vessels 200 --seed 2021 --out \"" + (dir / "data").string() + "\"",
                          dir / "generate.log");
    const int t = run_cli("train --data \"" + data + "\" --model proposed --regime low --epochs 5 --out \""
                              + (dir / "run").string() + "\"",
                          dir / "train.log");
    const int e = run_cli("evaluate --data \"" + data + "\" --checkpoint \"" + (dir / "run" / "checkpoint.json").string()
                              + "\" --per-step --out \"" + (dir / "eval").string() + "\"",
                          dir / "evaluate.log");
    const double secs = seconds_since(t0);
    double diff = -1.0;
    if (t == 0 && e == 0) {
        const auto trained = nlohmann::json::parse(read_file(dir / "run" / "report.json"));
        const auto evaluated = nlohmann::json::parse(read_file(dir / "eval" / "evaluation.json"));
        diff = 0.0;
        for (const char* k : {"hte", "mae", "huber", "rmse", "rpd"}) {
            diff = std::max(diff, std::abs(trained[k].get<double>() - evaluated[k].get<double>()));
        }
    }
    const bool ok = g == 0 && t == 0 && e == 0 && diff >= 0.0 && diff <= 1e-10 && secs < 180.0;
    return {ok, fmt("generate/train/evaluate exit %d/%d/%d, evaluate vs train report %.1e, %.1fs (<180s)", g, t, e,
                    diff, secs)};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"gradient suite", gradient_suite},
        {"oracle equivalence", oracle_equivalence},
        {"metric identities", metric_identities},
        {"pipeline identities", pipeline_identities},
        {"overfit capacity", overfit_capacity},
        {"qualitative ordering", qualitative_ordering},
        {"determinism", determinism},
        {"cli smoke", cli_smoke},
    };
    std::set<std::size_t> selected;
    for (int i = 1; i < argc; ++i) {
        selected.insert(static_cast<std::size_t>(std::atoi(argv[i])));
    }
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected.empty() && !selected.count(i + 1)) {
            continue;
        }
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        all = all && out.passed;
        std::printf("[%s] criterion %zu (%s): %s\n", out.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    out.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
