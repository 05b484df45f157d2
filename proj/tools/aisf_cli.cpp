#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aisf/data/csv.hpp"
#include "aisf/data/stats.hpp"
#include "aisf/data/synthetic.hpp"
#include "aisf/errors.hpp"
#include "aisf/experiment.hpp"
#include "aisf/gradcheck.hpp"
#include "aisf/train/checkpoint.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataFlags {
    std::string data_path;
    bool generate = false;
    std::size_t vessels = 200;
    double outlier_rate = 0.0;
    std::uint64_t data_seed = 2021;
};

struct ShapeFlags {
    std::string regime;
    std::optional<std::size_t> window;
    std::optional<std::size_t> horizon;
};

void add_data_flags(CLI::App* cmd, DataFlags& f)
{
    auto* data = cmd->add_option("--data", f.data_path, "AIS CSV (vessel_id,timestamp,lat,lon,cog,sog)")
                     ->check(CLI::ExistingFile);
    auto* gen = cmd->add_flag("--generate", f.generate, "Use a synthetic network instead of --data");
    data->excludes(gen);
    cmd->add_option("--vessels", f.vessels, "Vessels for --generate")->check(CLI::PositiveNumber);
    cmd->add_option("--outlier-rate", f.outlier_rate, "Heavy-tail interval probability for --generate")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--data-seed", f.data_seed, "Generator seed for --generate");
}

void add_shape_flags(CLI::App* cmd, ShapeFlags& f)
{
    cmd->add_option("--regime", f.regime, "Complexity preset")->check(CLI::IsMember({"low", "medium", "high"}));
    cmd->add_option("--window", f.window, "Input messages per sample (overrides --regime)")->check(CLI::PositiveNumber);
    cmd->add_option("--horizon", f.horizon, "Predicted messages per sample (overrides --regime)")
        ->check(CLI::PositiveNumber);
}

aisf::data::TrajectoryNetwork load_network(const DataFlags& f)
{
    if (f.generate == !f.data_path.empty()) {
        throw UsageError("exactly one of --data PATH or --generate is required");
    }
    if (f.generate) {
        aisf::data::GeneratorConfig g;
        g.n_vessels = f.vessels;
        g.delta_t_outlier_rate = f.outlier_rate;
        return aisf::data::generate_synthetic(g, aisf::Rng(f.data_seed).fork(aisf::Stream::kGenerator));
    }
    aisf::data::LoadReport rep;
    auto net = aisf::data::load_csv(f.data_path, &rep);
    std::cerr << "loaded " << rep.messages << " messages from " << net.vessel_count() << " vessels (" << rep.malformed
              << " malformed, " << rep.duplicates << " duplicate rows skipped)\n";
    return net;
}

void write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw aisf::FormatError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

void resolve_shape(const ShapeFlags& f, aisf::models::ModelConfig& cfg)
{
    if (!f.regime.empty()) {
        const auto r = aisf::experiment::regime_preset(f.regime);
        cfg.window = r.window;
        cfg.horizon = r.horizon;
    }
    if (f.window) cfg.window = *f.window;
    if (f.horizon) cfg.horizon = *f.horizon;
}

std::string pm(const json& agg, const char* key)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.6g +- %.3g", agg[key]["mean"].get<double>(), agg[key]["std"].get<double>());
    return buf;
}

// ---- generate ----

struct GenerateFlags {
    std::size_t vessels = 200;
    std::uint64_t seed = 2021;
    double outlier_rate = 0.0;
    std::size_t min_messages = 81;
    std::size_t max_messages = 5000;
    std::string out;
};

int cmd_generate(const GenerateFlags& f)
{
    aisf::data::GeneratorConfig g;
    g.n_vessels = f.vessels;
    g.delta_t_outlier_rate = f.outlier_rate;
    g.min_messages = f.min_messages;
    g.max_messages = f.max_messages;
    try {
        g.validate();
    } catch (const aisf::ConfigError& e) {
        throw UsageError(e.what());
    }
    const auto net = aisf::data::generate_synthetic(g, aisf::Rng(f.seed).fork(aisf::Stream::kGenerator));
    fs::create_directories(f.out);
    aisf::data::write_csv(net, fs::path(f.out) / "ais.csv");
    json report = aisf::data::to_json(aisf::data::network_stats(net));
    report["seed"] = f.seed;
    report["outlier_rate"] = f.outlier_rate;
    write_json(fs::path(f.out) / "generate_report.json", report);
    std::cout << report.dump(2) << '\n';
    return kExitOk;
}

// ---- train ----

struct TrainFlags {
    DataFlags data;
    ShapeFlags shape;
    std::string model = "proposed";
    std::size_t channels = 128;
    std::size_t hidden = 128;
    std::size_t layers = 1;
    bool bidirectional = false;
    std::string rnn = "lstm";
    bool isolate = false;
    double dropout = 0.1;
    std::uint64_t seed = 2021;
    std::string seeds;
    std::size_t epochs = 50;
    double test_fraction = 0.2;
    std::size_t batch_size = 128;
    double lr = 1e-3;
    std::size_t windows_per_vessel = 25;
    std::string out;
};

aisf::experiment::RunSpec build_spec(const TrainFlags& f)
{
    aisf::experiment::RunSpec spec;
    auto& m = spec.model;
    m.kind = aisf::models::parse_kind(f.model);
    resolve_shape(f.shape, m);
    m.block.conv_out_channels = f.channels;
    m.block.hidden_size = f.hidden;
    m.block.num_layers = f.layers;
    m.block.bidirectional = f.bidirectional;
    m.block.rnn = aisf::nn::parse_rnn_kind(f.rnn);
    m.block.isolate_variables = f.isolate;
    m.block.dropout_p = f.dropout;
    spec.train.seed = f.seed;
    spec.train.max_epochs = f.epochs;
    spec.train.batch_size = f.batch_size;
    spec.train.lr = f.lr;
    spec.windows_per_vessel = f.windows_per_vessel;
    spec.test_fraction = f.test_fraction;
    try {
        m.validate();
        spec.train.validate();
    } catch (const aisf::ConfigError& e) {
        throw UsageError(e.what());
    }
    return spec;
}

void save_run(const fs::path& dir, const aisf::experiment::RunOutput& run, const aisf::experiment::RunSpec& spec)
{
    fs::create_directories(dir);
    if (run.model->has_state()) {
        aisf::train::save_checkpoint(dir / "checkpoint.json",
                                     aisf::train::make_checkpoint(*run.model, run.scaler, run.seed,
                                                                  spec.test_fraction, spec.windows_per_vessel));
    }
    if (!run.epochs.empty()) {
        aisf::train::write_epoch_log(dir / "epochs.csv", run.epochs);
    }
    write_json(dir / "report.json", aisf::experiment::run_json(run, spec));
}

int cmd_train(const TrainFlags& f)
{
    const auto spec = build_spec(f);
    const auto net = load_network(f.data);
    const fs::path out(f.out);

    if (f.seeds.empty()) {
        const auto run = aisf::experiment::run(net, spec, [](const aisf::train::EpochRecord& e) {
            std::printf("epoch %3zu  train_hte %.6g  test_hte %.6g  lr %.3g\n", e.epoch, e.train_hte, e.test_hte,
                        e.lr);
            std::fflush(stdout);
        });
        save_run(out, run, spec);
        const auto& r = run.test_report;
        std::printf("%s seed %llu: test hte %.6g  rpd %.6g  rmse %.6g  mae %.6g  huber %.6g\n", f.model.c_str(),
                    static_cast<unsigned long long>(run.seed), r.hte, r.rpd, r.rmse, r.mae, r.huber);
        return kExitOk;
    }

    const std::vector<std::uint64_t> seeds(std::begin(aisf::train::kProtocolSeeds), std::end(aisf::train::kProtocolSeeds));
    const auto runs = aisf::experiment::run_seeds(net, spec, seeds, aisf::experiment::thread_cap());
    json all = json::array();
    for (const auto& run : runs) {
        save_run(out / ("seed_" + std::to_string(run.seed)), run, spec);
        all.push_back(aisf::experiment::run_json(run, spec));
    }
    const json agg = aisf::experiment::aggregate(runs);
    write_json(out / "report.json", json{{"model", f.model}, {"runs", all}, {"aggregate", agg}});
    std::printf("%s over %zu seeds: hte %s  rpd %s  rmse %s  mae %s  huber %s\n", f.model.c_str(), runs.size(),
                pm(agg, "hte").c_str(), pm(agg, "rpd").c_str(), pm(agg, "rmse").c_str(), pm(agg, "mae").c_str(),
                pm(agg, "huber").c_str());
    return kExitOk;
}

// ---- evaluate ----

struct EvaluateFlags {
    DataFlags data;
    ShapeFlags shape;
    std::string checkpoint;
    bool per_step = false;
    std::string out;
};

int cmd_evaluate(const EvaluateFlags& f)
{
    const auto ckpt = aisf::train::load_checkpoint(f.checkpoint);
    aisf::models::ModelConfig requested = ckpt.model;
    resolve_shape(f.shape, requested);
    if (requested.window != ckpt.model.window || requested.horizon != ckpt.model.horizon) {
        throw aisf::DimensionError("checkpoint was trained with w=" + std::to_string(ckpt.model.window)
                                   + ", s=" + std::to_string(ckpt.model.horizon) + " but w="
                                   + std::to_string(requested.window) + ", s=" + std::to_string(requested.horizon)
                                   + " was requested");
    }
    const auto model = aisf::train::restore_model(ckpt);
    const auto net = load_network(f.data);
    const auto prepared = aisf::experiment::prepare_data(net, ckpt.model.window, ckpt.model.horizon,
                                                         ckpt.windows_per_vessel, ckpt.test_fraction, ckpt.seed);
    const auto report = aisf::train::evaluate(*model, prepared.test, ckpt.scaler);

    fs::create_directories(f.out);
    json j = aisf::train::to_json(report);
    j["seed"] = ckpt.seed;
    j["window"] = ckpt.model.window;
    j["horizon"] = ckpt.model.horizon;
    j["model"] = aisf::models::to_string(ckpt.model.kind);
    j["n_test_windows"] = prepared.test.size();
    write_json(fs::path(f.out) / "evaluation.json", j);
    if (f.per_step) {
        const auto steps = aisf::train::evaluate_per_step(*model, prepared.test, ckpt.scaler);
        aisf::train::write_per_step_csv(fs::path(f.out) / "per_step.csv", steps);
    }
    std::printf("test hte %.6g  rpd %.6g  rmse %.6g  mae %.6g  huber %.6g  (%zu windows)\n", report.hte, report.rpd,
                report.rmse, report.mae, report.huber, prepared.test.size());
    return kExitOk;
}

// ---- gradcheck ----

int cmd_gradcheck(const aisf::gradcheck::Options& opt)
{
    const auto rows = aisf::gradcheck::run(opt);
    if (rows.empty()) {
        throw UsageError("no gradient-check row matches '" + opt.filter + "'");
    }
    std::cout << aisf::gradcheck::format_table(rows);
    bool ok = true;
    for (const auto& r : rows) {
        ok = ok && r.passed;
    }
    std::cout << (ok ? "all rows PASS\n" : "some rows FAIL\n");
    return ok ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-step AIS trajectory forecasting"};
    app.require_subcommand(1);

    GenerateFlags gen;
    auto* g = app.add_subcommand("generate", "Write a synthetic AIS network and its statistics");
    g->add_option("--vessels", gen.vessels, "Number of vessels")->check(CLI::PositiveNumber);
    g->add_option("--seed", gen.seed, "Generator seed");
    g->add_option("--outlier-rate", gen.outlier_rate, "Probability of a heavy-tailed interval")
        ->check(CLI::Range(0.0, 1.0));
    g->add_option("--min-messages", gen.min_messages, "Smallest trajectory length")->check(CLI::PositiveNumber);
    g->add_option("--max-messages", gen.max_messages, "Largest trajectory length")->check(CLI::PositiveNumber);
    g->add_option("--out", gen.out, "Output directory")->required();

    TrainFlags tr;
    auto* t = app.add_subcommand("train", "Train (or fit) a forecaster and report test metrics");
    add_data_flags(t, tr.data);
    add_shape_flags(t, tr.shape);
    t->add_option("--model", tr.model, "Forecaster")
        ->check(CLI::IsMember({"proposed", "feed_forward", "elman", "gru", "lstm", "fc_cnn", "control", "chain"}));
    t->add_option("--channels", tr.channels, "Convolution output channels")
        ->check(CLI::IsMember({8, 16, 32, 64, 128}));
    t->add_option("--hidden", tr.hidden, "Recurrent hidden size")->check(CLI::PositiveNumber);
    t->add_option("--layers", tr.layers, "Stacked recurrent layers")->check(CLI::Range(1, 3));
    t->add_flag("--bidirectional", tr.bidirectional, "Bidirectional recurrent layers");
    t->add_option("--rnn", tr.rnn, "Recurrent cell of the proposed blocks")
        ->check(CLI::IsMember({"lstm", "gru", "elman"}));
    t->add_flag("--isolate-variables", tr.isolate, "Width-1 kernel in the first block");
    t->add_option("--dropout", tr.dropout, "Dropout probability")->check(CLI::Range(0.0, 0.99));
    auto* seed = t->add_option("--seed", tr.seed, "Run seed");
    auto* seeds = t->add_option("--seeds", tr.seeds, "'all' runs the five protocol seeds")
                      ->check(CLI::IsMember({"all"}));
    seed->excludes(seeds);
    t->add_option("--epochs", tr.epochs, "Training epochs")->check(CLI::PositiveNumber);
    t->add_option("--test-fraction", tr.test_fraction, "Share of windows held out")->check(CLI::Range(0.0, 1.0));
    t->add_option("--batch-size", tr.batch_size, "Windows per mini-batch")->check(CLI::PositiveNumber);
    t->add_option("--lr", tr.lr, "Initial learning rate")->check(CLI::PositiveNumber);
    t->add_option("--windows-per-vessel", tr.windows_per_vessel, "Windows sampled per trajectory")
        ->check(CLI::PositiveNumber);
    t->add_option("--out", tr.out, "Output directory")->required();

    EvaluateFlags ev;
    auto* e = app.add_subcommand("evaluate", "Evaluate a checkpoint on its held-out windows");
    add_data_flags(e, ev.data);
    add_shape_flags(e, ev.shape);
    e->add_option("--checkpoint", ev.checkpoint, "checkpoint.json from train")->required()->check(CLI::ExistingFile);
    e->add_flag("--per-step", ev.per_step, "Also write per-horizon-step metrics CSV");
    e->add_option("--out", ev.out, "Output directory")->required();

    aisf::gradcheck::Options gc;
    auto* c = app.add_subcommand("gradcheck", "Finite-difference and reference gradient checks");
    c->add_option("--layer", gc.filter, "Only rows whose name contains this token");
    c->add_option("--trials", gc.trials, "Random trials per row")->check(CLI::PositiveNumber);
    c->add_option("--seed", gc.seed, "Seed");
    c->add_flag("--inject-wrong-sign", gc.inject_wrong_sign, "Negate analytic gradients (negative control)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kExitUsage;
    }

    try {
        if (*g) return cmd_generate(gen);
        if (*t) return cmd_train(tr);
        if (*e) return cmd_evaluate(ev);
        if (*c) return cmd_gradcheck(gc);
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << '\n';
        return kExitUsage;
    } catch (const aisf::ConfigError& err) {
        std::cerr << "usage error: " << err.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
