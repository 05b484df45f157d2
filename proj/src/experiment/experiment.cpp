#include "aisf/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "aisf/errors.hpp"
#include "aisf/models/baselines.hpp"
#include "aisf/rng.hpp"
#include "aisf/train/checkpoint.hpp"

namespace aisf::experiment {

Regime regime_preset(std::string_view name)
{
    if (name == "low") return {15, 5};
    if (name == "medium") return {15, 25};
    if (name == "high") return {30, 50};
    throw ConfigError("unknown regime '" + std::string(name) + "' (expected low, medium or high)");
}

PreparedData prepare_data(const data::TrajectoryNetwork& network, std::size_t window, std::size_t horizon,
                          std::size_t windows_per_vessel, double test_fraction, std::uint64_t seed)
{
    const Rng root(seed);
    data::WindowingResult windows
        = data::sample_network(network, window, horizon, windows_per_vessel, root.fork(Stream::kWindows));
    if (windows.samples.empty()) {
        throw DataError("no trajectory is long enough for w=" + std::to_string(window) + ", s="
                        + std::to_string(horizon) + ": each vessel needs at least " + std::to_string(window + horizon)
                        + " messages");
    }
    PreparedData out;
    out.skipped = std::move(windows.skipped);
    data::TrainTestSplit split = data::split_train_test(std::move(windows.samples), test_fraction,
                                                        root.fork(Stream::kSplit));
    out.train = std::move(split.train);
    out.test = std::move(split.test);
    out.scaler.fit(std::span<const data::WindowSample>(out.train));
    return out;
}

RunOutput run(const data::TrajectoryNetwork& network, const RunSpec& spec, const train::EpochCallback& on_epoch)
{
    spec.model.validate();
    spec.train.validate();
    const std::uint64_t seed = spec.train.seed;
    PreparedData prepared = prepare_data(network, spec.model.window, spec.model.horizon, spec.windows_per_vessel,
                                         spec.test_fraction, seed);

    RunOutput out;
    out.seed = seed;
    out.n_train = prepared.train.size();
    out.n_test = prepared.test.size();
    out.scaler = prepared.scaler;
    Rng init_rng = Rng(seed).fork(Stream::kInit);
    out.model = models::make_forecaster(spec.model, init_rng);

    if (auto* net = dynamic_cast<models::NeuralForecaster*>(out.model.get())) {
        train::TrainResult result = train::train(*net, prepared.train, prepared.test, prepared.scaler, spec.train,
                                                 on_epoch);
        out.epochs = std::move(result.epochs);
        out.best_epoch = result.best_epoch;
        out.test_report = std::move(result.test_report);
        return out;
    }
    if (auto* chain = dynamic_cast<models::ChainModel*>(out.model.get())) {
        train::fit_chain(*chain, prepared.train, prepared.scaler);
    }
    out.test_report = train::evaluate(*out.model, prepared.test, prepared.scaler);
    return out;
}

std::size_t thread_cap()
{
    if (const char* env = std::getenv("AISF_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            return static_cast<std::size_t>(v);
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::vector<RunOutput> run_seeds(const data::TrajectoryNetwork& network, const RunSpec& spec,
                                 std::span<const std::uint64_t> seeds, std::size_t max_threads)
{
    std::vector<RunOutput> results(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
                RunSpec s = spec;
                s.train.seed = seeds[i];
                results[i] = run(network, s);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(max_threads, 1, std::max<std::size_t>(1, seeds.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return results;
}

Summary summarize(std::span<const double> values)
{
    Summary s;
    if (values.empty()) {
        return s;
    }
    for (double v : values) {
        s.mean += v;
    }
    s.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) {
            sq += (v - s.mean) * (v - s.mean);
        }
        s.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
    return s;
}

nlohmann::json aggregate(std::span<const RunOutput> runs)
{
    nlohmann::json j;
    const std::pair<const char*, double train::Metrics::*> fields[] = {
        {"hte", &train::Metrics::hte},   {"mae", &train::Metrics::mae}, {"huber", &train::Metrics::huber},
        {"rmse", &train::Metrics::rmse}, {"rpd", &train::Metrics::rpd},
    };
    for (const auto& [name, field] : fields) {
        std::vector<double> values;
        for (const auto& r : runs) {
            values.push_back(r.test_report.*field);
        }
        const Summary s = summarize(values);
        j[name] = {{"mean", s.mean}, {"std", s.stddev}};
    }
    std::vector<std::uint64_t> seeds;
    for (const auto& r : runs) {
        seeds.push_back(r.seed);
    }
    j["seeds"] = seeds;
    j["n_runs"] = runs.size();
    return j;
}

nlohmann::json run_json(const RunOutput& run, const RunSpec& spec)
{
    nlohmann::json j = train::to_json(run.test_report);
    j["seed"] = run.seed;
    j["window"] = spec.model.window;
    j["horizon"] = spec.model.horizon;
    j["model"] = models::to_string(spec.model.kind);
    j["model_config"] = train::to_json(spec.model);
    j["n_train_windows"] = run.n_train;
    j["n_test_windows"] = run.n_test;
    j["epochs"] = run.epochs.size();
    j["best_epoch"] = run.best_epoch;
    return j;
}

}  // namespace aisf::experiment
