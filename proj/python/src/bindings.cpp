#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "aisf/data/csv.hpp"
#include "aisf/data/stats.hpp"
#include "aisf/data/synthetic.hpp"
#include "aisf/errors.hpp"
#include "aisf/experiment.hpp"
#include "aisf/gradcheck.hpp"
#include "aisf/train/checkpoint.hpp"
#include "aisf/train/metrics.hpp"

namespace py = pybind11;
using namespace aisf;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a)
{
    Shape shape(a.shape(), a.shape() + a.ndim());
    return Tensor(std::move(shape), std::vector<double>(a.data(), a.data() + a.size()));
}

py::object to_py(const nlohmann::json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

data::TrajectoryNetwork generate(std::size_t n_vessels, std::uint64_t seed, double outlier_rate,
                                 std::size_t min_messages, std::size_t max_messages)
{
    data::GeneratorConfig g;
    g.n_vessels = n_vessels;
    g.delta_t_outlier_rate = outlier_rate;
    g.min_messages = min_messages;
    g.max_messages = max_messages;
    return data::generate_synthetic(g, Rng(seed).fork(Stream::kGenerator));
}

py::tuple trajectory(const data::TrajectoryNetwork& net, const std::string& id)
{
    const auto& t = net.at(id);
    py::array_t<std::int64_t> ts(static_cast<py::ssize_t>(t.size()));
    Array features({static_cast<py::ssize_t>(t.size()), static_cast<py::ssize_t>(data::kNumVariables)});
    auto tv = ts.mutable_unchecked<1>();
    auto fv = features.mutable_unchecked<2>();
    for (std::size_t i = 0; i < t.size(); ++i) {
        tv(static_cast<py::ssize_t>(i)) = t.messages[i].timestamp;
        const auto f = t.messages[i].features();
        for (std::size_t v = 0; v < f.size(); ++v) fv(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(v)) = f[v];
    }
    return py::make_tuple(ts, features);
}

experiment::RunSpec make_spec(const std::string& model, const std::string& regime, std::optional<std::size_t> window,
                              std::optional<std::size_t> horizon, std::size_t epochs, std::uint64_t seed,
                              std::size_t channels, std::size_t hidden, std::size_t layers, bool bidirectional,
                              const std::string& rnn, double dropout, std::size_t batch_size, double lr,
                              double test_fraction, std::size_t windows_per_vessel)
{
    experiment::RunSpec spec;
    auto& m = spec.model;
    m.kind = models::parse_kind(model);
    const auto r = experiment::regime_preset(regime);
    m.window = window.value_or(r.window);
    m.horizon = horizon.value_or(r.horizon);
    m.block.conv_out_channels = channels;
    m.block.hidden_size = hidden;
    m.block.num_layers = layers;
    m.block.bidirectional = bidirectional;
    m.block.rnn = nn::parse_rnn_kind(rnn);
    m.block.dropout_p = dropout;
    spec.train.max_epochs = epochs;
    spec.train.seed = seed;
    spec.train.batch_size = batch_size;
    spec.train.lr = lr;
    spec.test_fraction = test_fraction;
    spec.windows_per_vessel = windows_per_vessel;
    m.validate();
    spec.train.validate();
    return spec;
}

nlohmann::json epochs_json(const std::vector<train::EpochRecord>& epochs)
{
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : epochs) {
        j.push_back({{"epoch", e.epoch}, {"train_hte", e.train_hte}, {"test_hte", e.test_hte}, {"lr", e.lr}});
    }
    return j;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "AIS trajectory forecasting core";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_RuntimeError);
    py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<data::TrajectoryNetwork>(m, "Network")
        .def_property_readonly("vessel_count", &data::TrajectoryNetwork::vessel_count)
        .def_property_readonly("total_messages", &data::TrajectoryNetwork::total_messages)
        .def("vessel_ids",
             [](const data::TrajectoryNetwork& n) {
                 std::vector<std::string> ids;
                 for (const auto& [id, t] : n) ids.push_back(id);
                 return ids;
             })
        .def("trajectory", &trajectory, py::arg("vessel_id"),
             "(timestamps, features) with features ordered lat, lon, delta_t, cog, sog")
        .def("stats", [](const data::TrajectoryNetwork& n) { return to_py(data::to_json(data::network_stats(n))); })
        .def("write_csv", [](const data::TrajectoryNetwork& n, const std::string& path) { data::write_csv(n, path); })
        .def("__len__", &data::TrajectoryNetwork::vessel_count);

    m.def("generate", &generate, py::arg("n_vessels") = 200, py::arg("seed") = 2021, py::arg("outlier_rate") = 0.0,
          py::arg("min_messages") = 81, py::arg("max_messages") = 5000);
    m.def(
        "load_csv",
        [](const std::string& path) {
            data::LoadReport rep;
            auto net = data::load_csv(path, &rep);
            py::dict d;
            d["rows"] = rep.rows;
            d["malformed"] = rep.malformed;
            d["duplicates"] = rep.duplicates;
            d["messages"] = rep.messages;
            return py::make_tuple(std::move(net), d);
        },
        py::arg("path"));

    m.def("hte", [](const Array& p, const Array& y) { return train::hte(to_tensor(p), to_tensor(y)); });
    m.def("rpd", [](const Array& p, const Array& y) { return train::rpd(to_tensor(p), to_tensor(y)); });
    m.def("rmse", [](const Array& p, const Array& y) { return train::rmse(to_tensor(p), to_tensor(y)); });
    m.def("mae", [](const Array& p, const Array& y) { return train::mae(to_tensor(p), to_tensor(y)); });
    m.def(
        "huber", [](const Array& p, const Array& y, double delta) { return train::huber(to_tensor(p), to_tensor(y), delta); },
        py::arg("pred"), py::arg("target"), py::arg("delta") = 1.0);
    m.def(
        "metric_report",
        [](const Array& p, const Array& y) { return to_py(train::to_json(train::compute_report(to_tensor(p), to_tensor(y)))); },
        py::arg("pred"), py::arg("target"), "All metrics plus a per-variable breakdown over the last axis");

    m.def("regime", [](const std::string& name) {
        const auto r = experiment::regime_preset(name);
        return py::make_tuple(r.window, r.horizon);
    });

    m.def(
        "train",
        [](const data::TrajectoryNetwork& net, const std::string& model, const std::string& regime,
           std::optional<std::size_t> window, std::optional<std::size_t> horizon, std::size_t epochs,
           std::uint64_t seed, std::size_t channels, std::size_t hidden, std::size_t layers, bool bidirectional,
           const std::string& rnn, double dropout, std::size_t batch_size, double lr, double test_fraction,
           std::size_t windows_per_vessel, std::optional<std::string> checkpoint) {
            const auto spec = make_spec(model, regime, window, horizon, epochs, seed, channels, hidden, layers,
                                        bidirectional, rnn, dropout, batch_size, lr, test_fraction,
                                        windows_per_vessel);
            nlohmann::json j;
            {
                py::gil_scoped_release release;
                const auto run = experiment::run(net, spec);
                j = experiment::run_json(run, spec);
                j["epoch_log"] = epochs_json(run.epochs);
                if (checkpoint && run.model->has_state()) {
                    train::save_checkpoint(*checkpoint,
                                           train::make_checkpoint(*run.model, run.scaler, run.seed,
                                                                  spec.test_fraction, spec.windows_per_vessel));
                }
            }
            return to_py(j);
        },
        py::arg("network"), py::arg("model") = "proposed", py::arg("regime") = "low", py::arg("window") = py::none(),
        py::arg("horizon") = py::none(), py::arg("epochs") = 50, py::arg("seed") = 2021, py::arg("channels") = 128,
        py::arg("hidden") = 128, py::arg("layers") = 1, py::arg("bidirectional") = false, py::arg("rnn") = "lstm",
        py::arg("dropout") = 0.1, py::arg("batch_size") = 128, py::arg("lr") = 1e-3, py::arg("test_fraction") = 0.2,
        py::arg("windows_per_vessel") = 25, py::arg("checkpoint") = py::none(),
        "Train or fit one model for one seed; returns the test report with an epoch log");

    m.def(
        "train_seeds",
        [](const data::TrajectoryNetwork& net, const std::string& model, const std::string& regime,
           std::size_t epochs, std::size_t channels, std::size_t hidden, std::optional<std::vector<std::uint64_t>> seeds) {
            const auto spec = make_spec(model, regime, std::nullopt, std::nullopt, epochs, 2021, channels, hidden, 1,
                                        false, "lstm", 0.1, 128, 1e-3, 0.2, 25);
            const std::vector<std::uint64_t> s
                = seeds.value_or(std::vector<std::uint64_t>(std::begin(train::kProtocolSeeds), std::end(train::kProtocolSeeds)));
            nlohmann::json j;
            {
                py::gil_scoped_release release;
                const auto runs = experiment::run_seeds(net, spec, s, experiment::thread_cap());
                j["runs"] = nlohmann::json::array();
                for (const auto& r : runs) j["runs"].push_back(experiment::run_json(r, spec));
                j["aggregate"] = experiment::aggregate(runs);
            }
            return to_py(j);
        },
        py::arg("network"), py::arg("model") = "proposed", py::arg("regime") = "low", py::arg("epochs") = 50,
        py::arg("channels") = 128, py::arg("hidden") = 128, py::arg("seeds") = py::none(),
        "Same configuration over several seeds; returns per-run reports and mean/std");

    m.def(
        "evaluate",
        [](const data::TrajectoryNetwork& net, const std::string& checkpoint) {
            const auto ckpt = train::load_checkpoint(checkpoint);
            const auto model = train::restore_model(ckpt);
            const auto prepared = experiment::prepare_data(net, ckpt.model.window, ckpt.model.horizon,
                                                           ckpt.windows_per_vessel, ckpt.test_fraction, ckpt.seed);
            return to_py(train::to_json(train::evaluate(*model, prepared.test, ckpt.scaler)));
        },
        py::arg("network"), py::arg("checkpoint"), "Metrics of a saved model on its own held-out windows");

    m.def(
        "gradcheck",
        [](const std::string& filter, std::size_t trials, std::uint64_t seed, bool inject_wrong_sign) {
            gradcheck::Options opt;
            opt.filter = filter;
            opt.trials = trials;
            opt.seed = seed;
            opt.inject_wrong_sign = inject_wrong_sign;
            std::vector<gradcheck::Row> rows;
            {
                py::gil_scoped_release release;
                rows = gradcheck::run(opt);
            }
            py::list out;
            for (const auto& r : rows) {
                py::dict d;
                d["name"] = r.name;
                d["trials"] = r.trials;
                d["max_rel_error"] = r.max_rel_error;
                d["tolerance"] = r.tolerance;
                d["passed"] = r.passed;
                out.append(d);
            }
            return out;
        },
        py::arg("filter") = "", py::arg("trials") = 100, py::arg("seed") = 2021, py::arg("inject_wrong_sign") = false);
}
