#include "aisf/data/windows.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "aisf/errors.hpp"

namespace aisf::data {

namespace {

Tensor slice_rows(const Trajectory& traj, std::size_t begin, std::size_t count)
{
    Tensor out({count, kNumVariables});
    for (std::size_t r = 0; r < count; ++r) {
        const auto f = traj.messages[begin + r].features();
        for (std::size_t v = 0; v < kNumVariables; ++v) {
            out.at(r, v) = f[v];
        }
    }
    return out;
}

}  // namespace

std::vector<WindowSample> sample_windows(const Trajectory& traj, std::size_t w, std::size_t s, std::size_t count,
                                         Rng& rng)
{
    if (w == 0 || s == 0) {
        throw ConfigError("window and horizon must be >= 1");
    }
    const std::size_t len = traj.size();
    if (len < w + s) {
        return {};
    }
    const std::size_t candidates = len - w - s + 1;
    const std::size_t take = std::min(count, candidates);
    // Partial Fisher-Yates over the candidate starts.
    std::vector<std::size_t> starts(candidates);
    std::iota(starts.begin(), starts.end(), std::size_t{0});
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + rng.below(candidates - i);
        std::swap(starts[i], starts[j]);
    }
    starts.resize(take);
    std::sort(starts.begin(), starts.end());

    std::vector<WindowSample> out;
    out.reserve(take);
    for (std::size_t st : starts) {
        out.push_back(WindowSample{traj.vessel_id, st, slice_rows(traj, st, w), slice_rows(traj, st + w, s)});
    }
    return out;
}

WindowingResult sample_network(const TrajectoryNetwork& network, std::size_t w, std::size_t s,
                               std::size_t count, const Rng& rng)
{
    WindowingResult result;
    std::uint64_t index = 0;
    for (const auto& [id, traj] : network) {
        Rng vessel_rng = rng.fork(index++);
        auto samples = sample_windows(traj, w, s, count, vessel_rng);
        if (samples.empty()) {
            result.skipped.emplace_back(id, "trajectory has " + std::to_string(traj.size())
                                                + " messages, fewer than window + horizon = "
                                                + std::to_string(w + s));
            continue;
        }
        for (auto& smp : samples) {
            result.samples.push_back(std::move(smp));
        }
    }
    return result;
}

TrainTestSplit split_train_test(std::vector<WindowSample> samples, double test_fraction, const Rng& rng)
{
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test fraction must be in (0, 1), got " + std::to_string(test_fraction));
    }
    // Group sample indices per vessel, vessels in id order.
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        groups[samples[i].vessel_id].push_back(i);
    }
    struct Quota {
        std::vector<std::size_t>* members;
        std::size_t test = 0;
        double remainder = 0.0;
        std::size_t order = 0;
    };
    std::vector<Quota> quotas;
    const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(samples.size()) * test_fraction));
    std::size_t assigned = 0;
    for (auto& [id, members] : groups) {
        const double ideal = static_cast<double>(members.size()) * test_fraction;
        const std::size_t cap = members.size() - 1;
        Quota q{&members, std::min(static_cast<std::size_t>(std::floor(ideal)), cap), 0.0, quotas.size()};
        q.remainder = ideal - std::floor(ideal);
        assigned += q.test;
        quotas.push_back(q);
    }
    // Largest remainder first; ties broken by vessel order.
    std::vector<std::size_t> order(quotas.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return quotas[a].remainder > quotas[b].remainder; });
    for (std::size_t pass = 0; pass < 2 && assigned < target; ++pass) {
        for (std::size_t k : order) {
            if (assigned >= target) {
                break;
            }
            Quota& q = quotas[k];
            if (q.test + 1 <= q.members->size() - 1 && (pass == 1 || q.remainder > 0.0)) {
                ++q.test;
                ++assigned;
            }
        }
    }

    std::vector<char> is_test(samples.size(), 0);
    std::uint64_t vessel_index = 0;
    for (Quota& q : quotas) {
        std::vector<std::size_t> members = *q.members;
        Rng vrng = rng.fork(vessel_index++);
        for (std::size_t i = 0; i < q.test; ++i) {
            const std::size_t j = i + vrng.below(members.size() - i);
            std::swap(members[i], members[j]);
            is_test[members[i]] = 1;
        }
    }
    TrainTestSplit split;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        (is_test[i] ? split.test : split.train).push_back(std::move(samples[i]));
    }
    if (split.train.empty() || split.test.empty()) {
        throw ConfigError("train/test split left one side empty (" + std::to_string(split.train.size()) + " train, "
                          + std::to_string(split.test.size()) + " test)");
    }
    return split;
}

namespace {

Tensor stack(std::span<const WindowSample> samples, bool inputs)
{
    if (samples.empty()) {
        throw DimensionError("cannot stack an empty sample list");
    }
    const Tensor& first = inputs ? samples[0].x : samples[0].y;
    const std::size_t rows = first.shape()[0], m = first.shape()[1];
    Tensor out({samples.size(), rows, m});
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Tensor& t = inputs ? samples[i].x : samples[i].y;
        if (t.shape() != first.shape()) {
            throw DimensionError("sample " + std::to_string(i) + " has shape " + shape_str(t.shape())
                                 + ", expected " + shape_str(first.shape()));
        }
        std::copy(t.data().begin(), t.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(i * rows * m));
    }
    return out;
}

}  // namespace

Tensor stack_inputs(std::span<const WindowSample> samples)
{
    return stack(samples, true);
}

Tensor stack_targets(std::span<const WindowSample> samples)
{
    return stack(samples, false);
}

}  // namespace aisf::data
