#include "aisf/data/stats.hpp"

#include <algorithm>
#include <cmath>

namespace aisf::data {

namespace {

double at_fraction(const std::vector<double>& sorted, double q)
{
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

nlohmann::json quantiles_json(const Quantiles& q)
{
    return {{"min", q.min}, {"median", q.median}, {"p90", q.p90}, {"p99", q.p99}, {"max", q.max}, {"mean", q.mean}};
}

}  // namespace

Quantiles quantiles(std::vector<double> values)
{
    Quantiles q;
    if (values.empty()) {
        return q;
    }
    std::sort(values.begin(), values.end());
    q.min = values.front();
    q.max = values.back();
    q.median = at_fraction(values, 0.5);
    q.p90 = at_fraction(values, 0.9);
    q.p99 = at_fraction(values, 0.99);
    double s = 0.0;
    for (double v : values) {
        s += v;
    }
    q.mean = s / static_cast<double>(values.size());
    return q;
}

NetworkStats network_stats(const TrajectoryNetwork& network)
{
    NetworkStats st;
    std::vector<double> counts, dts;
    for (const auto& [id, traj] : network) {
        counts.push_back(static_cast<double>(traj.size()));
        for (std::size_t i = 1; i < traj.size(); ++i) {
            dts.push_back(traj.messages[i].delta_t);
        }
    }
    st.vessels = network.vessel_count();
    st.messages = network.total_messages();
    st.counts = quantiles(std::move(counts));
    st.delta_t = quantiles(std::move(dts));
    st.delta_t_tail_ratio = st.delta_t.median > 0.0 ? st.delta_t.max / st.delta_t.median : 0.0;
    return st;
}

nlohmann::json to_json(const NetworkStats& stats)
{
    return {{"vessels", stats.vessels},
            {"messages", stats.messages},
            {"messages_per_vessel", quantiles_json(stats.counts)},
            {"delta_t", quantiles_json(stats.delta_t)},
            {"delta_t_max_over_median", stats.delta_t_tail_ratio}};
}

}  // namespace aisf::data
