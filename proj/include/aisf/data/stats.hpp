#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "aisf/data/ais.hpp"

namespace aisf::data {

struct Quantiles {
    double min = 0.0;
    double median = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

/// Linear-interpolated quantiles of `values` (sorted internally).
Quantiles quantiles(std::vector<double> values);

/// Message-count distribution per vessel and delta_t distribution over every
/// message except each vessel's first.
struct NetworkStats {
    std::size_t vessels = 0;
    std::size_t messages = 0;
    Quantiles counts;
    Quantiles delta_t;
    /// max delta_t / median delta_t.
    double delta_t_tail_ratio = 0.0;
};

NetworkStats network_stats(const TrajectoryNetwork& network);
nlohmann::json to_json(const NetworkStats& stats);

}  // namespace aisf::data
