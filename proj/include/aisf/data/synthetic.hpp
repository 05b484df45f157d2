#pragma once

#include <cstddef>

#include "aisf/data/ais.hpp"
#include "aisf/rng.hpp"

namespace aisf::data {

struct Region {
    // North Atlantic box from the Gulf of Mexico to Iceland.
    double lat_min = 23.870778;
    double lat_max = 68.500778;
    double lon_min = -82.783389;
    double lon_max = -2.021778;
};

struct GeneratorConfig {
    std::size_t n_vessels = 200;
    /// Tail index of the per-vessel message count law.
    double pareto_shape = 1.2;
    /// Pareto scale; also the lower clamp. 81 fits the (30, 50) regime.
    std::size_t min_messages = 81;
    std::size_t max_messages = 5000;
    /// Probability that an interval comes from the heavy-tailed gap component.
    double delta_t_outlier_rate = 0.0;
    /// Median and log-sigma of the lognormal interval body, seconds.
    double delta_t_median = 60.0;
    double delta_t_log_sigma = 0.5;
    Region region;

    void validate() const;
};

/// Synthetic trajectory network: Pareto-distributed message counts, smoothed
/// random-walk course and speed, dead-reckoned positions that bounce off the
/// region edges, and lognormal intervals mixed with rare multi-hour to
/// multi-week gaps. Vessel i draws only from `rng.fork(i)`. All messages are
/// clipped and carry derived delta_t.
TrajectoryNetwork generate_synthetic(const GeneratorConfig& config, const Rng& rng);

}  // namespace aisf::data
