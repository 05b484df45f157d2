#include "aisf/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "aisf/errors.hpp"

namespace aisf::data {

namespace {

constexpr std::int64_t kEpochStart = 1583020800;  // 2020-03-01T00:00:00Z
constexpr double kMaxGapSeconds = 60.0 * 86400.0;
constexpr double kGapScaleSeconds = 3600.0;
constexpr double kGapShape = 1.1;

double wrap_degrees(double a)
{
    a = std::fmod(a, 360.0);
    return a < 0.0 ? a + 360.0 : a;
}

double draw_interval(const GeneratorConfig& c, Rng& rng)
{
    if (c.delta_t_outlier_rate > 0.0 && rng.uniform() < c.delta_t_outlier_rate) {
        double u = rng.uniform();
        while (u <= 0.0) {
            u = rng.uniform();
        }
        return std::min(kGapScaleSeconds * std::pow(u, -1.0 / kGapShape), kMaxGapSeconds);
    }
    return c.delta_t_median * std::exp(c.delta_t_log_sigma * rng.normal());
}

}  // namespace

void GeneratorConfig::validate() const
{
    if (n_vessels < 1) {
        throw ConfigError("generator needs at least one vessel");
    }
    if (!(pareto_shape > 0.0)) {
        throw ConfigError("pareto shape must be positive");
    }
    if (min_messages < 1 || max_messages < min_messages) {
        throw ConfigError("message count bounds must satisfy 1 <= min <= max");
    }
    if (!(delta_t_outlier_rate >= 0.0 && delta_t_outlier_rate <= 1.0)) {
        throw ConfigError("outlier rate must be in [0, 1]");
    }
    if (!(delta_t_median > 0.0) || !(delta_t_log_sigma >= 0.0)) {
        throw ConfigError("interval median must be positive and log-sigma non-negative");
    }
    if (!(region.lat_max > region.lat_min) || !(region.lon_max > region.lon_min)) {
        throw ConfigError("generator region has zero area");
    }
    if (region.lat_min < -90.0 || region.lat_max > 90.0 || region.lon_min < -180.0 || region.lon_max > 180.0) {
        throw ConfigError("generator region exceeds geographic bounds");
    }
}

TrajectoryNetwork generate_synthetic(const GeneratorConfig& config, const Rng& rng)
{
    config.validate();
    const Region& reg = config.region;
    TrajectoryNetwork network;
    for (std::size_t i = 0; i < config.n_vessels; ++i) {
        Rng r = rng.fork(static_cast<std::uint64_t>(i));

        double u = r.uniform();
        while (u <= 0.0) {
            u = r.uniform();
        }
        const double raw_count = static_cast<double>(config.min_messages) * std::pow(u, -1.0 / config.pareto_shape);
        const auto count = static_cast<std::size_t>(
            std::clamp(raw_count, static_cast<double>(config.min_messages), static_cast<double>(config.max_messages)));

        char id[16];
        std::snprintf(id, sizeof id, "V%05zu", i + 1);
        Trajectory traj{id, {}};
        traj.messages.reserve(count);

        double lat = r.uniform(reg.lat_min, reg.lat_max);
        double lon = r.uniform(reg.lon_min, reg.lon_max);
        double cog = r.uniform(0.0, 360.0);
        const double cruise = r.uniform(4.0, 20.0);
        double sog = cruise;
        double turn = 0.0;
        double clock = static_cast<double>(kEpochStart) + r.uniform(0.0, 30.0 * 86400.0);

        for (std::size_t k = 0; k < count; ++k) {
            double dt = 0.0;
            if (k > 0) {
                dt = std::max(1.0, std::round(draw_interval(config, r)));
                clock += dt;
                turn = 0.8 * turn + 2.0 * r.normal();
                cog = wrap_degrees(cog + turn);
                sog = std::max(0.0, cruise + 0.9 * (sog - cruise) + 0.5 * r.normal());

                const double dist_nm = sog * dt / 3600.0;
                const double heading = cog * std::numbers::pi / 180.0;
                const double dlat = dist_nm * std::cos(heading) / 60.0;
                const double coslat = std::max(std::cos(lat * std::numbers::pi / 180.0), 0.05);
                const double dlon = dist_nm * std::sin(heading) / (60.0 * coslat);
                lat += dlat;
                lon += dlon;
                if (lat < reg.lat_min || lat > reg.lat_max) {
                    cog = wrap_degrees(180.0 - cog);
                    lat = std::clamp(lat, reg.lat_min, reg.lat_max);
                }
                if (lon < reg.lon_min || lon > reg.lon_max) {
                    cog = wrap_degrees(360.0 - cog);
                    lon = std::clamp(lon, reg.lon_min, reg.lon_max);
                }
            }
            // Stored at CSV precision so a written and re-read network is identical.
            AisMessage m;
            m.lat = std::round(lat * 1e6) / 1e6;
            m.lon = std::round(lon * 1e6) / 1e6;
            m.timestamp = static_cast<std::int64_t>(clock);
            m.cog = std::round(cog * 100.0) / 100.0;
            m.sog = std::round(sog * 100.0) / 100.0;
            traj.messages.push_back(m);
        }
        traj = derive_delta_t(std::move(traj));
        for (auto& m : traj.messages) {
            m = clip_message(m);
        }
        network.add(std::move(traj));
    }
    return network;
}

}  // namespace aisf::data
