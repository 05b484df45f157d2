#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace aisf::data {

/// Model variables in their fixed order.
enum Variable : std::size_t { kLat = 0, kLon = 1, kDeltaT = 2, kCog = 3, kSog = 4 };
inline constexpr std::size_t kNumVariables = 5;
inline constexpr std::array<std::string_view, kNumVariables> kVariableNames{"lat", "lon", "delta_t", "cog",
                                                                            "sog"};

/// Domain bounds enforced by clipping, in variable order.
struct ClipBounds {
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    std::array<double, kNumVariables> lo{-90.0, -180.0, 0.0, 0.0, 0.0};
    std::array<double, kNumVariables> hi{90.0, 180.0, kInf, 360.0, kInf};
};

/// One AIS transmission. Angles in degrees, speed in knots, time in seconds.
struct AisMessage {
    double lat = 0.0;
    double lon = 0.0;
    std::int64_t timestamp = 0;
    double cog = 0.0;
    double sog = 0.0;
    /// Seconds since the previous message of the same vessel (0 for the first).
    double delta_t = 0.0;

    [[nodiscard]] std::array<double, kNumVariables> features() const { return {lat, lon, delta_t, cog, sog}; }
};

struct Trajectory {
    std::string vessel_id;
    std::vector<AisMessage> messages;

    [[nodiscard]] std::size_t size() const { return messages.size(); }
};

/// Disjoint per-vessel trajectories, ordered by vessel id.
class TrajectoryNetwork {
public:
    /// Throws DataError if the vessel id is already present.
    void add(Trajectory trajectory);

    [[nodiscard]] std::size_t vessel_count() const { return trajectories_.size(); }
    [[nodiscard]] std::size_t total_messages() const;
    [[nodiscard]] const Trajectory& at(const std::string& vessel_id) const;
    [[nodiscard]] bool contains(const std::string& vessel_id) const { return trajectories_.count(vessel_id) > 0; }

    [[nodiscard]] auto begin() const { return trajectories_.begin(); }
    [[nodiscard]] auto end() const { return trajectories_.end(); }

private:
    std::map<std::string, Trajectory> trajectories_;
};

/// Sets delta_t from consecutive timestamps. Throws OrderingError naming the
/// first index whose timestamp decreases.
Trajectory derive_delta_t(Trajectory trajectory);

/// Clamps every variable into its domain. Throws DataError on NaN.
AisMessage clip_message(const AisMessage& msg, const ClipBounds& bounds = {});

}  // namespace aisf::data
