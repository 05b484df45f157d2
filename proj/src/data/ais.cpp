#include "aisf/data/ais.hpp"

#include <algorithm>
#include <cmath>

#include "aisf/errors.hpp"

namespace aisf::data {

void TrajectoryNetwork::add(Trajectory trajectory)
{
    const std::string id = trajectory.vessel_id;
    if (!trajectories_.emplace(id, std::move(trajectory)).second) {
        throw DataError("duplicate vessel id '" + id + "' in trajectory network");
    }
}

std::size_t TrajectoryNetwork::total_messages() const
{
    std::size_t n = 0;
    for (const auto& [id, t] : trajectories_) {
        n += t.size();
    }
    return n;
}

const Trajectory& TrajectoryNetwork::at(const std::string& vessel_id) const
{
    auto it = trajectories_.find(vessel_id);
    if (it == trajectories_.end()) {
        throw DataError("unknown vessel id '" + vessel_id + "'");
    }
    return it->second;
}

Trajectory derive_delta_t(Trajectory trajectory)
{
    auto& msgs = trajectory.messages;
    for (std::size_t j = 0; j < msgs.size(); ++j) {
        if (j == 0) {
            msgs[j].delta_t = 0.0;
            continue;
        }
        if (msgs[j].timestamp < msgs[j - 1].timestamp) {
            throw OrderingError("vessel '" + trajectory.vessel_id + "': timestamp decreases at index "
                                + std::to_string(j) + " (" + std::to_string(msgs[j - 1].timestamp) + " -> "
                                + std::to_string(msgs[j].timestamp) + ")");
        }
        msgs[j].delta_t = static_cast<double>(msgs[j].timestamp - msgs[j - 1].timestamp);
    }
    return trajectory;
}

AisMessage clip_message(const AisMessage& msg, const ClipBounds& bounds)
{
    const auto f = msg.features();
    for (std::size_t v = 0; v < kNumVariables; ++v) {
        if (std::isnan(f[v])) {
            throw DataError("NaN in AIS message field '" + std::string(kVariableNames[v]) + "'");
        }
    }
    AisMessage out = msg;
    out.lat = std::clamp(msg.lat, bounds.lo[kLat], bounds.hi[kLat]);
    out.lon = std::clamp(msg.lon, bounds.lo[kLon], bounds.hi[kLon]);
    out.delta_t = std::clamp(msg.delta_t, bounds.lo[kDeltaT], bounds.hi[kDeltaT]);
    out.cog = std::clamp(msg.cog, bounds.lo[kCog], bounds.hi[kCog]);
    out.sog = std::clamp(msg.sog, bounds.lo[kSog], bounds.hi[kSog]);
    return out;
}

}  // namespace aisf::data
