#include "aisf/data/csv.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "aisf/errors.hpp"

namespace aisf::data {

namespace {

constexpr std::array<std::string_view, 6> kColumns{"vessel_id", "timestamp", "lat", "lon", "cog", "sog"};

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out)
{
    s = trim(s);
    if (s.empty()) {
        return false;
    }
    if (s.front() == '+') {
        s.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

TrajectoryNetwork load_csv(const std::filesystem::path& path, LoadReport* report)
{
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open CSV file " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("CSV file " + path.string() + " is empty (header required)");
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    const auto header = split_fields(line);
    std::array<std::size_t, kColumns.size()> index{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        auto it = std::find_if(header.begin(), header.end(), [&](std::string_view h) { return trim(h) == kColumns[c]; });
        if (it == header.end()) {
            throw FormatError("CSV file " + path.string() + " is missing required column '" + std::string(kColumns[c])
                              + "'");
        }
        index[c] = static_cast<std::size_t>(it - header.begin());
    }

    LoadReport rep;
    std::map<std::string, std::vector<AisMessage>> grouped;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        ++rep.rows;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            ++rep.malformed;
            continue;
        }
        AisMessage m;
        const std::string_view vid = trim(fields[index[0]]);
        const bool ok = !vid.empty() && parse_number(fields[index[1]], m.timestamp)
            && parse_number(fields[index[2]], m.lat) && parse_number(fields[index[3]], m.lon)
            && parse_number(fields[index[4]], m.cog) && parse_number(fields[index[5]], m.sog)
            && std::isfinite(m.lat) && std::isfinite(m.lon) && std::isfinite(m.cog) && std::isfinite(m.sog);
        if (!ok) {
            ++rep.malformed;
            continue;
        }
        grouped[std::string(vid)].push_back(m);
    }

    TrajectoryNetwork network;
    for (auto& [id, msgs] : grouped) {
        std::stable_sort(msgs.begin(), msgs.end(),
                         [](const AisMessage& a, const AisMessage& b) { return a.timestamp < b.timestamp; });
        Trajectory traj{id, {}};
        traj.messages.reserve(msgs.size());
        for (const auto& m : msgs) {
            if (!traj.messages.empty() && traj.messages.back().timestamp == m.timestamp) {
                ++rep.duplicates;
                continue;
            }
            traj.messages.push_back(m);
        }
        traj = derive_delta_t(std::move(traj));
        for (auto& m : traj.messages) {
            m = clip_message(m);
        }
        rep.messages += traj.size();
        network.add(std::move(traj));
    }
    if (report) {
        *report = rep;
    }
    return network;
}

void write_csv(const TrajectoryNetwork& network, const std::filesystem::path& path)
{
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) {
        throw FormatError("cannot write CSV file " + path.string());
    }
    std::fputs("vessel_id,timestamp,lat,lon,cog,sog\n", f);
    for (const auto& [id, traj] : network) {
        for (const auto& m : traj.messages) {
            std::fprintf(f, "%s,%lld,%.6f,%.6f,%.2f,%.2f\n", id.c_str(), static_cast<long long>(m.timestamp), m.lat,
                         m.lon, m.cog, m.sog);
        }
    }
    if (std::fclose(f) != 0) {
        throw FormatError("failed writing CSV file " + path.string());
    }
}

}  // namespace aisf::data
