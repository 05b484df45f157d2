#pragma once

#include <cstddef>
#include <filesystem>

#include "aisf/data/ais.hpp"

namespace aisf::data {

/// Ingestion counters.
struct LoadReport {
    std::size_t rows = 0;        // data rows read (excluding header)
    std::size_t malformed = 0;   // skipped: wrong field count or unparsable / non-finite value
    std::size_t duplicates = 0;  // skipped: repeated (vessel_id, timestamp); first occurrence kept
    std::size_t messages = 0;    // messages in the resulting network
};

/// Reads `vessel_id,timestamp,lat,lon,cog,sog` (header required, columns in any
/// order). Rows are grouped per vessel, stably sorted by timestamp,
/// de-duplicated, given delta_t and clipped. Throws FormatError when the file
/// cannot be opened or a required column is missing.
TrajectoryNetwork load_csv(const std::filesystem::path& path, LoadReport* report = nullptr);

/// Writes the same schema, vessels in id order. lat/lon with 6 decimals,
/// cog/sog with 2.
void write_csv(const TrajectoryNetwork& network, const std::filesystem::path& path);

}  // namespace aisf::data
