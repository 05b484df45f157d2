#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace aisf::gradcheck {

struct Options {
    std::size_t trials = 100;
    std::uint64_t seed = 2021;
    /// Keep only rows whose name contains this token (empty keeps all).
    std::string filter;
    /// Negates the tape gradient before comparison (negative control).
    bool inject_wrong_sign = false;
    /// Finite-difference step.
    double step = 1e-6;
    /// Coordinates probed per trial.
    std::size_t coords_per_trial = 24;
};

struct Row {
    std::string name;
    std::size_t trials = 0;
    /// max |analytic - numeric| / max(1, |analytic|) over all probed coordinates.
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// Names of every row, in run order.
std::vector<std::string> row_names();

/// Runs the selected rows. `op.*` and `layer.*` rows compare tape gradients
/// with central differences on random shapes up to 8 per axis (tolerance
/// 1e-5); `*.reference` rows compare tape values and gradients with the
/// hand-derived reference passes (1e-9); `model.*` rows check whole
/// forecasters at small sizes (1e-4).
std::vector<Row> run(const Options& options);

/// Fixed-width table, one row per line.
std::string format_table(const std::vector<Row>& rows);

}  // namespace aisf::gradcheck
