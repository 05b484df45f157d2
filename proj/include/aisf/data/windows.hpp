#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aisf/data/ais.hpp"
#include "aisf/rng.hpp"
#include "aisf/tensor.hpp"

namespace aisf::data {

inline constexpr std::size_t kDefaultWindowsPerVessel = 25;

/// Contiguous slice of one trajectory: w input messages followed by s target
/// messages, in original units and variable order.
struct WindowSample {
    std::string vessel_id;
    std::size_t start = 0;
    Tensor x;  // (w, m)
    Tensor y;  // (s, m)
};

/// Draws min(count, L - w - s + 1) distinct start indices uniformly without
/// replacement, returned in increasing start order. Returns an empty list when
/// the trajectory is shorter than w + s.
std::vector<WindowSample> sample_windows(const Trajectory& traj, std::size_t w, std::size_t s, std::size_t count,
                                         Rng& rng);

struct WindowingResult {
    std::vector<WindowSample> samples;
    /// (vessel id, reason) for every trajectory that produced no windows.
    std::vector<std::pair<std::string, std::string>> skipped;
};

/// Samples every trajectory; each vessel draws from its own substream of `rng`.
WindowingResult sample_network(const TrajectoryNetwork& network, std::size_t w, std::size_t s,
                               std::size_t count, const Rng& rng);

struct TrainTestSplit {
    std::vector<WindowSample> train;
    std::vector<WindowSample> test;
};

/// Splits by window, stratified per vessel. round(N * fraction) samples go to
/// test, apportioned across vessels by largest remainder; a vessel always
/// keeps at least one sample in train, so single-sample vessels are train-only.
/// Throws ConfigError if the fraction is outside (0, 1) or either side is empty.
TrainTestSplit split_train_test(std::vector<WindowSample> samples, double test_fraction, const Rng& rng);

/// Stacks samples into (N, w, m) inputs and (N, s, m) targets.
Tensor stack_inputs(std::span<const WindowSample> samples);
Tensor stack_targets(std::span<const WindowSample> samples);

}  // namespace aisf::data
