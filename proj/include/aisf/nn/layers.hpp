#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "aisf/autograd.hpp"
#include "aisf/rng.hpp"

namespace aisf::nn {

enum class Mode { kTrain, kEval };

/// Inverted dropout: survivors are scaled by 1/(1-p) at train time so the
/// eval path is the identity.
struct DropoutSpec {
    double p = 0.1;
    Mode mode = Mode::kEval;
};

/// Returns `x` itself in eval mode or when p == 0. Throws ConfigError unless 0 <= p < 1.
Var dropout(Var x, const DropoutSpec& spec, Rng& rng);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
void init_uniform(Parameter& p, std::size_t fan_in, Rng& rng);

class Linear {
public:
    Linear() = default;
    Linear(const std::string& name, std::size_t in, std::size_t out);

    void init(Rng& rng);
    /// (..., in) -> (..., out)
    Var forward(Tape& tape, Var x);

    [[nodiscard]] std::size_t in_features() const { return weight.value.shape()[1]; }
    [[nodiscard]] std::size_t out_features() const { return weight.value.shape()[0]; }
    std::vector<Parameter*> parameters() { return {&weight, &bias}; }

    Parameter weight;  // (out, in)
    Parameter bias;    // (out)
};

/// Same-length 1-D convolution (stride 1, zero padding (k-1)/2).
class Conv1d {
public:
    Conv1d() = default;
    Conv1d(const std::string& name, std::size_t in_channels, std::size_t out_channels, std::size_t kernel);

    void init(Rng& rng);
    /// (B, in_channels, L) -> (B, out_channels, L)
    Var forward(Tape& tape, Var x);

    [[nodiscard]] std::size_t in_channels() const { return weight.value.shape()[1]; }
    [[nodiscard]] std::size_t out_channels() const { return weight.value.shape()[0]; }
    [[nodiscard]] std::size_t kernel() const { return weight.value.shape()[2]; }
    std::vector<Parameter*> parameters() { return {&weight, &bias}; }

    Parameter weight;  // (out, in, k)
    Parameter bias;    // (out)
};

}  // namespace aisf::nn
