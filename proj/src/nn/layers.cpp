#include "aisf/nn/layers.hpp"

#include <cmath>

#include "aisf/errors.hpp"
#include "aisf/ops.hpp"

namespace aisf::nn {

Var dropout(Var x, const DropoutSpec& spec, Rng& rng)
{
    if (!(spec.p >= 0.0 && spec.p < 1.0)) {
        throw ConfigError("dropout probability must be in [0, 1), got " + std::to_string(spec.p));
    }
    if (spec.mode == Mode::kEval || spec.p == 0.0) {
        return x;
    }
    const double keep_scale = 1.0 / (1.0 - spec.p);
    Tensor mask(x.shape());
    for (double& v : mask.data()) {
        v = rng.uniform() < spec.p ? 0.0 : keep_scale;
    }
    return op::mul(x, x.tape()->constant(std::move(mask)));
}

void init_uniform(Parameter& p, std::size_t fan_in, Rng& rng)
{
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : p.value.data()) {
        v = rng.uniform(-bound, bound);
    }
}

Linear::Linear(const std::string& name, std::size_t in, std::size_t out)
  : weight(name + ".weight", Tensor({out, in}))
  , bias(name + ".bias", Tensor({out}))
{
    if (in == 0 || out == 0) {
        throw ConfigError("linear layer " + name + " needs positive sizes");
    }
}

void Linear::init(Rng& rng)
{
    init_uniform(weight, in_features(), rng);
    bias.value.fill(0.0);
}

Var Linear::forward(Tape& tape, Var x)
{
    return op::linear(x, tape.parameter(weight), tape.parameter(bias));
}

Conv1d::Conv1d(const std::string& name, std::size_t in_channels, std::size_t out_channels, std::size_t kernel)
  : weight(name + ".weight", Tensor({out_channels, in_channels, kernel}))
  , bias(name + ".bias", Tensor({out_channels}))
{
    if (kernel % 2 == 0) {
        throw ConfigError("conv layer " + name + ": kernel size must be odd, got " + std::to_string(kernel));
    }
    if (in_channels == 0 || out_channels == 0) {
        throw ConfigError("conv layer " + name + " needs at least one input and output channel");
    }
}

void Conv1d::init(Rng& rng)
{
    init_uniform(weight, in_channels() * kernel(), rng);
    bias.value.fill(0.0);
}

Var Conv1d::forward(Tape& tape, Var x)
{
    return op::crosscorr1d(x, tape.parameter(weight), tape.parameter(bias));
}

}  // namespace aisf::nn
