#include "aisf/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "aisf/errors.hpp"

namespace aisf::op {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;
using VecMapC = Eigen::Map<const Eigen::VectorXd>;

MapC as_mat(const Tensor& t, std::size_t rows, std::size_t cols)
{
    return MapC(t.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

Map as_mat(Tensor& t, std::size_t rows, std::size_t cols)
{
    return Map(t.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void require_same(const Var& a, const Var& b, const char* what)
{
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs "
                             + shape_str(b.shape()));
    }
}

Tape& tape_of(const Var& a)
{
    if (a.tape() == nullptr) {
        throw StateError("operation on an unbound Var");
    }
    return *a.tape();
}

template <typename F>
Tensor map_unary(const Tensor& x, F f)
{
    Tensor out(x.shape());
    auto src = x.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = f(src[i]);
    }
    return out;
}

}  // namespace

Var matmul(Var a, Var b)
{
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) {
        throw DimensionError("matmul: incompatible shapes " + shape_str(sa) + " and " + shape_str(sb));
    }
    const std::size_t p = sa[0], q = sa[1], r = sb[1];
    Tensor out({p, r});
    as_mat(out, p, r).noalias() = as_mat(a.value(), p, q) * as_mat(b.value(), q, r);
    return tape_of(a).record(std::move(out), {a, b}, [a, b, p, q, r](Tape& t, const Tensor& g, const Tensor&) {
        if (t.requires_grad(a.id())) {
            Tensor& ga = t.grad_buffer(a.id());
            as_mat(ga, p, q).noalias() += as_mat(g, p, r) * as_mat(t.value(b.id()), q, r).transpose();
        }
        if (t.requires_grad(b.id())) {
            Tensor& gb = t.grad_buffer(b.id());
            as_mat(gb, q, r).noalias() += as_mat(t.value(a.id()), p, q).transpose() * as_mat(g, p, r);
        }
    });
}

namespace {

Var linear_impl(Var x, Var w, const Var* bias)
{
    const Shape& sx = x.shape();
    const Shape& sw = w.shape();
    if (sw.size() != 2 || sx.empty() || sx.back() != sw[1]) {
        throw DimensionError("linear: input " + shape_str(sx) + " incompatible with weight " + shape_str(sw));
    }
    const std::size_t in = sw[1], out_f = sw[0];
    const std::size_t n = x.value().size() / in;
    if (bias && (bias->shape().size() != 1 || bias->shape()[0] != out_f)) {
        throw DimensionError("linear: bias " + shape_str(bias->shape()) + " incompatible with weight "
                             + shape_str(sw));
    }
    Shape out_shape = sx;
    out_shape.back() = out_f;
    Tensor out(out_shape);
    auto y = as_mat(out, n, out_f);
    y.noalias() = as_mat(x.value(), n, in) * as_mat(w.value(), out_f, in).transpose();
    if (bias) {
        y.rowwise() += VecMapC(bias->value().data().data(), static_cast<Eigen::Index>(out_f)).transpose();
    }
    Var b = bias ? *bias : Var{};
    const bool has_bias = bias != nullptr;
    std::vector<Var> inputs{x, w};
    if (has_bias) {
        inputs.push_back(b);
    }
    return tape_of(x).record(std::move(out), inputs,
                             [x, w, b, has_bias, n, in, out_f](Tape& t, const Tensor& g, const Tensor&) {
                                 auto gm = as_mat(g, n, out_f);
                                 if (t.requires_grad(x.id())) {
                                     as_mat(t.grad_buffer(x.id()), n, in).noalias()
                                         += gm * as_mat(t.value(w.id()), out_f, in);
                                 }
                                 if (t.requires_grad(w.id())) {
                                     as_mat(t.grad_buffer(w.id()), out_f, in).noalias()
                                         += gm.transpose() * as_mat(t.value(x.id()), n, in);
                                 }
                                 if (has_bias && t.requires_grad(b.id())) {
                                     as_mat(t.grad_buffer(b.id()), 1, out_f) += gm.colwise().sum();
                                 }
                             });
}

}  // namespace

Var linear(Var x, Var weight, Var bias)
{
    return linear_impl(x, weight, &bias);
}

Var linear(Var x, Var weight)
{
    return linear_impl(x, weight, nullptr);
}

namespace {

// cols[(c * k + j), (b * L + l)] = x[b, c, l + j - pad] (zero outside).
RowMat im2col(const Tensor& x, std::size_t batch, std::size_t cin, std::size_t len, std::size_t k)
{
    const auto pad = static_cast<std::ptrdiff_t>(k / 2);
    RowMat cols = RowMat::Zero(static_cast<Eigen::Index>(cin * k), static_cast<Eigen::Index>(batch * len));
    const double* src = x.data().data();
    for (std::size_t c = 0; c < cin; ++c) {
        for (std::size_t j = 0; j < k; ++j) {
            double* row = cols.row(static_cast<Eigen::Index>(c * k + j)).data();
            const auto shift = static_cast<std::ptrdiff_t>(j) - pad;
            for (std::size_t b = 0; b < batch; ++b) {
                const double* xs = src + (b * cin + c) * len;
                for (std::size_t l = 0; l < len; ++l) {
                    const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(l) + shift;
                    if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(len)) {
                        row[b * len + l] = xs[pos];
                    }
                }
            }
        }
    }
    return cols;
}

}  // namespace

Var crosscorr1d(Var input, Var weight, Var bias)
{
    const Shape& sx = input.shape();
    const Shape& sw = weight.shape();
    if (sx.size() != 3 || sw.size() != 3) {
        throw DimensionError("crosscorr1d: expected input (B,Cin,L) and weight (Cout,Cin,k), got " + shape_str(sx)
                             + " and " + shape_str(sw));
    }
    const std::size_t batch = sx[0], cin = sx[1], len = sx[2];
    const std::size_t cout = sw[0], k = sw[2];
    if (k % 2 == 0) {
        throw DimensionError("crosscorr1d: kernel size must be odd, got " + std::to_string(k));
    }
    if (sw[1] != cin) {
        throw DimensionError("crosscorr1d: input channels " + std::to_string(cin) + " do not match weight "
                             + shape_str(sw));
    }
    if (bias.shape() != Shape{cout}) {
        throw DimensionError("crosscorr1d: bias " + shape_str(bias.shape()) + " does not match "
                             + std::to_string(cout) + " output channels");
    }
    const RowMat cols = im2col(input.value(), batch, cin, len, k);
    const RowMat prod = as_mat(weight.value(), cout, cin * k) * cols;
    Tensor out({batch, cout, len});
    const auto& bv = bias.value();
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < cout; ++o) {
            double* dst = out.data().data() + (b * cout + o) * len;
            const double* src = prod.row(static_cast<Eigen::Index>(o)).data() + b * len;
            for (std::size_t l = 0; l < len; ++l) {
                dst[l] = src[l] + bv[o];
            }
        }
    }
    return tape_of(input).record(
        std::move(out), {input, weight, bias},
        [input, weight, bias, batch, cin, len, cout, k](Tape& t, const Tensor& g, const Tensor&) {
            RowMat gm(static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(batch * len));
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t o = 0; o < cout; ++o) {
                    const double* src = g.data().data() + (b * cout + o) * len;
                    double* dst = gm.row(static_cast<Eigen::Index>(o)).data() + b * len;
                    std::copy(src, src + len, dst);
                }
            }
            if (t.requires_grad(weight.id())) {
                const RowMat cols = im2col(t.value(input.id()), batch, cin, len, k);
                as_mat(t.grad_buffer(weight.id()), cout, cin * k).noalias() += gm * cols.transpose();
            }
            if (t.requires_grad(bias.id())) {
                as_mat(t.grad_buffer(bias.id()), cout, 1) += gm.rowwise().sum();
            }
            if (t.requires_grad(input.id())) {
                const RowMat dcols = as_mat(t.value(weight.id()), cout, cin * k).transpose() * gm;
                Tensor& gx = t.grad_buffer(input.id());
                const auto pad = static_cast<std::ptrdiff_t>(k / 2);
                for (std::size_t c = 0; c < cin; ++c) {
                    for (std::size_t j = 0; j < k; ++j) {
                        const double* row = dcols.row(static_cast<Eigen::Index>(c * k + j)).data();
                        const auto shift = static_cast<std::ptrdiff_t>(j) - pad;
                        for (std::size_t b = 0; b < batch; ++b) {
                            double* xs = gx.data().data() + (b * cin + c) * len;
                            for (std::size_t l = 0; l < len; ++l) {
                                const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(l) + shift;
                                if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(len)) {
                                    xs[pos] += row[b * len + l];
                                }
                            }
                        }
                    }
                }
            }
        });
}

Var add(Var a, Var b)
{
    require_same(a, b, "add");
    Tensor out = a.value();
    out.add_(b.value());
    return tape_of(a).record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g, const Tensor&) {
        t.accumulate(a.id(), g);
        t.accumulate(b.id(), g);
    });
}

Var sub(Var a, Var b)
{
    require_same(a, b, "sub");
    Tensor out = a.value();
    const auto bv = b.value().data();
    auto ov = out.data();
    for (std::size_t i = 0; i < ov.size(); ++i) {
        ov[i] -= bv[i];
    }
    return tape_of(a).record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g, const Tensor&) {
        t.accumulate(a.id(), g);
        if (t.requires_grad(b.id())) {
            Tensor& gb = t.grad_buffer(b.id());
            for (std::size_t i = 0; i < g.size(); ++i) {
                gb[i] -= g[i];
            }
        }
    });
}

Var mul(Var a, Var b)
{
    require_same(a, b, "mul");
    Tensor out = a.value();
    const auto bv = b.value().data();
    auto ov = out.data();
    for (std::size_t i = 0; i < ov.size(); ++i) {
        ov[i] *= bv[i];
    }
    return tape_of(a).record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g, const Tensor&) {
        if (t.requires_grad(a.id())) {
            Tensor& ga = t.grad_buffer(a.id());
            const Tensor& bv = t.value(b.id());
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga[i] += g[i] * bv[i];
            }
        }
        if (t.requires_grad(b.id())) {
            Tensor& gb = t.grad_buffer(b.id());
            const Tensor& av = t.value(a.id());
            for (std::size_t i = 0; i < g.size(); ++i) {
                gb[i] += g[i] * av[i];
            }
        }
    });
}

Var scale(Var a, double s)
{
    Tensor out = a.value();
    out.scale_(s);
    return tape_of(a).record(std::move(out), {a}, [a, s](Tape& t, const Tensor& g, const Tensor&) {
        Tensor& ga = t.grad_buffer(a.id());
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += s * g[i];
        }
    });
}

Var tanh(Var a)
{
    Tensor out = map_unary(a.value(), [](double v) { return std::tanh(v); });
    return tape_of(a).record(std::move(out), {a}, [a](Tape& t, const Tensor& g, const Tensor& y) {
        Tensor& ga = t.grad_buffer(a.id());
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i] * (1.0 - y[i] * y[i]);
        }
    });
}

Var sigmoid(Var a)
{
    Tensor out = map_unary(a.value(), [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    return tape_of(a).record(std::move(out), {a}, [a](Tape& t, const Tensor& g, const Tensor& y) {
        Tensor& ga = t.grad_buffer(a.id());
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i] * y[i] * (1.0 - y[i]);
        }
    });
}

Var relu(Var a)
{
    Tensor out = map_unary(a.value(), [](double v) { return v > 0.0 ? v : 0.0; });
    return tape_of(a).record(std::move(out), {a}, [a](Tape& t, const Tensor& g, const Tensor& y) {
        Tensor& ga = t.grad_buffer(a.id());
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (y[i] > 0.0) {
                ga[i] += g[i];
            }
        }
    });
}

Var sum(Var a)
{
    double s = 0.0;
    for (double v : a.value().data()) {
        s += v;
    }
    return tape_of(a).record(Tensor::scalar(s), {a}, [a](Tape& t, const Tensor& g, const Tensor&) {
        Tensor& ga = t.grad_buffer(a.id());
        const double gv = g[0];
        for (double& v : ga.data()) {
            v += gv;
        }
    });
}

Var mean(Var a)
{
    const std::size_t n = a.value().size();
    if (n == 0) {
        throw DimensionError("mean of an empty tensor");
    }
    return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var reshape(Var a, Shape shape)
{
    Tensor out = a.value().reshaped(std::move(shape));
    return tape_of(a).record(std::move(out), {a}, [a](Tape& t, const Tensor& g, const Tensor&) {
        Tensor& ga = t.grad_buffer(a.id());
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i];
        }
    });
}

Var swap_last(Var a)
{
    Tensor out = a.value().swapped_last();
    return tape_of(a).record(std::move(out), {a}, [a](Tape& t, const Tensor& g, const Tensor&) {
        t.grad_buffer(a.id()).add_(g.swapped_last());
    });
}

Var select_step(Var x, std::size_t step)
{
    const Shape& s = x.shape();
    if (s.size() != 3 || step >= s[1]) {
        throw DimensionError("select_step: step " + std::to_string(step) + " invalid for shape " + shape_str(s));
    }
    const std::size_t batch = s[0], steps = s[1], feat = s[2];
    Tensor out({batch, feat});
    const double* src = x.value().data().data();
    for (std::size_t b = 0; b < batch; ++b) {
        std::copy_n(src + (b * steps + step) * feat, feat, out.data().data() + b * feat);
    }
    return tape_of(x).record(std::move(out), {x},
                             [x, step, batch, steps, feat](Tape& t, const Tensor& g, const Tensor&) {
                                 double* dst = t.grad_buffer(x.id()).data().data();
                                 for (std::size_t b = 0; b < batch; ++b) {
                                     double* row = dst + (b * steps + step) * feat;
                                     for (std::size_t f = 0; f < feat; ++f) {
                                         row[f] += g[b * feat + f];
                                     }
                                 }
                             });
}

Var stack_steps(const std::vector<Var>& steps)
{
    if (steps.empty()) {
        throw DimensionError("stack_steps: no steps");
    }
    const Shape s0 = steps[0].shape();
    if (s0.size() != 2) {
        throw DimensionError("stack_steps: expected (B,F) steps, got " + shape_str(s0));
    }
    const std::size_t batch = s0[0], feat = s0[1], count = steps.size();
    Tensor out({batch, count, feat});
    for (std::size_t t = 0; t < count; ++t) {
        if (steps[t].shape() != s0) {
            throw DimensionError("stack_steps: step " + std::to_string(t) + " has shape "
                                 + shape_str(steps[t].shape()) + ", expected " + shape_str(s0));
        }
        const double* src = steps[t].value().data().data();
        for (std::size_t b = 0; b < batch; ++b) {
            std::copy_n(src + b * feat, feat, out.data().data() + (b * count + t) * feat);
        }
    }
    return tape_of(steps[0]).record(
        std::move(out), steps, [steps, batch, feat, count](Tape& t, const Tensor& g, const Tensor&) {
            for (std::size_t s = 0; s < count; ++s) {
                if (!t.requires_grad(steps[s].id())) {
                    continue;
                }
                double* dst = t.grad_buffer(steps[s].id()).data().data();
                for (std::size_t b = 0; b < batch; ++b) {
                    const double* row = g.data().data() + (b * count + s) * feat;
                    for (std::size_t f = 0; f < feat; ++f) {
                        dst[b * feat + f] += row[f];
                    }
                }
            }
        });
}

Var slice_cols(Var x, std::size_t start, std::size_t len)
{
    const Shape& s = x.shape();
    if (s.size() != 2 || start + len > s[1]) {
        throw DimensionError("slice_cols: [" + std::to_string(start) + ", " + std::to_string(start + len)
                             + ") out of range for " + shape_str(s));
    }
    const std::size_t rows = s[0], cols = s[1];
    Tensor out({rows, len});
    const double* src = x.value().data().data();
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(src + r * cols + start, len, out.data().data() + r * len);
    }
    return tape_of(x).record(std::move(out), {x}, [x, start, len, rows, cols](Tape& t, const Tensor& g, const Tensor&) {
        double* dst = t.grad_buffer(x.id()).data().data();
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < len; ++c) {
                dst[r * cols + start + c] += g[r * len + c];
            }
        }
    });
}

Var concat_cols(const std::vector<Var>& parts)
{
    if (parts.empty()) {
        throw DimensionError("concat_cols: no inputs");
    }
    const std::size_t rows = parts[0].shape().at(0);
    std::size_t total = 0;
    for (const Var& p : parts) {
        if (p.shape().size() != 2 || p.shape()[0] != rows) {
            throw DimensionError("concat_cols: incompatible part " + shape_str(p.shape()));
        }
        total += p.shape()[1];
    }
    Tensor out({rows, total});
    std::size_t offset = 0;
    for (const Var& p : parts) {
        const std::size_t c = p.shape()[1];
        for (std::size_t r = 0; r < rows; ++r) {
            std::copy_n(p.value().data().data() + r * c, c, out.data().data() + r * total + offset);
        }
        offset += c;
    }
    return tape_of(parts[0]).record(std::move(out), parts, [parts, rows, total](Tape& t, const Tensor& g, const Tensor&) {
        std::size_t off = 0;
        for (const Var& p : parts) {
            const std::size_t c = t.value(p.id()).shape()[1];
            if (t.requires_grad(p.id())) {
                double* dst = t.grad_buffer(p.id()).data().data();
                for (std::size_t r = 0; r < rows; ++r) {
                    for (std::size_t j = 0; j < c; ++j) {
                        dst[r * c + j] += g[r * total + off + j];
                    }
                }
            }
            off += c;
        }
    });
}

Var affine_last(Var x, std::span<const double> scale_v, std::span<const double> shift_v)
{
    const Shape& s = x.shape();
    const std::size_t m = s.empty() ? 0 : s.back();
    if (m == 0 || scale_v.size() != m || shift_v.size() != m) {
        throw DimensionError("affine_last: " + std::to_string(scale_v.size()) + " coefficients for shape "
                             + shape_str(s));
    }
    Tensor out = x.value();
    auto ov = out.data();
    for (std::size_t i = 0; i < ov.size(); ++i) {
        ov[i] = ov[i] * scale_v[i % m] + shift_v[i % m];
    }
    std::vector<double> sc(scale_v.begin(), scale_v.end());
    return tape_of(x).record(std::move(out), {x}, [x, sc, m](Tape& t, const Tensor& g, const Tensor&) {
        Tensor& gx = t.grad_buffer(x.id());
        for (std::size_t i = 0; i < g.size(); ++i) {
            gx[i] += g[i] * sc[i % m];
        }
    });
}

Var clamp_last(Var x, std::span<const double> lo, std::span<const double> hi)
{
    const Shape& s = x.shape();
    const std::size_t m = s.empty() ? 0 : s.back();
    if (m == 0 || lo.size() != m || hi.size() != m) {
        throw DimensionError("clamp_last: " + std::to_string(lo.size()) + " bounds for shape " + shape_str(s));
    }
    Tensor out = x.value();
    auto ov = out.data();
    std::vector<char> pass(ov.size());
    for (std::size_t i = 0; i < ov.size(); ++i) {
        const double v = ov[i];
        const double c = std::clamp(v, lo[i % m], hi[i % m]);
        pass[i] = (c == v);
        ov[i] = c;
    }
    return tape_of(x).record(std::move(out), {x}, [x, pass = std::move(pass)](Tape& t, const Tensor& g, const Tensor&) {
        Tensor& gx = t.grad_buffer(x.id());
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (pass[i]) {
                gx[i] += g[i];
            }
        }
    });
}

}  // namespace aisf::op
