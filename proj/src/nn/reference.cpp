#include "aisf/nn/reference.hpp"

#include <cmath>
#include <vector>

#include "aisf/errors.hpp"

namespace aisf::nn::reference {

namespace {

double sigm(double v)
{
    return 1.0 / (1.0 + std::exp(-v));
}

// out[r] += sum_c w[row0 + r, c] * v[c]
void gemv_rows(const Tensor& w, std::size_t row0, std::size_t rows, const double* v, double* out)
{
    const std::size_t cols = w.shape()[1];
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            s += w[(row0 + r) * cols + c] * v[c];
        }
        out[r] += s;
    }
}

// out[c] += sum_r w[r, c] * g[r]
void gemv_t(const Tensor& w, const double* g, double* out)
{
    const std::size_t rows = w.shape()[0], cols = w.shape()[1];
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out[c] += w[r * cols + c] * g[r];
        }
    }
}

// dw[r, c] += g[r] * v[c]
void outer_add(Tensor& dw, const double* g, const double* v)
{
    const std::size_t rows = dw.shape()[0], cols = dw.shape()[1];
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            dw[r * cols + c] += g[r] * v[c];
        }
    }
}

// Per-step activations kept for the backward pass.
struct StepCache {
    std::vector<double> h_prev, c_prev;
    std::vector<double> gates;  // post-activation gates
    std::vector<double> aux;    // LSTM: c_t; GRU: W_hn h + b_hn
    std::vector<double> h;
};

std::vector<std::vector<StepCache>> run_forward(const RecurrentCell& cell, const Tensor& x)
{
    if (x.rank() != 3 || x.shape()[2] != cell.input_size) {
        throw DimensionError("reference recurrent_forward: bad input " + shape_str(x.shape()));
    }
    const std::size_t batch = x.shape()[0], steps = x.shape()[1], f = x.shape()[2], h = cell.hidden_size;
    const std::size_t gc = gate_count(cell.kind);
    std::vector<std::vector<StepCache>> caches(batch, std::vector<StepCache>(steps));
    for (std::size_t b = 0; b < batch; ++b) {
        std::vector<double> hp(h, 0.0), cp(h, 0.0);
        for (std::size_t t = 0; t < steps; ++t) {
            StepCache& sc = caches[b][t];
            sc.h_prev = hp;
            sc.c_prev = cp;
            const double* xt = x.data().data() + (b * steps + t) * f;
            std::vector<double> ai(gc * h, 0.0), ah(gc * h, 0.0);
            gemv_rows(cell.w_ih.value, 0, gc * h, xt, ai.data());
            gemv_rows(cell.w_hh.value, 0, gc * h, hp.data(), ah.data());
            for (std::size_t k = 0; k < gc * h; ++k) {
                ai[k] += cell.b_ih.value[k];
                if (cell.kind != RnnKind::kElman) {
                    ah[k] += cell.b_hh.value[k];
                }
            }
            sc.gates.assign(gc * h, 0.0);
            sc.h.assign(h, 0.0);
            switch (cell.kind) {
            case RnnKind::kLstm: {
                sc.aux.assign(h, 0.0);
                for (std::size_t j = 0; j < h; ++j) {
                    const double i = sigm(ai[j] + ah[j]);
                    const double fg = sigm(ai[h + j] + ah[h + j]);
                    const double g = std::tanh(ai[2 * h + j] + ah[2 * h + j]);
                    const double o = sigm(ai[3 * h + j] + ah[3 * h + j]);
                    const double c = fg * cp[j] + i * g;
                    sc.gates[j] = i;
                    sc.gates[h + j] = fg;
                    sc.gates[2 * h + j] = g;
                    sc.gates[3 * h + j] = o;
                    sc.aux[j] = c;
                    sc.h[j] = o * std::tanh(c);
                }
                cp = sc.aux;
                break;
            }
            case RnnKind::kGru: {
                sc.aux.assign(ah.begin() + static_cast<std::ptrdiff_t>(2 * h), ah.end());
                for (std::size_t j = 0; j < h; ++j) {
                    const double r = sigm(ai[j] + ah[j]);
                    const double z = sigm(ai[h + j] + ah[h + j]);
                    const double n = std::tanh(ai[2 * h + j] + r * ah[2 * h + j]);
                    sc.gates[j] = r;
                    sc.gates[h + j] = z;
                    sc.gates[2 * h + j] = n;
                    sc.h[j] = (1.0 - z) * n + z * hp[j];
                }
                break;
            }
            case RnnKind::kElman:
                for (std::size_t j = 0; j < h; ++j) {
                    sc.h[j] = std::tanh(ai[j] + ah[j]);
                    sc.gates[j] = sc.h[j];
                }
                break;
            }
            hp = sc.h;
        }
    }
    return caches;
}

}  // namespace

Tensor linear_forward(const Tensor& x, const Tensor& w, const Tensor& b)
{
    const std::size_t n = x.shape()[0], in = x.shape()[1], out = w.shape()[0];
    if (w.shape()[1] != in) {
        throw DimensionError("reference linear: " + shape_str(x.shape()) + " vs " + shape_str(w.shape()));
    }
    Tensor y({n, out});
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t o = 0; o < out; ++o) {
            double s = b[o];
            for (std::size_t i = 0; i < in; ++i) {
                s += w.at(o, i) * x.at(r, i);
            }
            y.at(r, o) = s;
        }
    }
    return y;
}

LinearGrads linear_backward(const Tensor& x, const Tensor& w, const Tensor& gy)
{
    const std::size_t n = x.shape()[0], in = x.shape()[1], out = w.shape()[0];
    LinearGrads g{Tensor(x.shape()), Tensor(w.shape()), Tensor({out})};
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t o = 0; o < out; ++o) {
            const double go = gy.at(r, o);
            g.db[o] += go;
            for (std::size_t i = 0; i < in; ++i) {
                g.dw.at(o, i) += go * x.at(r, i);
                g.dx.at(r, i) += go * w.at(o, i);
            }
        }
    }
    return g;
}

Tensor conv1d_forward(const Tensor& x, const Tensor& w, const Tensor& b)
{
    const std::size_t batch = x.shape()[0], cin = x.shape()[1], len = x.shape()[2];
    const std::size_t cout = w.shape()[0], k = w.shape()[2];
    const auto pad = static_cast<long>(k / 2);
    Tensor y({batch, cout, len});
    for (std::size_t bi = 0; bi < batch; ++bi) {
        for (std::size_t o = 0; o < cout; ++o) {
            for (std::size_t l = 0; l < len; ++l) {
                double s = b[o];
                for (std::size_t p = 0; p < cin; ++p) {
                    for (std::size_t j = 0; j < k; ++j) {
                        const long pos = static_cast<long>(l + j) - pad;
                        if (pos >= 0 && pos < static_cast<long>(len)) {
                            s += w.at(o, p, j) * x.at(bi, p, static_cast<std::size_t>(pos));
                        }
                    }
                }
                y.at(bi, o, l) = s;
            }
        }
    }
    return y;
}

ConvGrads conv1d_backward(const Tensor& x, const Tensor& w, const Tensor& gy)
{
    const std::size_t batch = x.shape()[0], cin = x.shape()[1], len = x.shape()[2];
    const std::size_t cout = w.shape()[0], k = w.shape()[2];
    const auto pad = static_cast<long>(k / 2);
    ConvGrads g{Tensor(x.shape()), Tensor(w.shape()), Tensor({cout})};
    for (std::size_t bi = 0; bi < batch; ++bi) {
        for (std::size_t o = 0; o < cout; ++o) {
            for (std::size_t l = 0; l < len; ++l) {
                const double go = gy.at(bi, o, l);
                g.db[o] += go;
                for (std::size_t p = 0; p < cin; ++p) {
                    for (std::size_t j = 0; j < k; ++j) {
                        const long pos = static_cast<long>(l + j) - pad;
                        if (pos >= 0 && pos < static_cast<long>(len)) {
                            const auto ps = static_cast<std::size_t>(pos);
                            g.dw.at(o, p, j) += go * x.at(bi, p, ps);
                            g.dx.at(bi, p, ps) += go * w.at(o, p, j);
                        }
                    }
                }
            }
        }
    }
    return g;
}

Tensor recurrent_forward(const RecurrentCell& cell, const Tensor& x)
{
    const auto caches = run_forward(cell, x);
    const std::size_t batch = x.shape()[0], steps = x.shape()[1], h = cell.hidden_size;
    Tensor out({batch, steps, h});
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t t = 0; t < steps; ++t) {
            for (std::size_t j = 0; j < h; ++j) {
                out.at(b, t, j) = caches[b][t].h[j];
            }
        }
    }
    return out;
}

CellGrads recurrent_backward(const RecurrentCell& cell, const Tensor& x, const Tensor& d_hseq)
{
    const auto caches = run_forward(cell, x);
    const std::size_t batch = x.shape()[0], steps = x.shape()[1], f = x.shape()[2], h = cell.hidden_size;
    const std::size_t gc = gate_count(cell.kind);
    CellGrads g{Tensor(x.shape()), Tensor(cell.w_ih.value.shape()), Tensor(cell.w_hh.value.shape()),
                Tensor(cell.b_ih.value.shape()), Tensor(cell.b_hh.value.shape())};
    for (std::size_t b = 0; b < batch; ++b) {
        std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0);
        for (std::size_t t = steps; t-- > 0;) {
            const StepCache& sc = caches[b][t];
            const double* xt = x.data().data() + (b * steps + t) * f;
            std::vector<double> dh(h);
            for (std::size_t j = 0; j < h; ++j) {
                dh[j] = d_hseq.at(b, t, j) + dh_next[j];
            }
            // Gradients w.r.t. the input-side and hidden-side pre-activations.
            std::vector<double> dai(gc * h, 0.0), dah(gc * h, 0.0);
            std::vector<double> dh_prev(h, 0.0);
            switch (cell.kind) {
            case RnnKind::kLstm:
                for (std::size_t j = 0; j < h; ++j) {
                    const double i = sc.gates[j], fg = sc.gates[h + j], gg = sc.gates[2 * h + j],
                                 o = sc.gates[3 * h + j];
                    const double tc = std::tanh(sc.aux[j]);
                    const double dc = dc_next[j] + dh[j] * o * (1.0 - tc * tc);
                    dai[j] = dc * gg * i * (1.0 - i);
                    dai[h + j] = dc * sc.c_prev[j] * fg * (1.0 - fg);
                    dai[2 * h + j] = dc * i * (1.0 - gg * gg);
                    dai[3 * h + j] = dh[j] * tc * o * (1.0 - o);
                    dc_next[j] = dc * fg;
                }
                dah = dai;
                break;
            case RnnKind::kGru:
                for (std::size_t j = 0; j < h; ++j) {
                    const double r = sc.gates[j], z = sc.gates[h + j], n = sc.gates[2 * h + j];
                    const double dn = dh[j] * (1.0 - z);
                    const double dz = dh[j] * (sc.h_prev[j] - n);
                    dh_prev[j] = dh[j] * z;
                    const double dan = dn * (1.0 - n * n);
                    const double dr = dan * sc.aux[j];
                    dai[j] = dah[j] = dr * r * (1.0 - r);
                    dai[h + j] = dah[h + j] = dz * z * (1.0 - z);
                    dai[2 * h + j] = dan;
                    dah[2 * h + j] = dan * r;
                }
                break;
            case RnnKind::kElman:
                for (std::size_t j = 0; j < h; ++j) {
                    dai[j] = dh[j] * (1.0 - sc.h[j] * sc.h[j]);
                }
                dah = dai;
                break;
            }
            outer_add(g.dw_ih, dai.data(), xt);
            outer_add(g.dw_hh, dah.data(), sc.h_prev.data());
            for (std::size_t k = 0; k < gc * h; ++k) {
                g.db_ih[k] += dai[k];
                if (cell.kind != RnnKind::kElman) {
                    g.db_hh[k] += dah[k];
                }
            }
            gemv_t(cell.w_ih.value, dai.data(), g.dx.data().data() + (b * steps + t) * f);
            gemv_t(cell.w_hh.value, dah.data(), dh_prev.data());
            dh_next = dh_prev;
        }
    }
    return g;
}

}  // namespace aisf::nn::reference
