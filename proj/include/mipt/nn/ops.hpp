// Copyright 2026 The mipt-decoder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "mipt/error.hpp"
#include "mipt/nn/tape.hpp"
#include "mipt/nn/tensor.hpp"
#include "mipt/rng.hpp"

namespace mipt::nn {

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

/// Splits a shape around `axis` into (outer, extent, inner) strides.
struct AxisSplit {
    std::size_t outer = 1, extent = 1, inner = 1;
};

inline AxisSplit split_axis(const Shape& s, std::size_t axis) {
    require(axis < s.size(), "axis " + std::to_string(axis) + " out of range for shape " + shape_string(s));
    AxisSplit a;
    for (std::size_t i = 0; i < axis; ++i) a.outer *= s[i];
    a.extent = s[axis];
    for (std::size_t i = axis + 1; i < s.size(); ++i) a.inner *= s[i];
    return a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise and shape ops.

inline Var add(Var a, Var b) {
    detail::require(a.shape() == b.shape(), "add: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    Tensor out = a.value();
    out += b.value();
    return a.tape->push(std::move(out), [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

inline Var scale(Var a, double s) {
    Tensor out = a.value();
    for (auto& v : out.data()) v *= s;
    return a.tape->push(std::move(out), [a, s](Tape& t, const Tensor& g) {
        Tensor ga = g;
        for (auto& v : ga.data()) v *= s;
        t.accumulate(a, ga);
    });
}

inline Var sum(Var a) {
    double s = 0.0;
    for (double v : a.value().data()) s += v;
    return a.tape->push(Tensor::scalar(s), [a](Tape& t, const Tensor& g) {
        t.accumulate(a, Tensor(a.shape(), g[0]));
    });
}

inline Var reshape(Var a, Shape s) {
    Tensor out = a.value().reshaped(std::move(s));
    return a.tape->push(std::move(out), [a](Tape& t, const Tensor& g) { t.accumulate(a, g.reshaped(a.shape())); });
}

inline Var relu(Var a) {
    Tensor out = a.value();
    for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
    return a.tape->push(std::move(out), [a](Tape& t, const Tensor& g) {
        const Tensor& x = a.value();
        Tensor ga(g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] = x[i] > 0.0 ? g[i] : 0.0;
        t.accumulate(a, ga);
    });
}

/// Numerically stable softmax along `axis`.
inline Var softmax(Var a, std::size_t axis) {
    const auto sp = detail::split_axis(a.shape(), axis);
    const Tensor& x = a.value();
    Tensor y(x.shape());
    for (std::size_t o = 0; o < sp.outer; ++o) {
        for (std::size_t in = 0; in < sp.inner; ++in) {
            const std::size_t base = o * sp.extent * sp.inner + in;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < sp.extent; ++k) mx = std::max(mx, x[base + k * sp.inner]);
            double z = 0.0;
            for (std::size_t k = 0; k < sp.extent; ++k) {
                const double e = std::exp(x[base + k * sp.inner] - mx);
                y[base + k * sp.inner] = e;
                z += e;
            }
            for (std::size_t k = 0; k < sp.extent; ++k) y[base + k * sp.inner] /= z;
        }
    }
    Tensor y_saved = y;
    return a.tape->push(std::move(y), [a, sp, yv = std::move(y_saved)](Tape& t, const Tensor& g) {
        Tensor ga(g.shape());
        for (std::size_t o = 0; o < sp.outer; ++o) {
            for (std::size_t in = 0; in < sp.inner; ++in) {
                const std::size_t base = o * sp.extent * sp.inner + in;
                double dot = 0.0;
                for (std::size_t k = 0; k < sp.extent; ++k) dot += g[base + k * sp.inner] * yv[base + k * sp.inner];
                for (std::size_t k = 0; k < sp.extent; ++k) {
                    const std::size_t i = base + k * sp.inner;
                    ga[i] = yv[i] * (g[i] - dot);
                }
            }
        }
        t.accumulate(a, ga);
    });
}

/// Inverted dropout: in training each element is zeroed with probability p
/// and survivors are scaled by 1 / (1 - p). Identity in eval mode or at p = 0.
inline Var dropout(Var a, double p, Mode mode, Rng& rng) {
    detail::require(p >= 0.0 && p < 1.0, "dropout probability must lie in [0, 1)");
    if (mode == Mode::Eval || p == 0.0) return a;
    const double keep_scale = 1.0 / (1.0 - p);
    Tensor mask(a.shape());
    for (auto& m : mask.data()) m = rng.uniform() < p ? 0.0 : keep_scale;
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
    return a.tape->push(std::move(out), [a, mask = std::move(mask)](Tape& t, const Tensor& g) {
        Tensor ga = g;
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= mask[i];
        t.accumulate(a, ga);
    });
}

/// Concatenation along `axis`; all other extents must agree.
inline Var concat(const std::vector<Var>& parts, std::size_t axis) {
    detail::require(!parts.empty(), "concat of nothing");
    Shape s = parts[0].shape();
    detail::require(axis < s.size(), "concat axis out of range");
    std::size_t total = 0;
    for (const Var& p : parts) {
        Shape ps = p.shape();
        detail::require(ps.size() == s.size(), "concat rank mismatch");
        for (std::size_t i = 0; i < s.size(); ++i)
            if (i != axis) detail::require(ps[i] == s[i], "concat extent mismatch");
        total += ps[axis];
    }
    s[axis] = total;
    const auto sp = detail::split_axis(s, axis);
    Tensor out(s);
    std::size_t offset = 0;
    std::vector<std::size_t> offsets;
    for (const Var& p : parts) {
        const Tensor& v = p.value();
        const std::size_t ext = v.dim(axis);
        for (std::size_t o = 0; o < sp.outer; ++o)
            for (std::size_t k = 0; k < ext; ++k)
                for (std::size_t in = 0; in < sp.inner; ++in)
                    out[(o * total + offset + k) * sp.inner + in] = v[(o * ext + k) * sp.inner + in];
        offsets.push_back(offset);
        offset += ext;
    }
    return parts[0].tape->push(std::move(out), [parts, offsets, sp, total, axis](Tape& t, const Tensor& g) {
        for (std::size_t j = 0; j < parts.size(); ++j) {
            const Shape& ps = parts[j].shape();
            const std::size_t ext = ps[axis];
            Tensor gp(ps);
            for (std::size_t o = 0; o < sp.outer; ++o)
                for (std::size_t k = 0; k < ext; ++k)
                    for (std::size_t in = 0; in < sp.inner; ++in)
                        gp[(o * ext + k) * sp.inner + in] = g[(o * total + offsets[j] + k) * sp.inner + in];
            t.accumulate(parts[j], gp);
        }
    });
}

/// Swaps the last two axes: [..., A, B] -> [..., B, A].
inline Var transpose_last2(Var a) {
    const Shape& s = a.shape();
    detail::require(s.size() >= 2, "transpose needs rank >= 2");
    const std::size_t A = s[s.size() - 2], B = s[s.size() - 1];
    const std::size_t batch = a.value().size() / (A * B);
    Shape os = s;
    std::swap(os[os.size() - 2], os[os.size() - 1]);
    auto swap_ab = [batch, A, B](const Tensor& in, Tensor& out) {
        for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t i = 0; i < A; ++i)
                for (std::size_t j = 0; j < B; ++j) out[(n * B + j) * A + i] = in[(n * A + i) * B + j];
    };
    Tensor out(os);
    swap_ab(a.value(), out);
    return a.tape->push(std::move(out), [a, batch, A, B](Tape& t, const Tensor& g) {
        Tensor ga(a.shape());
        for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t i = 0; i < A; ++i)
                for (std::size_t j = 0; j < B; ++j) ga[(n * A + i) * B + j] = g[(n * B + j) * A + i];
        t.accumulate(a, ga);
    });
}

// ---------------------------------------------------------------------------
// Affine maps.

/// [m, k] x [k, n] -> [m, n].
inline Var matmul(Var a, Var b) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    detail::require(sa.size() == 2 && sb.size() == 2 && sa[1] == sb[0],
                    "matmul: incompatible shapes " + shape_string(sa) + " x " + shape_string(sb));
    const std::size_t m = sa[0], k = sa[1], n = sb[1];
    const Tensor& x = a.value();
    const Tensor& w = b.value();
    Tensor out(Shape{m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            const double xv = x[i * k + p];
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] += xv * w[p * n + j];
        }
    return a.tape->push(std::move(out), [a, b, m, k, n](Tape& t, const Tensor& g) {
        const Tensor& x = a.value();
        const Tensor& w = b.value();
        Tensor ga(Shape{m, k}), gb(Shape{k, n});
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    acc += g[i * n + j] * w[p * n + j];
                    gb[p * n + j] += x[i * k + p] * g[i * n + j];
                }
                ga[i * k + p] = acc;
            }
        t.accumulate(a, ga);
        t.accumulate(b, gb);
    });
}

/// x [..., F_in] W [F_in, F_out] + b [F_out], batched over leading axes.
inline Var linear(Var x, Var w, Var b) {
    const Shape& sx = x.shape();
    const Shape& sw = w.shape();
    detail::require(!sx.empty() && sw.size() == 2 && sx.back() == sw[0],
                    "linear: input " + shape_string(sx) + " incompatible with weight " + shape_string(sw));
    detail::require(b.shape() == Shape{sw[1]}, "linear: bias must have shape [F_out]");
    const std::size_t fin = sw[0], fout = sw[1];
    const std::size_t rows = x.value().size() / fin;
    Shape os = sx;
    os.back() = fout;
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    const Tensor& bv = b.value();
    Tensor out(os);
    for (std::size_t r = 0; r < rows; ++r) {
        double* o = &out[r * fout];
        for (std::size_t j = 0; j < fout; ++j) o[j] = bv[j];
        for (std::size_t p = 0; p < fin; ++p) {
            const double v = xv[r * fin + p];
            if (v == 0.0) continue;
            const double* wr = &wv[p * fout];
            for (std::size_t j = 0; j < fout; ++j) o[j] += v * wr[j];
        }
    }
    return x.tape->push(std::move(out), [x, w, b, rows, fin, fout](Tape& t, const Tensor& g) {
        const Tensor& xv = x.value();
        const Tensor& wv = w.value();
        Tensor gx(x.shape()), gw(w.shape()), gb(b.shape());
        for (std::size_t r = 0; r < rows; ++r) {
            const double* gr = &g[r * fout];
            for (std::size_t j = 0; j < fout; ++j) gb[j] += gr[j];
            for (std::size_t p = 0; p < fin; ++p) {
                const double* wr = &wv[p * fout];
                const double xrp = xv[r * fin + p];
                double acc = 0.0;
                double* gwr = &gw[p * fout];
                for (std::size_t j = 0; j < fout; ++j) {
                    acc += gr[j] * wr[j];
                    gwr[j] += xrp * gr[j];
                }
                gx[r * fin + p] = acc;
            }
        }
        t.accumulate(x, gx);
        t.accumulate(w, gw);
        t.accumulate(b, gb);
    });
}

// ---------------------------------------------------------------------------
// Convolution and pooling.

/// Cross-correlation of [N, C_in, H, W] with [C_out, C_in, 3, 3], stride 1,
/// zero padding 1 on both spatial axes, no bias.
inline Var conv2d_3x3(Var x, Var w) {
    const Shape& sx = x.shape();
    const Shape& sw = w.shape();
    detail::require(sx.size() == 4 && sw.size() == 4 && sw[1] == sx[1] && sw[2] == 3 && sw[3] == 3,
                    "conv2d_3x3: input " + shape_string(sx) + " incompatible with weight " + shape_string(sw));
    const std::size_t N = sx[0], Ci = sx[1], H = sx[2], W = sx[3], Co = sw[0];
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    Tensor out(Shape{N, Co, H, W});
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t o = 0; o < Co; ++o) {
            double* op = &out[(n * Co + o) * H * W];
            for (std::size_t c = 0; c < Ci; ++c) {
                const double* ip = &xv[(n * Ci + c) * H * W];
                const double* k = &wv[(o * Ci + c) * 9];
                for (std::size_t h = 0; h < H; ++h)
                    for (int dh = -1; dh <= 1; ++dh) {
                        const long hh = static_cast<long>(h) + dh;
                        if (hh < 0 || hh >= static_cast<long>(H)) continue;
                        const double* irow = ip + static_cast<std::size_t>(hh) * W;
                        double* orow = op + h * W;
                        for (int dw = -1; dw <= 1; ++dw) {
                            const double kv = k[(dh + 1) * 3 + (dw + 1)];
                            const std::size_t w0 = dw < 0 ? 1 : 0;
                            const std::size_t w1 = dw > 0 ? W - 1 : W;
                            for (std::size_t ww = w0; ww < w1; ++ww) orow[ww] += kv * irow[ww + dw];
                        }
                    }
            }
        }
    return x.tape->push(std::move(out), [x, w, N, Ci, H, W, Co](Tape& t, const Tensor& g) {
        const Tensor& xv = x.value();
        const Tensor& wv = w.value();
        Tensor gx(x.shape()), gw(w.shape());
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t o = 0; o < Co; ++o) {
                const double* gp = &g[(n * Co + o) * H * W];
                for (std::size_t c = 0; c < Ci; ++c) {
                    const double* ip = &xv[(n * Ci + c) * H * W];
                    double* gip = &gx[(n * Ci + c) * H * W];
                    const double* k = &wv[(o * Ci + c) * 9];
                    double* gk = &gw[(o * Ci + c) * 9];
                    for (std::size_t h = 0; h < H; ++h)
                        for (int dh = -1; dh <= 1; ++dh) {
                            const long hh = static_cast<long>(h) + dh;
                            if (hh < 0 || hh >= static_cast<long>(H)) continue;
                            const double* irow = ip + static_cast<std::size_t>(hh) * W;
                            double* girow = gip + static_cast<std::size_t>(hh) * W;
                            const double* grow = gp + h * W;
                            for (int dw = -1; dw <= 1; ++dw) {
                                const std::size_t ki = static_cast<std::size_t>((dh + 1) * 3 + (dw + 1));
                                const double kv = k[ki];
                                const std::size_t w0 = dw < 0 ? 1 : 0;
                                const std::size_t w1 = dw > 0 ? W - 1 : W;
                                double acc = 0.0;
                                for (std::size_t ww = w0; ww < w1; ++ww) {
                                    acc += grow[ww] * irow[ww + dw];
                                    girow[ww + dw] += kv * grow[ww];
                                }
                                gk[ki] += acc;
                            }
                        }
                }
            }
        t.accumulate(x, gx);
        t.accumulate(w, gw);
    });
}

/// Mean over the last axis: [N, C, H, W] -> [N, C, H].
inline Var global_avg_pool_spatial(Var x) {
    const Shape& s = x.shape();
    detail::require(s.size() >= 2 && s.back() >= 1, "global_avg_pool_spatial needs a nonempty last axis");
    const std::size_t W = s.back();
    const std::size_t rows = x.value().size() / W;
    Shape os(s.begin(), s.end() - 1);
    const Tensor& xv = x.value();
    Tensor out(os);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t j = 0; j < W; ++j) acc += xv[r * W + j];
        out[r] = acc / static_cast<double>(W);
    }
    return x.tape->push(std::move(out), [x, rows, W](Tape& t, const Tensor& g) {
        Tensor gx(x.shape());
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < W; ++j) gx[r * W + j] = g[r] / static_cast<double>(W);
        t.accumulate(x, gx);
    });
}

/// Mean over the first axis: [N, F] -> [1, F].
inline Var mean_rows(Var x) {
    const Shape& s = x.shape();
    detail::require(s.size() == 2 && s[0] >= 1, "mean_rows needs a nonempty [N, F] input");
    const std::size_t N = s[0], F = s[1];
    Tensor out(Shape{1, F});
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t f = 0; f < F; ++f) out[f] += x.value()[n * F + f] / static_cast<double>(N);
    return x.tape->push(std::move(out), [x, N, F](Tape& t, const Tensor& g) {
        Tensor gx(x.shape());
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t f = 0; f < F; ++f) gx[n * F + f] = g[f] / static_cast<double>(N);
        t.accumulate(x, gx);
    });
}

// ---------------------------------------------------------------------------
// Normalisation.

/// Per-channel batch normalisation state for [N, C, H, W] activations.
struct BatchNormState {
    Parameter gamma_scale;
    Parameter beta_shift;
    Tensor running_mean;
    Tensor running_var;
    double momentum = 0.1;
    double eps = 1e-5;

    BatchNormState() = default;
    BatchNormState(const std::string& name, std::size_t channels)
        : gamma_scale(name + ".scale", Tensor(Shape{channels}, 1.0)),
          beta_shift(name + ".shift", Tensor(Shape{channels}, 0.0)),
          running_mean(Shape{channels}, 0.0),
          running_var(Shape{channels}, 1.0) {}

    std::size_t channels() const { return running_mean.size(); }
};

namespace detail {

/// Shared body: normalise with given per-channel mean / inverse std, apply affine.
inline Tensor bn_apply(const Tensor& x, const std::vector<double>& mean, const std::vector<double>& inv, const Tensor& sc,
                       const Tensor& sh, Tensor& xhat) {
    const std::size_t N = x.dim(0), C = x.dim(1), HW = x.size() / (N * C);
    Tensor y(x.shape());
    xhat = Tensor(x.shape());
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t i = 0; i < HW; ++i) {
                const std::size_t idx = (n * C + c) * HW + i;
                xhat[idx] = (x[idx] - mean[c]) * inv[c];
                y[idx] = sc[c] * xhat[idx] + sh[c];
            }
    return y;
}

}  // namespace detail

/// Per-channel batch statistics observed by a train-mode pass.
struct BatchStats {
    std::vector<double> mean;
    std::vector<double> var;
};

/// Train mode normalises each channel over (N, H, W) with the biased batch
/// variance (reported through `observed` when non-null); eval mode uses the
/// running statistics only.
inline Var batch_norm2d(Var x, Var scale, Var shift, Mode mode, double eps, const Tensor* running_mean,
                        const Tensor* running_var, BatchStats* observed = nullptr) {
    const Shape& s = x.shape();
    detail::require(s.size() == 4, "batch_norm2d needs [N, C, H, W]");
    const std::size_t N = s[0], C = s[1], HW = s[2] * s[3];
    detail::require(scale.shape() == Shape{C} && shift.shape() == Shape{C}, "batch_norm2d affine shape mismatch");
    const std::size_t m = N * HW;
    const Tensor& xv = x.value();
    std::vector<double> mean(C, 0.0), var(C, 0.0), inv(C, 0.0);
    if (mode == Mode::Train) {
        detail::require(m >= 2, "batch_norm2d in train mode needs N*H*W >= 2");
        for (std::size_t c = 0; c < C; ++c) {
            double acc = 0.0;
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t i = 0; i < HW; ++i) acc += xv[(n * C + c) * HW + i];
            mean[c] = acc / static_cast<double>(m);
            double ss = 0.0;
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t i = 0; i < HW; ++i) {
                    const double d = xv[(n * C + c) * HW + i] - mean[c];
                    ss += d * d;
                }
            var[c] = ss / static_cast<double>(m);
            if (var[c] < 0.0) throw InternalError("negative batch variance");
            inv[c] = 1.0 / std::sqrt(var[c] + eps);
        }
        if (observed) *observed = BatchStats{mean, var};
    } else {
        detail::require(running_mean && running_var && running_mean->size() == C && running_var->size() == C,
                        "batch_norm2d eval mode needs running statistics");
        for (std::size_t c = 0; c < C; ++c) {
            if ((*running_var)[c] < 0.0) throw InternalError("negative running variance");
            mean[c] = (*running_mean)[c];
            inv[c] = 1.0 / std::sqrt((*running_var)[c] + eps);
        }
    }
    Tensor xhat;
    Tensor y = detail::bn_apply(xv, mean, inv, scale.value(), shift.value(), xhat);
    const bool train = mode == Mode::Train;
    return x.tape->push(std::move(y), [x, scale, shift, xhat = std::move(xhat), inv, N, C, HW, m, train](Tape& t,
                                                                                                      const Tensor& g) {
        const Tensor& sc = scale.value();
        Tensor gx(x.shape()), gs(Shape{C}), gb(Shape{C});
        for (std::size_t c = 0; c < C; ++c) {
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t i = 0; i < HW; ++i) {
                    const std::size_t idx = (n * C + c) * HW + i;
                    sum_dy += g[idx];
                    sum_dy_xhat += g[idx] * xhat[idx];
                }
            gs[c] = sum_dy_xhat;
            gb[c] = sum_dy;
            const double md = static_cast<double>(m);
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t i = 0; i < HW; ++i) {
                    const std::size_t idx = (n * C + c) * HW + i;
                    if (train) {
                        // Full Jacobian through the batch mean and variance.
                        gx[idx] = sc[c] * inv[c] / md * (md * g[idx] - sum_dy - xhat[idx] * sum_dy_xhat);
                    } else {
                        gx[idx] = sc[c] * inv[c] * g[idx];
                    }
                }
        }
        t.accumulate(x, gx);
        t.accumulate(scale, gs);
        t.accumulate(shift, gb);
    });
}

/// Train mode also folds the batch statistics into the running averages:
/// running <- (1 - momentum) running + momentum batch.
inline Var batch_norm2d(Var x, BatchNormState& st, Mode mode) {
    BatchStats observed;
    Var y = batch_norm2d(x, x.tape->leaf(st.gamma_scale), x.tape->leaf(st.beta_shift), mode, st.eps, &st.running_mean,
                         &st.running_var, &observed);
    if (mode == Mode::Train) {
        for (std::size_t c = 0; c < st.channels(); ++c) {
            st.running_mean[c] = (1.0 - st.momentum) * st.running_mean[c] + st.momentum * observed.mean[c];
            st.running_var[c] = (1.0 - st.momentum) * st.running_var[c] + st.momentum * observed.var[c];
        }
    }
    return y;
}

/// Eval-only overload for a shared, read-only model.
inline Var batch_norm2d(Var x, const BatchNormState& st) {
    return batch_norm2d(x, x.tape->leaf(st.gamma_scale), x.tape->leaf(st.beta_shift), Mode::Eval, st.eps,
                        &st.running_mean, &st.running_var);
}

/// Affine parameters of a layer normalisation over the last axis.
struct LayerNormParams {
    Parameter scale;
    Parameter shift;
    double eps = 1e-5;

    LayerNormParams() = default;
    LayerNormParams(const std::string& name, std::size_t features)
        : scale(name + ".scale", Tensor(Shape{features}, 1.0)), shift(name + ".shift", Tensor(Shape{features}, 0.0)) {}
};

/// Normalises each row of the last axis to zero mean and unit (biased)
/// variance, then applies the per-feature affine map.
inline Var layer_norm(Var x, Var scale, Var shift, double eps) {
    const Shape& s = x.shape();
    detail::require(!s.empty() && s.back() >= 1, "layer_norm needs a nonempty last axis");
    const std::size_t F = s.back();
    detail::require(scale.shape() == Shape{F} && shift.shape() == Shape{F}, "layer_norm affine shape mismatch");
    const std::size_t rows = x.value().size() / F;
    const Tensor& xv = x.value();
    const Tensor& sc = scale.value();
    const Tensor& sh = shift.value();
    Tensor y(s), xhat(s);
    std::vector<double> inv(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double mu = 0.0;
        for (std::size_t f = 0; f < F; ++f) mu += xv[r * F + f];
        mu /= static_cast<double>(F);
        double var = 0.0;
        for (std::size_t f = 0; f < F; ++f) var += (xv[r * F + f] - mu) * (xv[r * F + f] - mu);
        var /= static_cast<double>(F);
        inv[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t f = 0; f < F; ++f) {
            xhat[r * F + f] = (xv[r * F + f] - mu) * inv[r];
            y[r * F + f] = sc[f] * xhat[r * F + f] + sh[f];
        }
    }
    return x.tape->push(std::move(y), [x, scale, shift, xhat = std::move(xhat), inv = std::move(inv), rows, F](
                                          Tape& t, const Tensor& g) {
        const Tensor& sc = scale.value();
        Tensor gx(x.shape()), gs(Shape{F}), gb(Shape{F});
        const double fd = static_cast<double>(F);
        for (std::size_t r = 0; r < rows; ++r) {
            double sum_d = 0.0, sum_d_xhat = 0.0;
            for (std::size_t f = 0; f < F; ++f) {
                const double d = g[r * F + f] * sc[f];
                sum_d += d;
                sum_d_xhat += d * xhat[r * F + f];
                gs[f] += g[r * F + f] * xhat[r * F + f];
                gb[f] += g[r * F + f];
            }
            for (std::size_t f = 0; f < F; ++f) {
                const double d = g[r * F + f] * sc[f];
                gx[r * F + f] = inv[r] / fd * (fd * d - sum_d - xhat[r * F + f] * sum_d_xhat);
            }
        }
        t.accumulate(x, gx);
        t.accumulate(scale, gs);
        t.accumulate(shift, gb);
    });
}

template <typename LN>
Var layer_norm(Var x, LN& p) {
    return layer_norm(x, x.tape->leaf(p.scale), x.tape->leaf(p.shift), p.eps);
}

// ---------------------------------------------------------------------------
// Set pooling and loss.

/// Single-query scaled dot-product attention over the rows of z:
///   K = z W_K, V = z W_V, q = o + softmax(o K^T / sqrt(F)) V
/// with z [N, F], o [1, F], W_K and W_V [F, F]. The softmax runs over N.
inline Var attention_pool(Var z, Var o, Var w_k, Var w_v) {
    const Shape& sz = z.shape();
    detail::require(sz.size() == 2, "attention_pool needs z of shape [N, F]");
    const std::size_t F = sz[1];
    detail::require(o.shape() == Shape({1, F}), "attention_pool query must be [1, F]");
    detail::require(w_k.shape() == Shape({F, F}) && w_v.shape() == Shape({F, F}), "attention_pool projections must be [F, F]");
    Var keys = matmul(z, w_k);
    Var values = matmul(z, w_v);
    Var scores = scale(matmul(o, transpose_last2(keys)), 1.0 / std::sqrt(static_cast<double>(F)));
    Var weights = softmax(scores, 1);
    return add(o, matmul(weights, values));
}

/// Mean over rows of -log(max(pred[r, label], 1e-12)), pred of shape [..., C].
inline Var cross_entropy_loss(Var pred, std::size_t label) {
    const Shape& s = pred.shape();
    detail::require(!s.empty() && label < s.back(), "cross_entropy_loss: label out of range");
    const std::size_t C = s.back();
    const std::size_t rows = pred.value().size() / C;
    constexpr double kFloor = 1e-12;
    double loss = 0.0;
    for (std::size_t r = 0; r < rows; ++r) loss -= std::log(std::max(pred.value()[r * C + label], kFloor));
    loss /= static_cast<double>(rows);
    return pred.tape->push(Tensor::scalar(loss), [pred, label, C, rows](Tape& t, const Tensor& g) {
        Tensor gp(pred.shape());
        for (std::size_t r = 0; r < rows; ++r) {
            const double p = pred.value()[r * C + label];
            if (p >= kFloor) gp[r * C + label] = -g[0] / (static_cast<double>(rows) * p);
        }
        t.accumulate(pred, gp);
    });
}

}  // namespace mipt::nn
