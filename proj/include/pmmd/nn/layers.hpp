#pragma once

#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include "pmmd/core/tensor.hpp"
#include "pmmd/nn/module.hpp"

namespace pmmd::nn {

// ---------------------------------------------------------------------------
// Linear: tokens (T, in) -> (T, out), y = x W^T + b, W stored (out, in).
// ---------------------------------------------------------------------------
template <typename S>
struct Linear {
    Parameter<S> w, b;
    int in = 0, out = 0;
    bool has_bias = true;

    void build(const std::string& name, int in_dim, int out_dim, ParamRegistry<S>& reg,
               Init init = Init::kLecunNormal, bool bias = true) {
        in = in_dim;
        out = out_dim;
        has_bias = bias;
        w = {name + ".w", Tensor<S>({out_dim, in_dim}), init, in_dim};
        reg.add(w);
        if (bias) {
            b = {name + ".b", Tensor<S>({out_dim}), Init::kZero, 1};
            reg.add(b);
        }
    }

    Tensor<S> forward(const Tensor<S>& x, Tape<S>* tape) const {
        PMMD_CHECK(x.rank() == 2 && x.dim(1) == in, w.name, ": expected (T,", in, "), got ",
                   x.shape_str());
        const int t = x.dim(0);
        Tensor<S> y({t, out});
        gemm(x.data(), w.value.data(), y.data(), t, in, out, false, true);
        if (has_bias)
            for (int i = 0; i < t; ++i)
                for (int j = 0; j < out; ++j) y.at(i, j) += b.value[static_cast<std::size_t>(j)];
        if (tape) tape->push(x);
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy, Tape<S>& tape, GradStore<S>& g) const {
        Tensor<S> x = tape.pop();
        const int t = x.dim(0);
        // dW += dy^T x ; db += colsum(dy) ; dx = dy W
        gemm(dy.data(), x.data(), g.at(w), out, t, in, true, false, S(1), S(1));
        if (has_bias) {
            S* db = g.at(b);
            for (int i = 0; i < t; ++i)
                for (int j = 0; j < out; ++j) db[j] += dy.at(i, j);
        }
        Tensor<S> dx({t, in});
        gemm(dy.data(), w.value.data(), dx.data(), t, out, in, false, false);
        return dx;
    }
};

// ---------------------------------------------------------------------------
// Conv2d on (C, H, W) maps via im2col + GEMM. W stored (cout, cin*k*k).
// ---------------------------------------------------------------------------
template <typename S>
struct Conv2d {
    Parameter<S> w, b;
    int cin = 0, cout = 0, k = 3, stride = 1, pad = 1;

    void build(const std::string& name, int in_ch, int out_ch, int kernel, int stride_, int pad_,
               ParamRegistry<S>& reg, Init init = Init::kLecunNormal) {
        cin = in_ch;
        cout = out_ch;
        k = kernel;
        stride = stride_;
        pad = pad_;
        w = {name + ".w", Tensor<S>({out_ch, in_ch * kernel * kernel}), init, in_ch * kernel * kernel};
        reg.add(w);
        b = {name + ".b", Tensor<S>({out_ch}), Init::kZero, 1};
        reg.add(b);
    }

    int out_h(int h) const { return (h + 2 * pad - k) / stride + 1; }
    int out_w(int wd) const { return (wd + 2 * pad - k) / stride + 1; }

    Tensor<S> forward(const Tensor<S>& x, Tape<S>* tape) const {
        PMMD_CHECK(x.rank() == 3 && x.dim(0) == cin, w.name, ": expected (", cin, ",H,W), got ",
                   x.shape_str());
        const int h = x.dim(1), wd = x.dim(2);
        const int ho = out_h(h), wo = out_w(wd);
        PMMD_CHECK(ho > 0 && wo > 0, w.name, ": output would be empty for input ", x.shape_str());
        Tensor<S> y({cout, ho, wo});
        if (k == 1 && stride == 1 && pad == 0) {
            gemm(w.value.data(), x.data(), y.data(), cout, cin, h * wd);
        } else {
            Tensor<S> col = im2col(x, ho, wo);
            gemm(w.value.data(), col.data(), y.data(), cout, cin * k * k, ho * wo);
        }
        for (int c = 0; c < cout; ++c) {
            S* row = y.data() + static_cast<std::size_t>(c) * ho * wo;
            const S bias = b.value[static_cast<std::size_t>(c)];
            for (int i = 0; i < ho * wo; ++i) row[i] += bias;
        }
        if (tape) tape->push(x);
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy, Tape<S>& tape, GradStore<S>& g) const {
        Tensor<S> x = tape.pop();
        const int h = x.dim(1), wd = x.dim(2);
        const int ho = dy.dim(1), wo = dy.dim(2);
        S* db = g.at(b);
        for (int c = 0; c < cout; ++c) {
            const S* row = dy.data() + static_cast<std::size_t>(c) * ho * wo;
            for (int i = 0; i < ho * wo; ++i) db[c] += row[i];
        }
        Tensor<S> dx({cin, h, wd});
        if (k == 1 && stride == 1 && pad == 0) {
            gemm(dy.data(), x.data(), g.at(w), cout, ho * wo, cin, false, true, S(1), S(1));
            gemm(w.value.data(), dy.data(), dx.data(), cin, cout, ho * wo, true, false);
        } else {
            Tensor<S> col = im2col(x, ho, wo);
            gemm(dy.data(), col.data(), g.at(w), cout, ho * wo, cin * k * k, false, true, S(1), S(1));
            Tensor<S> dcol({cin * k * k, ho * wo});
            gemm(w.value.data(), dy.data(), dcol.data(), cin * k * k, cout, ho * wo, true, false);
            col2im_add(dcol, dx, ho, wo);
        }
        return dx;
    }

private:
    Tensor<S> im2col(const Tensor<S>& x, int ho, int wo) const {
        const int h = x.dim(1), wd = x.dim(2);
        Tensor<S> col({cin * k * k, ho * wo});
        for (int c = 0; c < cin; ++c) {
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    S* dst = col.data() + static_cast<std::size_t>((c * k + ky) * k + kx) * ho * wo;
                    for (int oy = 0; oy < ho; ++oy) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= h) {
                            for (int ox = 0; ox < wo; ++ox) dst[oy * wo + ox] = S(0);
                            continue;
                        }
                        const S* src = x.data() + (static_cast<std::size_t>(c) * h + iy) * wd;
                        for (int ox = 0; ox < wo; ++ox) {
                            const int ix = ox * stride + kx - pad;
                            dst[oy * wo + ox] = (ix >= 0 && ix < wd) ? src[ix] : S(0);
                        }
                    }
                }
            }
        }
        return col;
    }

    void col2im_add(const Tensor<S>& col, Tensor<S>& dx, int ho, int wo) const {
        const int h = dx.dim(1), wd = dx.dim(2);
        for (int c = 0; c < cin; ++c) {
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const S* src = col.data() + static_cast<std::size_t>((c * k + ky) * k + kx) * ho * wo;
                    for (int oy = 0; oy < ho; ++oy) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= h) continue;
                        S* dst = dx.data() + (static_cast<std::size_t>(c) * h + iy) * wd;
                        for (int ox = 0; ox < wo; ++ox) {
                            const int ix = ox * stride + kx - pad;
                            if (ix >= 0 && ix < wd) dst[ix] += src[oy * wo + ox];
                        }
                    }
                }
            }
        }
    }
};

// ---------------------------------------------------------------------------
// GroupNorm over (C, H, W); statistics per group of channels.
// ---------------------------------------------------------------------------
template <typename S>
struct GroupNorm {
    Parameter<S> gamma, beta;
    int channels = 0, groups = 1;
    double eps = 1e-5;

    void build(const std::string& name, int ch, int groups_, ParamRegistry<S>& reg) {
        PMMD_CHECK(groups_ >= 1 && ch % groups_ == 0, name, ": channels ", ch,
                   " not divisible by groups ", groups_);
        channels = ch;
        groups = groups_;
        gamma = {name + ".gamma", Tensor<S>({ch}), Init::kOne, 1};
        beta = {name + ".beta", Tensor<S>({ch}), Init::kZero, 1};
        reg.add(gamma);
        reg.add(beta);
    }

    Tensor<S> forward(const Tensor<S>& x, Tape<S>* tape) const {
        PMMD_CHECK(x.rank() == 3 && x.dim(0) == channels, gamma.name, ": expected (", channels,
                   ",H,W), got ", x.shape_str());
        const int h = x.dim(1), wd = x.dim(2);
        const int cg = channels / groups;
        const std::size_t gsize = static_cast<std::size_t>(cg) * h * wd;
        Tensor<S> y(x.shape());
        Tensor<S> stats({groups, 2});  // mean, rstd
        for (int g = 0; g < groups; ++g) {
            const S* xin = x.data() + static_cast<std::size_t>(g) * gsize;
            double mean = 0.0;
            for (std::size_t i = 0; i < gsize; ++i) mean += static_cast<double>(xin[i]);
            mean /= static_cast<double>(gsize);
            double var = 0.0;
            for (std::size_t i = 0; i < gsize; ++i) {
                const double d = static_cast<double>(xin[i]) - mean;
                var += d * d;
            }
            var /= static_cast<double>(gsize);
            const double rstd = 1.0 / std::sqrt(var + eps);
            stats.at(g, 0) = static_cast<S>(mean);
            stats.at(g, 1) = static_cast<S>(rstd);
            S* yout = y.data() + static_cast<std::size_t>(g) * gsize;
            for (int cc = 0; cc < cg; ++cc) {
                const int c = g * cg + cc;
                const S ga = gamma.value[static_cast<std::size_t>(c)];
                const S be = beta.value[static_cast<std::size_t>(c)];
                const S* xi = xin + static_cast<std::size_t>(cc) * h * wd;
                S* yo = yout + static_cast<std::size_t>(cc) * h * wd;
                for (int i = 0; i < h * wd; ++i)
                    yo[i] = static_cast<S>((static_cast<double>(xi[i]) - mean) * rstd) * ga + be;
            }
        }
        if (tape) {
            tape->push(x);
            tape->push(std::move(stats));
        }
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy, Tape<S>& tape, GradStore<S>& g) const {
        Tensor<S> stats = tape.pop();
        Tensor<S> x = tape.pop();
        const int h = x.dim(1), wd = x.dim(2);
        const int cg = channels / groups;
        const std::size_t gsize = static_cast<std::size_t>(cg) * h * wd;
        Tensor<S> dx(x.shape());
        S* dgamma = g.at(gamma);
        S* dbeta = g.at(beta);
        for (int gi = 0; gi < groups; ++gi) {
            const double mean = static_cast<double>(stats.at(gi, 0));
            const double rstd = static_cast<double>(stats.at(gi, 1));
            const S* xin = x.data() + static_cast<std::size_t>(gi) * gsize;
            const S* dyin = dy.data() + static_cast<std::size_t>(gi) * gsize;
            // reductions: mean of dxhat and of dxhat * xhat over the group
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
            for (int cc = 0; cc < cg; ++cc) {
                const int c = gi * cg + cc;
                const double ga = static_cast<double>(gamma.value[static_cast<std::size_t>(c)]);
                const S* xi = xin + static_cast<std::size_t>(cc) * h * wd;
                const S* dyi = dyin + static_cast<std::size_t>(cc) * h * wd;
                for (int i = 0; i < h * wd; ++i) {
                    const double xhat = (static_cast<double>(xi[i]) - mean) * rstd;
                    const double dxhat = static_cast<double>(dyi[i]) * ga;
                    sum_dxhat += dxhat;
                    sum_dxhat_xhat += dxhat * xhat;
                    dgamma[c] += static_cast<S>(static_cast<double>(dyi[i]) * xhat);
                    dbeta[c] += dyi[i];
                }
            }
            const double inv_n = 1.0 / static_cast<double>(gsize);
            const double mean_dxhat = sum_dxhat * inv_n;
            const double mean_dxhat_xhat = sum_dxhat_xhat * inv_n;
            S* dxo = dx.data() + static_cast<std::size_t>(gi) * gsize;
            for (int cc = 0; cc < cg; ++cc) {
                const int c = gi * cg + cc;
                const double ga = static_cast<double>(gamma.value[static_cast<std::size_t>(c)]);
                const S* xi = xin + static_cast<std::size_t>(cc) * h * wd;
                const S* dyi = dyin + static_cast<std::size_t>(cc) * h * wd;
                S* dxi = dxo + static_cast<std::size_t>(cc) * h * wd;
                for (int i = 0; i < h * wd; ++i) {
                    const double xhat = (static_cast<double>(xi[i]) - mean) * rstd;
                    const double dxhat = static_cast<double>(dyi[i]) * ga;
                    dxi[i] = static_cast<S>((dxhat - mean_dxhat - xhat * mean_dxhat_xhat) * rstd);
                }
            }
        }
        return dx;
    }
};

// ---------------------------------------------------------------------------
// LayerNorm over the last dim of (T, C) token tensors.
// ---------------------------------------------------------------------------
template <typename S>
struct LayerNorm {
    Parameter<S> gamma, beta;
    int dimn = 0;
    double eps = 1e-5;

    void build(const std::string& name, int d, ParamRegistry<S>& reg) {
        dimn = d;
        gamma = {name + ".gamma", Tensor<S>({d}), Init::kOne, 1};
        beta = {name + ".beta", Tensor<S>({d}), Init::kZero, 1};
        reg.add(gamma);
        reg.add(beta);
    }

    Tensor<S> forward(const Tensor<S>& x, Tape<S>* tape) const {
        PMMD_CHECK(x.rank() == 2 && x.dim(1) == dimn, gamma.name, ": expected (T,", dimn, "), got ",
                   x.shape_str());
        const int t = x.dim(0);
        Tensor<S> y(x.shape());
        Tensor<S> stats({t, 2});
        for (int i = 0; i < t; ++i) {
            double mean = 0.0;
            for (int j = 0; j < dimn; ++j) mean += static_cast<double>(x.at(i, j));
            mean /= dimn;
            double var = 0.0;
            for (int j = 0; j < dimn; ++j) {
                const double d = static_cast<double>(x.at(i, j)) - mean;
                var += d * d;
            }
            var /= dimn;
            const double rstd = 1.0 / std::sqrt(var + eps);
            stats.at(i, 0) = static_cast<S>(mean);
            stats.at(i, 1) = static_cast<S>(rstd);
            for (int j = 0; j < dimn; ++j)
                y.at(i, j) = static_cast<S>((static_cast<double>(x.at(i, j)) - mean) * rstd) *
                                 gamma.value[static_cast<std::size_t>(j)] +
                             beta.value[static_cast<std::size_t>(j)];
        }
        if (tape) {
            tape->push(x);
            tape->push(std::move(stats));
        }
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy, Tape<S>& tape, GradStore<S>& g) const {
        Tensor<S> stats = tape.pop();
        Tensor<S> x = tape.pop();
        const int t = x.dim(0);
        Tensor<S> dx(x.shape());
        S* dgamma = g.at(gamma);
        S* dbeta = g.at(beta);
        for (int i = 0; i < t; ++i) {
            const double mean = static_cast<double>(stats.at(i, 0));
            const double rstd = static_cast<double>(stats.at(i, 1));
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
            for (int j = 0; j < dimn; ++j) {
                const double xhat = (static_cast<double>(x.at(i, j)) - mean) * rstd;
                const double dxhat =
                    static_cast<double>(dy.at(i, j)) * static_cast<double>(gamma.value[static_cast<std::size_t>(j)]);
                sum_dxhat += dxhat;
                sum_dxhat_xhat += dxhat * xhat;
                dgamma[j] += static_cast<S>(static_cast<double>(dy.at(i, j)) * xhat);
                dbeta[j] += dy.at(i, j);
            }
            const double mean_dxhat = sum_dxhat / dimn;
            const double mean_dxhat_xhat = sum_dxhat_xhat / dimn;
            for (int j = 0; j < dimn; ++j) {
                const double xhat = (static_cast<double>(x.at(i, j)) - mean) * rstd;
                const double dxhat =
                    static_cast<double>(dy.at(i, j)) * static_cast<double>(gamma.value[static_cast<std::size_t>(j)]);
                dx.at(i, j) = static_cast<S>((dxhat - mean_dxhat - xhat * mean_dxhat_xhat) * rstd);
            }
        }
        return dx;
    }
};

// ---------------------------------------------------------------------------
// Elementwise activations.
// ---------------------------------------------------------------------------
template <typename S>
Tensor<S> silu_fwd(const Tensor<S>& x, std::type_identity_t<Tape<S>*> tape) {
    Tensor<S> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = static_cast<double>(x[i]);
        y[i] = static_cast<S>(v / (1.0 + std::exp(-v)));
    }
    if (tape) tape->push(x);
    return y;
}

template <typename S>
Tensor<S> silu_bwd(const Tensor<S>& dy, Tape<S>& tape) {
    Tensor<S> x = tape.pop();
    Tensor<S> dx(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = static_cast<double>(x[i]);
        const double sig = 1.0 / (1.0 + std::exp(-v));
        dx[i] = static_cast<S>(static_cast<double>(dy[i]) * sig * (1.0 + v * (1.0 - sig)));
    }
    return dx;
}

template <typename S>
Tensor<S> leaky_relu_fwd(const Tensor<S>& x, double slope, std::type_identity_t<Tape<S>*> tape) {
    Tensor<S> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = x[i] >= S(0) ? x[i] : static_cast<S>(slope * static_cast<double>(x[i]));
    if (tape) tape->push(x);
    return y;
}

template <typename S>
Tensor<S> leaky_relu_bwd(const Tensor<S>& dy, double slope, Tape<S>& tape) {
    Tensor<S> x = tape.pop();
    Tensor<S> dx(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i)
        dx[i] = x[i] >= S(0) ? dy[i] : static_cast<S>(slope * static_cast<double>(dy[i]));
    return dx;
}

// ---------------------------------------------------------------------------
// Spatial resampling and channel plumbing (no parameters).
// ---------------------------------------------------------------------------
template <typename S>
Tensor<S> upsample2x_nearest(const Tensor<S>& x) {
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    Tensor<S> y({c, 2 * h, 2 * w});
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                const S v = x.at(ci, i, j);
                y.at(ci, 2 * i, 2 * j) = v;
                y.at(ci, 2 * i, 2 * j + 1) = v;
                y.at(ci, 2 * i + 1, 2 * j) = v;
                y.at(ci, 2 * i + 1, 2 * j + 1) = v;
            }
    return y;
}

template <typename S>
Tensor<S> upsample2x_nearest_bwd(const Tensor<S>& dy) {
    const int c = dy.dim(0), h2 = dy.dim(1), w2 = dy.dim(2);
    Tensor<S> dx({c, h2 / 2, w2 / 2});
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < h2 / 2; ++i)
            for (int j = 0; j < w2 / 2; ++j)
                dx.at(ci, i, j) = dy.at(ci, 2 * i, 2 * j) + dy.at(ci, 2 * i, 2 * j + 1) +
                                  dy.at(ci, 2 * i + 1, 2 * j) + dy.at(ci, 2 * i + 1, 2 * j + 1);
    return dx;
}

// Average-pool (C, H, W) onto a fixed (gh, gw) cell grid.
template <typename S>
Tensor<S> avg_pool_grid(const Tensor<S>& x, int gh, int gw) {
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    PMMD_CHECK(h >= gh && w >= gw, "avg_pool_grid: input ", x.shape_str(), " smaller than grid");
    Tensor<S> y({c, gh, gw});
    for (int ci = 0; ci < c; ++ci)
        for (int gy = 0; gy < gh; ++gy)
            for (int gx = 0; gx < gw; ++gx) {
                const int y0 = gy * h / gh, y1 = (gy + 1) * h / gh;
                const int x0 = gx * w / gw, x1 = (gx + 1) * w / gw;
                double acc = 0.0;
                for (int i = y0; i < y1; ++i)
                    for (int j = x0; j < x1; ++j) acc += static_cast<double>(x.at(ci, i, j));
                y.at(ci, gy, gx) = static_cast<S>(acc / ((y1 - y0) * (x1 - x0)));
            }
    return y;
}

template <typename S>
Tensor<S> avg_pool_grid_bwd(const Tensor<S>& dy, int h, int w) {
    const int c = dy.dim(0), gh = dy.dim(1), gw = dy.dim(2);
    Tensor<S> dx({c, h, w});
    for (int ci = 0; ci < c; ++ci)
        for (int gy = 0; gy < gh; ++gy)
            for (int gx = 0; gx < gw; ++gx) {
                const int y0 = gy * h / gh, y1 = (gy + 1) * h / gh;
                const int x0 = gx * w / gw, x1 = (gx + 1) * w / gw;
                const S v = static_cast<S>(static_cast<double>(dy.at(ci, gy, gx)) /
                                           ((y1 - y0) * (x1 - x0)));
                for (int i = y0; i < y1; ++i)
                    for (int j = x0; j < x1; ++j) dx.at(ci, i, j) += v;
            }
    return dx;
}

template <typename S>
Tensor<S> cat_channels(const Tensor<S>& a, const Tensor<S>& b) {
    PMMD_CHECK(a.dim(1) == b.dim(1) && a.dim(2) == b.dim(2), "cat_channels: spatial mismatch ",
               a.shape_str(), " vs ", b.shape_str());
    Tensor<S> y({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
    std::copy(a.data(), a.data() + a.size(), y.data());
    std::copy(b.data(), b.data() + b.size(), y.data() + a.size());
    return y;
}

template <typename S>
Tensor<S> slice_channels(const Tensor<S>& x, int c0, int c1) {
    const int h = x.dim(1), w = x.dim(2);
    Tensor<S> y({c1 - c0, h, w});
    std::copy(x.data() + static_cast<std::size_t>(c0) * h * w,
              x.data() + static_cast<std::size_t>(c1) * h * w, y.data());
    return y;
}

// ---------------------------------------------------------------------------
// Token embedding table.
// ---------------------------------------------------------------------------
template <typename S>
struct Embedding {
    Parameter<S> table;
    int vocab = 0, dimn = 0;

    void build(const std::string& name, int vocab_size, int d, ParamRegistry<S>& reg) {
        vocab = vocab_size;
        dimn = d;
        table = {name + ".table", Tensor<S>({vocab_size, d}), Init::kNormal002, 1};
        reg.add(table);
    }

    Tensor<S> forward(const std::vector<int>& ids) const {
        Tensor<S> y({static_cast<int>(ids.size()), dimn});
        for (std::size_t t = 0; t < ids.size(); ++t) {
            PMMD_CHECK(ids[t] >= 0 && ids[t] < vocab, table.name, ": id out of range");
            std::copy(table.value.data() + static_cast<std::size_t>(ids[t]) * dimn,
                      table.value.data() + static_cast<std::size_t>(ids[t] + 1) * dimn,
                      y.data() + t * static_cast<std::size_t>(dimn));
        }
        return y;
    }

    void backward(const Tensor<S>& dy, const std::vector<int>& ids, GradStore<S>& g) const {
        S* dt = g.at(table);
        for (std::size_t t = 0; t < ids.size(); ++t)
            for (int j = 0; j < dimn; ++j)
                dt[static_cast<std::size_t>(ids[t]) * dimn + j] += dy.at(static_cast<int>(t), j);
    }
};

// Sinusoidal timestep features (no parameters): [cos(t*f_i), sin(t*f_i)].
template <typename S>
Tensor<S> timestep_features(double t, int dim) {
    PMMD_CHECK(dim % 2 == 0, "timestep_features: dim must be even");
    const int half = dim / 2;
    Tensor<S> y({dim});
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / half);
        y[static_cast<std::size_t>(i)] = static_cast<S>(std::cos(t * freq));
        y[static_cast<std::size_t>(half + i)] = static_cast<S>(std::sin(t * freq));
    }
    return y;
}

}  // namespace pmmd::nn
