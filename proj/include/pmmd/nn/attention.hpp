#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pmmd/nn/layers.hpp"

namespace pmmd::nn {

// ---------------------------------------------------------------------------
// Multi-head attention over token tensors. Queries come from x (Tq, dim);
// keys/values from ctx (Tk, kv_dim). An optional key-padding mask marks keys
// as invalid; masked keys get exactly zero attention probability, and a row
// with no valid key yields an exactly-zero output row.
// ---------------------------------------------------------------------------
template <typename S>
struct MultiHeadAttention {
    Linear<S> wq, wk, wv, wo;
    int dimn = 0, kv_dim = 0, heads = 0, head_dim = 0;

    void build(const std::string& name, int dim, int kv, int n_heads, ParamRegistry<S>& reg,
               Init out_init = Init::kLecunNormal) {
        PMMD_CHECK(dim % n_heads == 0, name, ": dim ", dim, " not divisible by heads ", n_heads);
        dimn = dim;
        kv_dim = kv;
        heads = n_heads;
        head_dim = dim / n_heads;
        wq.build(name + ".wq", dim, dim, reg);
        wk.build(name + ".wk", kv, dim, reg);
        wv.build(name + ".wv", kv, dim, reg);
        wo.build(name + ".wo", dim, dim, reg, out_init);
    }

    // mask: empty = all keys valid; otherwise size Tk, nonzero = valid.
    Tensor<S> forward(const Tensor<S>& x, const Tensor<S>& ctx,
                      const std::vector<std::uint8_t>& mask, Tape<S>* tape) const {
        PMMD_CHECK(mask.empty() || static_cast<int>(mask.size()) == ctx.dim(0),
                   wq.w.name, ": mask size ", mask.size(), " vs keys ", ctx.dim(0));
        const int tq = x.dim(0), tk = ctx.dim(0);
        Tensor<S> q = wq.forward(x, tape);
        Tensor<S> k = wk.forward(ctx, tape);
        Tensor<S> v = wv.forward(ctx, tape);
        Tensor<S> probs({heads, tq, tk});
        Tensor<S> out({tq, dimn});
        const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
        Tensor<S> qh({tq, head_dim}), kh({tk, head_dim}), vh({tk, head_dim});
        Tensor<S> scores({tq, tk}), oh({tq, head_dim});
        for (int h = 0; h < heads; ++h) {
            copy_head(q, h, qh);
            copy_head(k, h, kh);
            copy_head(v, h, vh);
            gemm(qh.data(), kh.data(), scores.data(), tq, head_dim, tk, false, true,
                 static_cast<S>(scale));
            S* p = probs.data() + static_cast<std::size_t>(h) * tq * tk;
            softmax_masked(scores, mask, p);
            gemm(p, vh.data(), oh.data(), tq, tk, head_dim);
            paste_head(oh, h, out);
        }
        if (tape) tape->push(probs);
        Tensor<S> y = wo.forward(out, tape);
        return y;
    }

    // dctx accumulates the gradient w.r.t. ctx (must be preallocated (Tk, kv_dim)).
    Tensor<S> backward(const Tensor<S>& dy, Tape<S>& tape, GradStore<S>& g, Tensor<S>& dctx) const {
        Tensor<S> dout = wo.backward(dy, tape, g);
        Tensor<S> probs = tape.pop();
        const int tq = dout.dim(0), tk = probs.dim(2);
        // q/k/v are not taped; recompute them from the cached projection inputs
        // (popped here and pushed back so the Linear backwards still find them).
        Tensor<S> ctx_v = tape.pop();
        Tensor<S> ctx_k = tape.pop();
        Tensor<S> x_q = tape.pop();
        Tensor<S> q({tq, dimn}), k({tk, dimn}), v({tk, dimn});
        gemm(x_q.data(), wq.w.value.data(), q.data(), tq, wq.in, dimn, false, true);
        gemm(ctx_k.data(), wk.w.value.data(), k.data(), tk, wk.in, dimn, false, true);
        gemm(ctx_v.data(), wv.w.value.data(), v.data(), tk, wv.in, dimn, false, true);
        add_bias(q, wq);
        add_bias(k, wk);
        add_bias(v, wv);
        Tensor<S> dq({tq, dimn}), dk({tk, dimn}), dv({tk, dimn});
        const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
        Tensor<S> qh({tq, head_dim}), kh({tk, head_dim}), vh({tk, head_dim});
        Tensor<S> doh({tq, head_dim}), dP({tq, tk}), dS({tq, tk});
        Tensor<S> dqh({tq, head_dim}), dkh({tk, head_dim}), dvh({tk, head_dim});
        for (int h = 0; h < heads; ++h) {
            copy_head(q, h, qh);
            copy_head(k, h, kh);
            copy_head(v, h, vh);
            copy_head(dout, h, doh);
            const S* p = probs.data() + static_cast<std::size_t>(h) * tq * tk;
            gemm(doh.data(), vh.data(), dP.data(), tq, head_dim, tk, false, true);
            gemm(p, doh.data(), dvh.data(), tk, tq, head_dim, true, false);
            for (int i = 0; i < tq; ++i) {
                double dot = 0.0;
                for (int j = 0; j < tk; ++j)
                    dot += static_cast<double>(dP.at(i, j)) *
                           static_cast<double>(p[static_cast<std::size_t>(i) * tk + j]);
                for (int j = 0; j < tk; ++j)
                    dS.at(i, j) = static_cast<S>(
                        static_cast<double>(p[static_cast<std::size_t>(i) * tk + j]) *
                        (static_cast<double>(dP.at(i, j)) - dot));
            }
            gemm(dS.data(), kh.data(), dqh.data(), tq, tk, head_dim, false, false,
                 static_cast<S>(scale));
            gemm(dS.data(), qh.data(), dkh.data(), tk, tq, head_dim, true, false,
                 static_cast<S>(scale));
            paste_head(dqh, h, dq);
            paste_head(dkh, h, dk);
            paste_head(dvh, h, dv);
        }
        tape.push(std::move(x_q));
        tape.push(std::move(ctx_k));
        tape.push(std::move(ctx_v));
        dctx.add_(wv.backward(dv, tape, g));
        dctx.add_(wk.backward(dk, tape, g));
        return wq.backward(dq, tape, g);
    }

    // Self-attention convenience: ctx == x, gradient merged into the return.
    Tensor<S> forward_self(const Tensor<S>& x, Tape<S>* tape) const {
        return forward(x, x, {}, tape);
    }
    Tensor<S> backward_self(const Tensor<S>& dy, Tape<S>& tape, GradStore<S>& g) const {
        Tensor<S> dctx(dy.shape());
        dctx.fill(S(0));
        Tensor<S> dx = backward(dy, tape, g, dctx);
        dx.add_(dctx);
        return dx;
    }

private:
    void copy_head(const Tensor<S>& t, int h, Tensor<S>& dst) const {
        const int rows = t.dim(0);
        for (int i = 0; i < rows; ++i)
            std::copy(t.data() + static_cast<std::size_t>(i) * dimn + h * head_dim,
                      t.data() + static_cast<std::size_t>(i) * dimn + (h + 1) * head_dim,
                      dst.data() + static_cast<std::size_t>(i) * head_dim);
    }
    void paste_head(const Tensor<S>& src, int h, Tensor<S>& t) const {
        const int rows = t.dim(0);
        for (int i = 0; i < rows; ++i)
            std::copy(src.data() + static_cast<std::size_t>(i) * head_dim,
                      src.data() + static_cast<std::size_t>(i + 1) * head_dim,
                      t.data() + static_cast<std::size_t>(i) * dimn + h * head_dim);
    }
    static void add_bias(Tensor<S>& t, const Linear<S>& lin) {
        if (!lin.has_bias) return;
        const int rows = t.dim(0), cols = t.dim(1);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                t.at(i, j) += lin.b.value[static_cast<std::size_t>(j)];
    }
    static void softmax_masked(const Tensor<S>& scores, const std::vector<std::uint8_t>& mask,
                               S* out) {
        const int tq = scores.dim(0), tk = scores.dim(1);
        for (int i = 0; i < tq; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < tk; ++j)
                if (mask.empty() || mask[static_cast<std::size_t>(j)])
                    mx = std::max(mx, static_cast<double>(scores.at(i, j)));
            double denom = 0.0;
            S* row = out + static_cast<std::size_t>(i) * tk;
            if (!std::isfinite(mx)) {  // every key masked
                for (int j = 0; j < tk; ++j) row[j] = S(0);
                continue;
            }
            for (int j = 0; j < tk; ++j) {
                if (mask.empty() || mask[static_cast<std::size_t>(j)]) {
                    const double e = std::exp(static_cast<double>(scores.at(i, j)) - mx);
                    row[j] = static_cast<S>(e);
                    denom += e;
                } else {
                    row[j] = S(0);
                }
            }
            for (int j = 0; j < tk; ++j) row[j] = static_cast<S>(static_cast<double>(row[j]) / denom);
        }
    }
};

}  // namespace pmmd::nn
