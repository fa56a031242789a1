#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "pmmd/nn/adam.hpp"
#include "pmmd/nn/attention.hpp"
#include "pmmd/nn/layers.hpp"
#include "pmmd/nn/module.hpp"

using pmmd::Rng;
using pmmd::Tensor;
namespace nn = pmmd::nn;

namespace {

// Central-difference check of one scalar slot against its analytic gradient.
void expect_grad(double* slot, double analytic, const std::function<double()>& loss,
                 const std::string& label, double h = 1e-4) {
    const double keep = *slot;
    *slot = keep + h;
    const double lp = loss();
    *slot = keep - h;
    const double lm = loss();
    *slot = keep;
    const double numeric = (lp - lm) / (2.0 * h);
    const double tol = 1e-6 + 1e-4 * std::max(std::abs(analytic), std::abs(numeric));
    EXPECT_NEAR(analytic, numeric, tol) << label;
}

void check_params(nn::ParamRegistry<double>& reg, const nn::GradStore<double>& g,
                  const std::function<double()>& loss) {
    for (auto* p : reg.params())
        for (std::size_t i = 0; i < p->value.size(); ++i)
            expect_grad(&p->value[i], g.flat(p->offset + i), loss,
                        p->name + "[" + std::to_string(i) + "]");
}

void check_input(Tensor<double>& x, const Tensor<double>& dx,
                 const std::function<double()>& loss, const std::string& label) {
    ASSERT_TRUE(x.same_shape(dx)) << label;
    for (std::size_t i = 0; i < x.size(); ++i)
        expect_grad(&x[i], dx[i], loss, label + "[" + std::to_string(i) + "]");
}

double weighted_sum(const Tensor<double>& y, const Tensor<double>& r) {
    Tensor<double> t = y;
    t.hadamard_(r);
    return t.sum();
}

}  // namespace

TEST(Module, RegistryOffsetsAndDuplicates) {
    nn::ParamRegistry<double> reg;
    nn::Parameter<double> a{"a", Tensor<double>({2, 3})};
    nn::Parameter<double> b{"b", Tensor<double>({4})};
    reg.add(a);
    reg.add(b);
    EXPECT_EQ(a.offset, 0u);
    EXPECT_EQ(b.offset, 6u);
    EXPECT_EQ(reg.total_size(), 10u);
    nn::Parameter<double> dup{"a", Tensor<double>({1})};
    EXPECT_THROW(reg.add(dup), pmmd::ValidationError);
    EXPECT_EQ(reg.find("b"), &b);
    EXPECT_EQ(reg.find("zzz"), nullptr);
}

// Initialization is keyed by parameter name, not registration order: a layer
// shared by two model variants gets bit-identical weights in both.
TEST(Module, InitIndependentOfRegistrationOrder) {
    nn::Parameter<double> a1{"shared.w", Tensor<double>({3, 3}), nn::Init::kLecunNormal, 3};
    nn::Parameter<double> extra{"extra.w", Tensor<double>({5, 5}), nn::Init::kLecunNormal, 5};
    nn::Parameter<double> a2{"shared.w", Tensor<double>({3, 3}), nn::Init::kLecunNormal, 3};
    nn::ParamRegistry<double> r1, r2;
    r1.add(a1);
    r2.add(extra);
    r2.add(a2);
    r1.init_all(42);
    r2.init_all(42);
    EXPECT_EQ(pmmd::max_abs_diff(a1.value, a2.value), 0.0);
    EXPECT_GT(a1.value.max_abs(), 0.0);
}

TEST(Module, TapeIsLifoAndGuarded) {
    nn::Tape<double> tape;
    tape.push(Tensor<double>::full({1}, 1.0));
    tape.push(Tensor<double>::full({1}, 2.0));
    EXPECT_DOUBLE_EQ(tape.pop()[0], 2.0);
    EXPECT_DOUBLE_EQ(tape.pop()[0], 1.0);
    EXPECT_THROW(tape.pop(), pmmd::RuntimeError);
}

TEST(Grad, Linear) {
    nn::ParamRegistry<double> reg;
    nn::Linear<double> lin;
    lin.build("lin", 4, 3, reg);
    reg.init_all(1);
    Rng rng(2);
    Tensor<double> x = Tensor<double>::randn({5, 4}, rng);
    Tensor<double> r = Tensor<double>::randn({5, 3}, rng);
    auto loss = [&] { return weighted_sum(lin.forward(x, nullptr), r); };
    nn::Tape<double> tape;
    lin.forward(x, &tape);
    nn::GradStore<double> g(reg.total_size());
    Tensor<double> dx = lin.backward(r, tape, g);
    EXPECT_TRUE(tape.empty());
    check_params(reg, g, loss);
    check_input(x, dx, loss, "x");
}

TEST(Grad, Conv2dVariants) {
    struct Case {
        int k, stride, pad, h, w;
    };
    for (const Case c : {Case{3, 1, 1, 5, 6}, Case{3, 2, 1, 5, 6}, Case{1, 1, 0, 4, 5},
                         Case{4, 2, 1, 6, 6}}) {
        SCOPED_TRACE(testing::Message() << "k=" << c.k << " s=" << c.stride << " p=" << c.pad);
        nn::ParamRegistry<double> reg;
        nn::Conv2d<double> conv;
        conv.build("conv", 3, 4, c.k, c.stride, c.pad, reg);
        reg.init_all(3);
        Rng rng(4);
        Tensor<double> x = Tensor<double>::randn({3, c.h, c.w}, rng);
        Tensor<double> r = Tensor<double>::randn({4, conv.out_h(c.h), conv.out_w(c.w)}, rng);
        auto loss = [&] { return weighted_sum(conv.forward(x, nullptr), r); };
        nn::Tape<double> tape;
        conv.forward(x, &tape);
        nn::GradStore<double> g(reg.total_size());
        Tensor<double> dx = conv.backward(r, tape, g);
        check_params(reg, g, loss);
        check_input(x, dx, loss, "x");
    }
}

TEST(Grad, GroupNorm) {
    nn::ParamRegistry<double> reg;
    nn::GroupNorm<double> gn;
    gn.build("gn", 6, 3, reg);
    reg.init_all(5);
    // non-trivial gamma/beta so their grads are exercised away from 1/0
    Rng rng(6);
    for (auto* p : reg.params())
        for (auto i = 0u; i < p->value.size(); ++i) p->value[i] += 0.3 * rng.normal();
    Tensor<double> x = Tensor<double>::randn({6, 3, 4}, rng);
    Tensor<double> r = Tensor<double>::randn({6, 3, 4}, rng);
    auto loss = [&] { return weighted_sum(gn.forward(x, nullptr), r); };
    nn::Tape<double> tape;
    gn.forward(x, &tape);
    nn::GradStore<double> g(reg.total_size());
    Tensor<double> dx = gn.backward(r, tape, g);
    check_params(reg, g, loss);
    check_input(x, dx, loss, "x");
}

TEST(Grad, LayerNorm) {
    nn::ParamRegistry<double> reg;
    nn::LayerNorm<double> ln;
    ln.build("ln", 7, reg);
    reg.init_all(7);
    Rng rng(8);
    for (auto* p : reg.params())
        for (auto i = 0u; i < p->value.size(); ++i) p->value[i] += 0.3 * rng.normal();
    Tensor<double> x = Tensor<double>::randn({4, 7}, rng);
    Tensor<double> r = Tensor<double>::randn({4, 7}, rng);
    auto loss = [&] { return weighted_sum(ln.forward(x, nullptr), r); };
    nn::Tape<double> tape;
    ln.forward(x, &tape);
    nn::GradStore<double> g(reg.total_size());
    Tensor<double> dx = ln.backward(r, tape, g);
    check_params(reg, g, loss);
    check_input(x, dx, loss, "x");
}

TEST(Grad, Activations) {
    Rng rng(9);
    Tensor<double> x = Tensor<double>::randn({3, 4}, rng);
    Tensor<double> r = Tensor<double>::randn({3, 4}, rng);
    {
        auto loss = [&] { return weighted_sum(nn::silu_fwd(x, nullptr), r); };
        nn::Tape<double> tape;
        nn::silu_fwd(x, &tape);
        Tensor<double> dx = nn::silu_bwd(r, tape);
        check_input(x, dx, loss, "silu.x");
    }
    {
        auto loss = [&] { return weighted_sum(nn::leaky_relu_fwd(x, 0.2, nullptr), r); };
        nn::Tape<double> tape;
        nn::leaky_relu_fwd(x, 0.2, &tape);
        Tensor<double> dx = nn::leaky_relu_bwd(r, 0.2, tape);
        check_input(x, dx, loss, "lrelu.x");
    }
}

TEST(Grad, Resampling) {
    Rng rng(10);
    {
        Tensor<double> x = Tensor<double>::randn({2, 3, 4}, rng);
        Tensor<double> r = Tensor<double>::randn({2, 6, 8}, rng);
        auto loss = [&] { return weighted_sum(nn::upsample2x_nearest(x), r); };
        Tensor<double> dx = nn::upsample2x_nearest_bwd(r);
        check_input(x, dx, loss, "up.x");
    }
    {
        Tensor<double> x = Tensor<double>::randn({2, 7, 5}, rng);
        Tensor<double> r = Tensor<double>::randn({2, 2, 2}, rng);
        auto loss = [&] { return weighted_sum(nn::avg_pool_grid(x, 2, 2), r); };
        Tensor<double> dx = nn::avg_pool_grid_bwd(r, 7, 5);
        check_input(x, dx, loss, "pool.x");
    }
}

TEST(Grad, AttentionSelf) {
    nn::ParamRegistry<double> reg;
    nn::MultiHeadAttention<double> mha;
    mha.build("attn", 8, 8, 2, reg);
    reg.init_all(11);
    Rng rng(12);
    Tensor<double> x = Tensor<double>::randn({5, 8}, rng);
    Tensor<double> r = Tensor<double>::randn({5, 8}, rng);
    auto loss = [&] { return weighted_sum(mha.forward_self(x, nullptr), r); };
    nn::Tape<double> tape;
    mha.forward_self(x, &tape);
    nn::GradStore<double> g(reg.total_size());
    Tensor<double> dx = mha.backward_self(r, tape, g);
    EXPECT_TRUE(tape.empty());
    check_params(reg, g, loss);
    check_input(x, dx, loss, "x");
}

TEST(Grad, AttentionCrossWithMask) {
    nn::ParamRegistry<double> reg;
    nn::MultiHeadAttention<double> mha;
    mha.build("xattn", 8, 6, 2, reg);
    reg.init_all(13);
    Rng rng(14);
    Tensor<double> x = Tensor<double>::randn({3, 8}, rng);
    Tensor<double> ctx = Tensor<double>::randn({5, 6}, rng);
    Tensor<double> r = Tensor<double>::randn({3, 8}, rng);
    const std::vector<std::uint8_t> mask = {1, 0, 1, 1, 0};
    auto loss = [&] { return weighted_sum(mha.forward(x, ctx, mask, nullptr), r); };
    nn::Tape<double> tape;
    Tensor<double> y = mha.forward(x, ctx, mask, &tape);
    nn::GradStore<double> g(reg.total_size());
    Tensor<double> dctx({5, 6});
    Tensor<double> dx = mha.backward(r, tape, g, dctx);
    EXPECT_TRUE(tape.empty());
    check_params(reg, g, loss);
    check_input(x, dx, loss, "x");
    check_input(ctx, dctx, loss, "ctx");
    // masked keys must receive exactly zero probability: perturbing them never
    // changes the output
    const double y0 = weighted_sum(y, r);
    ctx.at(1, 0) += 100.0;
    ctx.at(4, 3) -= 50.0;
    EXPECT_DOUBLE_EQ(weighted_sum(mha.forward(x, ctx, mask, nullptr), r), y0);
}

TEST(Grad, AttentionAllMaskedYieldsZero) {
    nn::ParamRegistry<double> reg;
    nn::MultiHeadAttention<double> mha;
    mha.build("deadattn", 8, 6, 2, reg);
    reg.init_all(15);
    Rng rng(16);
    Tensor<double> x = Tensor<double>::randn({3, 8}, rng);
    Tensor<double> ctx = Tensor<double>::randn({4, 6}, rng);
    const std::vector<std::uint8_t> mask = {0, 0, 0, 0};
    Tensor<double> y = mha.forward(x, ctx, mask, nullptr);
    // attention output collapses to wo's bias (zero-init) for every query row
    EXPECT_EQ(y.max_abs(), 0.0);
    nn::Tape<double> tape;
    mha.forward(x, ctx, mask, &tape);
    nn::GradStore<double> g(reg.total_size());
    Tensor<double> dctx({4, 6});
    Tensor<double> r = Tensor<double>::randn({3, 8}, rng);
    Tensor<double> dx = mha.backward(r, tape, g, dctx);
    EXPECT_EQ(dx.max_abs(), 0.0);
    EXPECT_EQ(dctx.max_abs(), 0.0);
}

TEST(Grad, Embedding) {
    nn::ParamRegistry<double> reg;
    nn::Embedding<double> emb;
    emb.build("emb", 6, 4, reg);
    reg.init_all(17);
    Rng rng(18);
    const std::vector<int> ids = {2, 5, 2, 0};  // repeat to exercise accumulation
    Tensor<double> r = Tensor<double>::randn({4, 4}, rng);
    auto loss = [&] { return weighted_sum(emb.forward(ids), r); };
    nn::GradStore<double> g(reg.total_size());
    emb.backward(r, ids, g);
    check_params(reg, g, loss);
    EXPECT_THROW(emb.forward({6}), pmmd::ValidationError);
}

TEST(Adam, DescendsQuadratic) {
    nn::ParamRegistry<double> reg;
    nn::Parameter<double> w{"w", Tensor<double>({5}), nn::Init::kNormal002, 1};
    reg.add(w);
    reg.init_all(19);
    for (std::size_t i = 0; i < 5; ++i) w.value[i] += 1.0;
    const double initial = w.value.sum_squares();
    nn::Adam<double> opt;
    opt.lr = 0.05;
    opt.init(reg.total_size());
    nn::GradStore<double> g(reg.total_size());
    for (int step = 0; step < 300; ++step) {
        g.zero();
        for (std::size_t i = 0; i < 5; ++i) g.flat(i) = w.value[i];
        opt.step(reg, g);
    }
    EXPECT_LT(w.value.sum_squares(), initial / 100.0);
    EXPECT_EQ(opt.t, 300);
}

TEST(Adam, FirstStepSizeIsLr) {
    // with bias correction the very first update step is lr * g/|g| (+eps slack)
    nn::ParamRegistry<double> reg;
    nn::Parameter<double> w{"w", Tensor<double>({1}), nn::Init::kZero, 1};
    reg.add(w);
    reg.init_all(0);
    nn::Adam<double> opt;
    opt.lr = 0.01;
    opt.init(1);
    nn::GradStore<double> g(1);
    g.flat(0) = 0.3;
    opt.step(reg, g);
    EXPECT_NEAR(w.value[0], -0.01, 1e-6);
}
