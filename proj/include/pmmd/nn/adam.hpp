#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pmmd/nn/module.hpp"

namespace pmmd::nn {

// Standard Adam over a flat parameter space (Kingma & Ba 2015).
template <typename S>
struct Adam {
    double lr = 1e-4;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::int64_t t = 0;
    std::vector<S> m, v;

    void init(std::size_t n) {
        m.assign(n, S(0));
        v.assign(n, S(0));
        t = 0;
    }

    void step(ParamRegistry<S>& reg, const GradStore<S>& g) {
        PMMD_CHECK(m.size() == reg.total_size() && g.size() == reg.total_size(),
                   "adam: state size mismatch");
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (auto* p : reg.params()) {
            if (!p->trainable) continue;
            S* w = p->value.data();
            for (std::size_t i = 0; i < p->value.size(); ++i) {
                const std::size_t j = p->offset + i;
                const double gi = static_cast<double>(g.flat(j));
                const double mi = beta1 * static_cast<double>(m[j]) + (1.0 - beta1) * gi;
                const double vi = beta2 * static_cast<double>(v[j]) + (1.0 - beta2) * gi * gi;
                m[j] = static_cast<S>(mi);
                v[j] = static_cast<S>(vi);
                w[i] -= static_cast<S>(lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps));
            }
        }
    }
};

}  // namespace pmmd::nn
