#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pmmd/core/common.hpp"
#include "pmmd/core/rng.hpp"
#include "pmmd/core/tensor.hpp"

namespace pmmd::nn {

enum class Init {
    kZero,        // zero-initialized projections (pose heads, CVA out, final conv)
    kOne,         // norm scales, gates
    kLecunNormal, // weights: N(0, 1/fan_in)
    kNormal002,   // embeddings, null tokens
};

template <typename S>
struct Parameter {
    std::string name;
    Tensor<S> value;
    Init init = Init::kLecunNormal;
    int fan_in = 1;
    bool trainable = true;
    std::size_t offset = 0;  // into the flat gradient store; set at registration
};

// Flat gradient buffer addressed by parameter offsets.
template <typename S>
class GradStore {
public:
    explicit GradStore(std::size_t n = 0) : g_(n, S(0)) {}

    void resize(std::size_t n) { g_.assign(n, S(0)); }
    void zero() { std::fill(g_.begin(), g_.end(), S(0)); }
    std::size_t size() const { return g_.size(); }

    S* at(const Parameter<S>& p) { return g_.data() + p.offset; }
    const S* at(const Parameter<S>& p) const { return g_.data() + p.offset; }
    S& flat(std::size_t i) { return g_[i]; }
    const S& flat(std::size_t i) const { return g_[i]; }

    void add_from(const GradStore& other) {
        PMMD_CHECK(g_.size() == other.g_.size(), "grad store size mismatch");
        for (std::size_t i = 0; i < g_.size(); ++i) g_[i] += other.g_[i];
    }

private:
    std::vector<S> g_;
};

// Owning index over all parameters of a model. Parameters live inside module
// structs; the registry stores pointers, so modules must stay put after
// registration (models are built once and not moved).
template <typename S>
class ParamRegistry {
public:
    void add(Parameter<S>& p) {
        PMMD_CHECK(!p.name.empty(), "parameter must be named");
        PMMD_CHECK(by_name_.find(p.name) == by_name_.end(), "duplicate parameter name: ", p.name);
        p.offset = total_;
        total_ += p.value.size();
        by_name_[p.name] = params_.size();
        params_.push_back(&p);
    }

    std::size_t total_size() const { return total_; }
    const std::vector<Parameter<S>*>& params() const { return params_; }

    Parameter<S>* find(const std::string& name) {
        auto it = by_name_.find(name);
        return it == by_name_.end() ? nullptr : params_[it->second];
    }

    std::vector<Parameter<S>*> find_substr(const std::string& needle) {
        std::vector<Parameter<S>*> out;
        for (auto* p : params_)
            if (p->name.find(needle) != std::string::npos) out.push_back(p);
        return out;
    }

    // Each parameter draws from a stream derived from its own name, so two model
    // variants that share a layer initialize that layer identically even when one
    // variant has extra parameters.
    void init_all(std::uint64_t seed) {
        for (auto* p : params_) {
            Rng rng(derive_seed(seed, "init", fnv1a64(p->name)));
            switch (p->init) {
                case Init::kZero:
                    p->value.fill(S(0));
                    break;
                case Init::kOne:
                    p->value.fill(S(1));
                    break;
                case Init::kLecunNormal: {
                    const double stddev = 1.0 / std::sqrt(static_cast<double>(std::max(1, p->fan_in)));
                    for (std::size_t i = 0; i < p->value.size(); ++i)
                        p->value[i] = static_cast<S>(rng.normal() * stddev);
                    break;
                }
                case Init::kNormal002:
                    for (std::size_t i = 0; i < p->value.size(); ++i)
                        p->value[i] = static_cast<S>(rng.normal() * 0.02);
                    break;
            }
        }
    }

private:
    std::vector<Parameter<S>*> params_;
    std::unordered_map<std::string, std::size_t> by_name_;
    std::size_t total_ = 0;
};

// Activation tape: forward pushes what backward needs, backward pops in exact
// reverse order. Keeping the cache outside the modules keeps forward const and
// safe for concurrent inference.
template <typename S>
class Tape {
public:
    void push(Tensor<S> t) { stack_.push_back(std::move(t)); }

    Tensor<S> pop() {
        PMMD_RUNTIME_CHECK(!stack_.empty(), "tape underflow (forward/backward mismatch)");
        Tensor<S> t = std::move(stack_.back());
        stack_.pop_back();
        return t;
    }

    bool empty() const { return stack_.empty(); }
    std::size_t size() const { return stack_.size(); }
    void clear() { stack_.clear(); }

private:
    std::vector<Tensor<S>> stack_;
};

}  // namespace pmmd::nn
