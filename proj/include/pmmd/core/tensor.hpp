#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pmmd/core/common.hpp"
#include "pmmd/core/rng.hpp"

namespace pmmd {

// Dense row-major tensor with value semantics. Rank is dynamic but small (<= 4
// in practice). All heavy math goes through the gemm helpers below.
template <typename S>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        data_.assign(count(shape_), S(0));
    }

    Tensor(std::initializer_list<int> shape) : Tensor(std::vector<int>(shape)) {}

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

    static Tensor full(std::vector<int> shape, S v) {
        Tensor t(std::move(shape));
        std::fill(t.data_.begin(), t.data_.end(), v);
        return t;
    }

    static Tensor randn(std::vector<int> shape, Rng& rng, double stddev = 1.0) {
        Tensor t(std::move(shape));
        for (auto& x : t.data_) x = static_cast<S>(rng.normal() * stddev);
        return t;
    }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    S* data() { return data_.data(); }
    const S* data() const { return data_.data(); }

    S& operator[](std::size_t i) { return data_[i]; }
    const S& operator[](std::size_t i) const { return data_[i]; }

    // Row-major index helpers.
    S& at(int i, int j) { return data_[static_cast<std::size_t>(i) * dim(1) + j]; }
    const S& at(int i, int j) const { return data_[static_cast<std::size_t>(i) * dim(1) + j]; }
    S& at(int i, int j, int k) {
        return data_[(static_cast<std::size_t>(i) * dim(1) + j) * dim(2) + k];
    }
    const S& at(int i, int j, int k) const {
        return data_[(static_cast<std::size_t>(i) * dim(1) + j) * dim(2) + k];
    }
    S& at(int i, int j, int k, int l) {
        return data_[((static_cast<std::size_t>(i) * dim(1) + j) * dim(2) + k) * dim(3) + l];
    }
    const S& at(int i, int j, int k, int l) const {
        return data_[((static_cast<std::size_t>(i) * dim(1) + j) * dim(2) + k) * dim(3) + l];
    }

    // Same data, new shape (element count must match).
    Tensor reshaped(std::vector<int> shape) const& {
        PMMD_CHECK(count(shape) == size(), "reshape: element count mismatch");
        Tensor t = *this;
        t.shape_ = std::move(shape);
        return t;
    }
    Tensor reshaped(std::vector<int> shape) && {
        PMMD_CHECK(count(shape) == size(), "reshape: element count mismatch");
        shape_ = std::move(shape);
        return std::move(*this);
    }

    void fill(S v) { std::fill(data_.begin(), data_.end(), v); }

    void add_(const Tensor& other) {
        PMMD_CHECK(size() == other.size(), "add_: size mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    }

    void add_scaled_(const Tensor& other, S alpha) {
        PMMD_CHECK(size() == other.size(), "add_scaled_: size mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += alpha * other.data_[i];
    }

    void sub_(const Tensor& other) {
        PMMD_CHECK(size() == other.size(), "sub_: size mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    }

    void mul_(S alpha) {
        for (auto& x : data_) x *= alpha;
    }

    void hadamard_(const Tensor& other) {
        PMMD_CHECK(size() == other.size(), "hadamard_: size mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] *= other.data_[i];
    }

    double sum() const {
        double acc = 0.0;
        for (const auto& x : data_) acc += static_cast<double>(x);
        return acc;
    }

    double mean() const { return empty() ? 0.0 : sum() / static_cast<double>(size()); }

    double sum_squares() const {
        double acc = 0.0;
        for (const auto& x : data_) acc += static_cast<double>(x) * static_cast<double>(x);
        return acc;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& x : data_) m = std::max(m, std::abs(static_cast<double>(x)));
        return m;
    }

    bool all_finite() const {
        for (const auto& x : data_)
            if (!std::isfinite(static_cast<double>(x))) return false;
        return true;
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    std::string shape_str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape_[i]);
        }
        return s + ")";
    }

    template <typename T>
    Tensor<T> cast() const {
        Tensor<T> t(shape_);
        for (std::size_t i = 0; i < data_.size(); ++i) t[i] = static_cast<T>(data_[i]);
        return t;
    }

private:
    static std::size_t count(const std::vector<int>& shape) {
        std::size_t n = 1;
        for (int d : shape) {
            PMMD_CHECK(d >= 0, "tensor dims must be non-negative");
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    std::vector<int> shape_;
    std::vector<S> data_;
};

template <typename S>
double max_abs_diff(const Tensor<S>& a, const Tensor<S>& b) {
    PMMD_CHECK(a.size() == b.size(), "max_abs_diff: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    return m;
}

// C (m x n) = alpha * op(A) * op(B) + beta * C, all row-major.
// op(A) is A (m x k) or A^T with A stored (k x m) when trans_a.
template <typename S>
void gemm(const S* a, const S* b, S* c, int m, int k, int n, bool trans_a = false,
          bool trans_b = false, S alpha = S(1), S beta = S(0)) {
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using MapC = Eigen::Map<Mat>;
    using MapA = Eigen::Map<const Mat>;
    MapC C(c, m, n);
    MapA A(a, trans_a ? k : m, trans_a ? m : k);
    MapA B(b, trans_b ? n : k, trans_b ? k : n);
    if (beta == S(0))
        C.setZero();
    else if (beta != S(1))
        C *= beta;
    if (!trans_a && !trans_b)
        C.noalias() += alpha * (A * B);
    else if (trans_a && !trans_b)
        C.noalias() += alpha * (A.transpose() * B);
    else if (!trans_a && trans_b)
        C.noalias() += alpha * (A * B.transpose());
    else
        C.noalias() += alpha * (A.transpose() * B.transpose());
}

}  // namespace pmmd
