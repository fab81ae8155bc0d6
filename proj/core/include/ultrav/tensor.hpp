#pragma once

// Dense order-1..4 tensors with row-major (last index fastest) storage and the
// multilinear products used by the unmixing model: outer, mode-k,
// full multilinear and contracted products, plus fibers and matricizations.
//
// Modes are 0-based throughout the C++ API.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ultrav/errors.hpp"

namespace ultrav {

using Index = Eigen::Index;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <std::size_t Order>
class Tensor {
    static_assert(Order >= 1 && Order <= 4, "tensors of order 1..4 only");

public:
    using Dims = std::array<Index, Order>;
    static constexpr std::size_t order = Order;

    Tensor() { dims_.fill(0); }

    explicit Tensor(const Dims& dims, double fill = 0.0) : dims_(dims) {
        check_dims(dims);
        data_.assign(static_cast<std::size_t>(count(dims)), fill);
    }

    Tensor(const Dims& dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
        check_dims(dims);
        if (static_cast<Index>(data_.size()) != count(dims)) {
            throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                                 " does not match dims product " + std::to_string(count(dims)));
        }
        if (!all_finite()) {
            throw NumericError("tensor data contains non-finite entries");
        }
    }

    [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
    [[nodiscard]] Index dim(std::size_t mode) const { return dims_.at(mode); }
    [[nodiscard]] Index size() const noexcept { return static_cast<Index>(data_.size()); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::span<double> data() noexcept { return data_; }

    /// Stride of `mode` in the flat array.
    [[nodiscard]] Index stride(std::size_t mode) const {
        Index s = 1;
        for (std::size_t m = mode + 1; m < Order; ++m) s *= dims_[m];
        return s;
    }

    template <typename... Is>
    [[nodiscard]] double& operator()(Is... idx) noexcept {
        static_assert(sizeof...(Is) == Order);
        return data_[static_cast<std::size_t>(flat(Dims{static_cast<Index>(idx)...}))];
    }
    template <typename... Is>
    [[nodiscard]] double operator()(Is... idx) const noexcept {
        static_assert(sizeof...(Is) == Order);
        return data_[static_cast<std::size_t>(flat(Dims{static_cast<Index>(idx)...}))];
    }

    /// Bounds-checked access.
    [[nodiscard]] double at(const Dims& idx) const {
        for (std::size_t m = 0; m < Order; ++m) {
            if (idx[m] < 0 || idx[m] >= dims_[m]) {
                throw DimensionError("tensor index out of bounds in mode " + std::to_string(m));
            }
        }
        return data_[static_cast<std::size_t>(flat(idx))];
    }

    [[nodiscard]] Index flat(const Dims& idx) const noexcept {
        Index f = 0;
        for (std::size_t m = 0; m < Order; ++m) f = f * dims_[m] + idx[m];
        return f;
    }

    [[nodiscard]] Eigen::Map<const Eigen::VectorXd> vec() const noexcept {
        return {data_.data(), size()};
    }
    [[nodiscard]] Eigen::Map<Eigen::VectorXd> vec() noexcept { return {data_.data(), size()}; }

    [[nodiscard]] double frobenius_norm() const { return vec().norm(); }
    [[nodiscard]] double squared_norm() const { return vec().squaredNorm(); }

    [[nodiscard]] bool all_finite() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    Tensor& operator*=(double s) noexcept {
        vec() *= s;
        return *this;
    }

    friend bool operator==(const Tensor& a, const Tensor& b) = default;

    static Index count(const Dims& dims) noexcept {
        return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
    }

private:
    static void check_dims(const Dims& dims) {
        for (Index d : dims) {
            if (d <= 0) throw DimensionError("tensor dimensions must be positive");
        }
    }

    Dims dims_;
    std::vector<double> data_;
};

using Tensor2 = Tensor<2>;
using Tensor3 = Tensor<3>;
using Tensor4 = Tensor<4>;

template <std::size_t Order>
[[nodiscard]] Tensor<Order> operator*(double s, Tensor<Order> t) {
    t *= s;
    return t;
}

template <std::size_t Order>
[[nodiscard]] Tensor<Order> operator-(const Tensor<Order>& a, const Tensor<Order>& b) {
    if (a.dims() != b.dims()) throw DimensionError("tensor difference: dims differ");
    Tensor<Order> out(a.dims());
    out.vec() = a.vec() - b.vec();
    return out;
}

/// Squared Frobenius distance ||a - b||^2.
template <std::size_t Order>
[[nodiscard]] double squared_distance(const Tensor<Order>& a, const Tensor<Order>& b) {
    if (a.dims() != b.dims()) throw DimensionError("squared_distance: dims differ");
    return (a.vec() - b.vec()).squaredNorm();
}

namespace detail {

/// (outer, mode, inner) extents for viewing a tensor as a stack of n_mode x inner blocks.
template <std::size_t Order>
struct ModeSplit {
    Index outer = 1;
    Index n = 1;
    Index inner = 1;
};

template <std::size_t Order>
ModeSplit<Order> split(const std::array<Index, Order>& dims, std::size_t mode) {
    if (mode >= Order) {
        throw DimensionError("mode " + std::to_string(mode) + " invalid for order-" +
                             std::to_string(Order) + " tensor");
    }
    ModeSplit<Order> s;
    for (std::size_t m = 0; m < mode; ++m) s.outer *= dims[m];
    s.n = dims[mode];
    for (std::size_t m = mode + 1; m < Order; ++m) s.inner *= dims[m];
    return s;
}

} // namespace detail

/// Copy of the mode-`mode` fiber with the remaining indices fixed to `fixed`
/// (given in increasing mode order, skipping `mode`).
template <std::size_t Order>
[[nodiscard]] Eigen::VectorXd fiber(const Tensor<Order>& t, std::size_t mode,
                                    const std::array<Index, Order - 1>& fixed) {
    static_assert(Order >= 2);
    if (mode >= Order) throw DimensionError("fiber: invalid mode");
    typename Tensor<Order>::Dims idx{};
    for (std::size_t m = 0, j = 0; m < Order; ++m) {
        if (m == mode) continue;
        if (fixed[j] < 0 || fixed[j] >= t.dim(m)) {
            throw DimensionError("fiber: index out of bounds in mode " + std::to_string(m));
        }
        idx[m] = fixed[j++];
    }
    idx[mode] = 0;
    const Index base = t.flat(idx);
    const Index step = t.stride(mode);
    Eigen::VectorXd out(t.dim(mode));
    for (Index i = 0; i < t.dim(mode); ++i) out(i) = t.data()[static_cast<std::size_t>(base + i * step)];
    return out;
}

/// Mode-k unfolding: one column per mode-k fiber, remaining indices in
/// row-major order (leftmost remaining index slowest).
struct Matricization {
    std::size_t mode = 0;
    Eigen::MatrixXd matrix;

    [[nodiscard]] Index rows() const noexcept { return matrix.rows(); }
    [[nodiscard]] Index cols() const noexcept { return matrix.cols(); }
};

template <std::size_t Order>
[[nodiscard]] Matricization matricize(const Tensor<Order>& t, std::size_t mode) {
    const auto s = detail::split(t.dims(), mode);
    Matricization out{mode, Eigen::MatrixXd(s.n, s.outer * s.inner)};
    const double* src = t.data().data();
    for (Index o = 0; o < s.outer; ++o) {
        Eigen::Map<const RowMajorMatrix> block(src + o * s.n * s.inner, s.n, s.inner);
        out.matrix.middleCols(o * s.inner, s.inner) = block;
    }
    return out;
}

/// T_{n1..nP} = prod_i b^(i)_{n_i}.
template <std::size_t Order>
[[nodiscard]] Tensor<Order> outer_product(const std::array<Eigen::VectorXd, Order>& vectors) {
    typename Tensor<Order>::Dims dims{};
    for (std::size_t m = 0; m < Order; ++m) {
        if (vectors[m].size() == 0) throw DimensionError("outer_product: empty vector");
        dims[m] = vectors[m].size();
    }
    Tensor<Order> out(dims);
    // Build by successive Kronecker expansion in row-major order.
    std::vector<double> acc{1.0};
    for (std::size_t m = 0; m < Order; ++m) {
        std::vector<double> next;
        next.reserve(acc.size() * static_cast<std::size_t>(dims[m]));
        for (double a : acc) {
            for (Index i = 0; i < dims[m]; ++i) next.push_back(a * vectors[m](i));
        }
        acc = std::move(next);
    }
    std::copy(acc.begin(), acc.end(), out.data().begin());
    return out;
}

/// Mode-k product: every mode-k fiber is multiplied by `b` (rows(b) x dim_k).
template <std::size_t Order>
[[nodiscard]] Tensor<Order> mode_product(const Tensor<Order>& t, std::size_t mode,
                                         const Eigen::MatrixXd& b) {
    const auto s = detail::split(t.dims(), mode);
    if (b.cols() != s.n) {
        throw DimensionError("mode_product: matrix has " + std::to_string(b.cols()) +
                             " columns, mode " + std::to_string(mode) + " has dim " +
                             std::to_string(s.n));
    }
    auto dims = t.dims();
    dims[mode] = b.rows();
    Tensor<Order> out(dims);
    const double* src = t.data().data();
    double* dst = out.data().data();
    for (Index o = 0; o < s.outer; ++o) {
        Eigen::Map<const RowMajorMatrix> in(src + o * s.n * s.inner, s.n, s.inner);
        Eigen::Map<RowMajorMatrix> res(dst + o * b.rows() * s.inner, b.rows(), s.inner);
        res.noalias() = b * in;
    }
    return out;
}

/// Successive mode-k products in mode order 0..P-1.
template <std::size_t Order>
[[nodiscard]] Tensor<Order> multilinear_product(const Tensor<Order>& core,
                                                const std::array<Eigen::MatrixXd, Order>& factors) {
    Tensor<Order> out = core;
    for (std::size_t m = 0; m < Order; ++m) out = mode_product(out, m, factors[m]);
    return out;
}

/// Contracts mode `mode` against `v` and drops the singleton dimension.
template <std::size_t Order>
[[nodiscard]] Tensor<Order - 1> contracted_product(const Tensor<Order>& t, std::size_t mode,
                                                   const Eigen::VectorXd& v) {
    static_assert(Order >= 2);
    const auto s = detail::split(t.dims(), mode);
    if (v.size() != s.n) throw DimensionError("contracted_product: vector length mismatch");
    typename Tensor<Order - 1>::Dims dims{};
    for (std::size_t m = 0, j = 0; m < Order; ++m) {
        if (m != mode) dims[j++] = t.dim(m);
    }
    Tensor<Order - 1> out(dims);
    const double* src = t.data().data();
    double* dst = out.data().data();
    for (Index o = 0; o < s.outer; ++o) {
        Eigen::Map<const RowMajorMatrix> in(src + o * s.n * s.inner, s.n, s.inner);
        Eigen::Map<Eigen::RowVectorXd> res(dst + o * s.inner, s.inner);
        res.noalias() = v.transpose() * in;
    }
    return out;
}

/// Diag_P(w): order-P superdiagonal tensor with w on the diagonal.
template <std::size_t Order>
[[nodiscard]] Tensor<Order> diagonal_tensor(const Eigen::VectorXd& weights) {
    const Index k = weights.size();
    if (k == 0) throw DimensionError("diagonal_tensor: empty weights");
    typename Tensor<Order>::Dims dims;
    dims.fill(k);
    Tensor<Order> out(dims);
    typename Tensor<Order>::Dims idx;
    for (Index i = 0; i < k; ++i) {
        idx.fill(i);
        out.data()[static_cast<std::size_t>(out.flat(idx))] = weights(i);
    }
    return out;
}

} // namespace ultrav
