#pragma once

// Canonical polyadic decomposition by alternating least squares.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ultrav/tensor.hpp"

namespace ultrav {

struct AlsOptions {
    int max_sweeps = 100;
    /// Stop when the change in relative fit 1 - ||T - X|| / ||T|| drops below this.
    double tol = 1e-8;
    int restarts = 1;
    std::uint64_t seed = 0;
};

/// sum_i weights(i) * factors[0].col(i) o ... o factors[P-1].col(i),
/// with unit-norm factor columns.
template <std::size_t Order>
struct CpdFactorization {
    Eigen::VectorXd weights;
    std::array<Eigen::MatrixXd, Order> factors;

    /// Squared residual ||T - X||^2 before the first sweep and after each sweep.
    std::vector<double> residual_trace;
    int sweeps = 0;
    /// Set when a mode update needed a ridge to stay solvable.
    bool ridge_applied = false;

    [[nodiscard]] Index rank() const noexcept { return weights.size(); }
};

template <std::size_t Order>
[[nodiscard]] Tensor<Order> cpd_reconstruct(const CpdFactorization<Order>& f);

/// Rank-`rank` CPD of `t`. Each sweep updates every factor with the exact
/// least-squares solution against the Khatri-Rao design of the others, so
/// the residual is non-increasing across sweeps. With `warm_start`, the first
/// attempt starts from those factors (ignored when shapes do not match);
/// further restarts use seeded uniform[0,1] initializations. The attempt with
/// the smallest final residual is returned.
template <std::size_t Order>
[[nodiscard]] CpdFactorization<Order> cpd_als(
    const Tensor<Order>& t, Index rank, const AlsOptions& opts,
    const CpdFactorization<Order>* warm_start = nullptr);

/// Matricized-tensor times Khatri-Rao product for `mode`:
/// out(i, k) = sum over other indices of t * prod_{m != mode} factors[m](i_m, k).
template <std::size_t Order>
[[nodiscard]] Eigen::MatrixXd mttkrp(const Tensor<Order>& t,
                                     const std::array<Eigen::MatrixXd, Order>& factors,
                                     std::size_t mode);

extern template Tensor<3> cpd_reconstruct(const CpdFactorization<3>&);
extern template Tensor<4> cpd_reconstruct(const CpdFactorization<4>&);
extern template CpdFactorization<3> cpd_als(const Tensor<3>&, Index, const AlsOptions&,
                                            const CpdFactorization<3>*);
extern template CpdFactorization<4> cpd_als(const Tensor<4>&, Index, const AlsOptions&,
                                            const CpdFactorization<4>*);
extern template Eigen::MatrixXd mttkrp(const Tensor<3>&, const std::array<Eigen::MatrixXd, 3>&,
                                       std::size_t);
extern template Eigen::MatrixXd mttkrp(const Tensor<4>&, const std::array<Eigen::MatrixXd, 4>&,
                                       std::size_t);

} // namespace ultrav
