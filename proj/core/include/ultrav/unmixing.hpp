#pragma once

// Block-coordinate unmixing with low-rank tensor regularization of both the
// abundance tensor A (N1 x N2 x R) and the per-pixel endmember tensor
// M (N1 x N2 x L x R), plus the FCLS and SCLS per-pixel baselines.
//
// Global cost:
//   J = 1/2 sum_n ||r_n - M_n a_n||^2 + lambda_M/2 ||M - P||^2 + lambda_A/2 ||A - Q||^2
// with A on the simplex fiberwise, M >= 0, and P, Q low-rank CPD tensors.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ultrav/cpd.hpp"
#include "ultrav/rank.hpp"
#include "ultrav/tensor.hpp"

namespace ultrav {

struct UnmixConfig {
    double lambda_a = 100.0;
    double lambda_m = 0.4;
    double epsilon = kDefaultRankEpsilon;
    std::optional<Index> rank_q_override;
    std::optional<Index> rank_p_override;
    int max_outer_iters = 50;
    /// Relative change in global cost between outer iterations.
    double outer_tol = 1e-4;
    /// ALS settings for the abundance prior Q.
    AlsOptions als{};
    /// ALS settings for the endmember prior P. Factors are warm-started across
    /// outer iterations, so a few sweeps per iteration suffice.
    AlsOptions als_p{.max_sweeps = 10};
    /// Seeds the CPD initializations (overrides als.seed and als_p.seed).
    std::uint64_t seed = 0;
};

/// Global cost at the block boundaries of one outer iteration.
struct IterationRecord {
    double before = 0.0;
    double after_p = 0.0;
    double after_q = 0.0;
    double after_m = 0.0;
    double after_a = 0.0;
    /// ALS residual traces of the P and Q decompositions.
    std::vector<double> p_residuals;
    std::vector<double> q_residuals;
};

struct UnmixResult {
    Tensor3 abundances;
    Tensor4 endmembers;
    Tensor3 q_hat;
    Tensor4 p_hat;
    /// Global cost after each outer iteration.
    std::vector<double> cost_trace;
    Index rank_q = 0;
    Index rank_p = 0;
    int iters = 0;
    double wall_time = 0.0;
    std::vector<IterationRecord> history;
};

/// Replicates an L x R endmember matrix across an n1 x n2 grid.
[[nodiscard]] Tensor4 replicate_endmembers(const Eigen::MatrixXd& m0, Index n1, Index n2);

/// Data-fit term 1/2 sum_n ||r_n - M_n a_n||^2.
[[nodiscard]] double data_fit(const Tensor3& cube, const Tensor3& a, const Tensor4& m);

[[nodiscard]] double cost(const Tensor3& cube, const Tensor3& a, const Tensor4& m,
                          const Tensor4& p, const Tensor3& q, const UnmixConfig& cfg);

/// Pixelwise regularized FCLS against the per-pixel endmembers.
[[nodiscard]] Tensor3 update_a(const Tensor3& cube, const Tensor4& m, const Tensor3& q,
                               double lambda_a);

/// Pixelwise P+((r a' + lambda P_n)(a a' + lambda I)^-1). Requires lambda_m > 0
/// unless every a a' is invertible (R = 1, a != 0).
[[nodiscard]] Tensor4 update_m(const Tensor3& cube, const Tensor3& a, const Tensor4& p,
                               double lambda_m);

/// Low-rank prior: the CPD reconstruction plus the factorization it came from.
template <std::size_t Order>
struct LowRankPrior {
    Tensor<Order> tensor;
    CpdFactorization<Order> factorization;
};

[[nodiscard]] LowRankPrior<4> update_p(const Tensor4& m, Index rank, const AlsOptions& als,
                                       const CpdFactorization<4>* warm = nullptr);
[[nodiscard]] LowRankPrior<3> update_q(const Tensor3& a, Index rank, const AlsOptions& als,
                                       const CpdFactorization<3>* warm = nullptr);

/// Runs the outer loop (P, Q, M, A updates in that order) from SCLS abundances
/// and the given initial endmembers. An L x R matrix is replicated across
/// pixels. lambda_m = 0 keeps the endmembers fixed at their initial value.
[[nodiscard]] UnmixResult ultra_v(const Tensor3& cube, const Eigen::MatrixXd& m0,
                                  const UnmixConfig& cfg);
[[nodiscard]] UnmixResult ultra_v(const Tensor3& cube, const Tensor4& m0, const UnmixConfig& cfg);

[[nodiscard]] Tensor3 unmix_fcls(const Tensor3& cube, const Eigen::MatrixXd& m0);

struct SclsMaps {
    Tensor3 abundances;
    /// n1 x n2 per-pixel scale.
    Tensor2 scale;
};

[[nodiscard]] SclsMaps unmix_scls(const Tensor3& cube, const Eigen::MatrixXd& m0);

} // namespace ultrav
