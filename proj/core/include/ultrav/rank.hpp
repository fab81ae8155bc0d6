#pragma once

// "Useful rank" of a tensor from the first differences of the singular values
// of its matricizations.

#include <array>
#include <vector>

#include "ultrav/tensor.hpp"

namespace ultrav {

inline constexpr double kDefaultRankEpsilon = 0.15;

struct RankEstimate {
    /// One candidate per mode.
    std::vector<Index> per_mode;
    /// max(per_mode).
    Index overall = 0;
    double epsilon = kDefaultRankEpsilon;
    /// Modes where no singular-value gap fell below epsilon; the candidate is
    /// then the full singular-value count.
    std::vector<bool> fallback;
};

/// For each mode i with singular values s of mat_i(t) and gaps
/// d_j = s_j - s_{j+1}, the candidate is the smallest 1-based j with
/// |d_j| < epsilon. Epsilon applies to raw singular values; a clean rank-1
/// tensor therefore estimates as 2 (the first small gap follows the big drop).
/// Throws DegenerateInputError for an all-zero tensor.
template <std::size_t Order>
[[nodiscard]] RankEstimate estimate_rank(const Tensor<Order>& t,
                                         double epsilon = kDefaultRankEpsilon);

/// The candidate rule applied to one non-increasing spectrum; 0 signals the
/// fallback (no gap below epsilon).
[[nodiscard]] Index first_small_gap(const Eigen::VectorXd& singular_values, double epsilon);

/// Dimension-only caps for an order-3 tensor.
struct RankBounds {
    /// min(n1 n2, n1 n3, n2 n3): generic upper bound on the CP rank.
    Index upper = 0;
    /// min(N_i, product of the other dims): the number of singular values of mat_i.
    std::array<Index, 3> mode_caps{};
};

[[nodiscard]] RankBounds rank_bounds(const std::array<Index, 3>& dims);

extern template RankEstimate estimate_rank(const Tensor<3>&, double);
extern template RankEstimate estimate_rank(const Tensor<4>&, double);

} // namespace ultrav
