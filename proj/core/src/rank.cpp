#include "ultrav/rank.hpp"

#include <algorithm>
#include <cmath>

#include "ultrav/linalg.hpp"

namespace ultrav {

Index first_small_gap(const Eigen::VectorXd& s, double epsilon) {
    for (Index j = 0; j + 1 < s.size(); ++j) {
        if (std::abs(s(j) - s(j + 1)) < epsilon) return j + 1;
    }
    return 0;
}

template <std::size_t Order>
RankEstimate estimate_rank(const Tensor<Order>& t, double epsilon) {
    if (!(epsilon > 0.0)) throw SpecError("estimate_rank: epsilon must be positive");
    if (t.squared_norm() == 0.0) throw DegenerateInputError("estimate_rank: zero tensor");

    RankEstimate est;
    est.epsilon = epsilon;
    for (std::size_t mode = 0; mode < Order; ++mode) {
        const auto s = singular_values(matricize(t, mode).matrix).singular_values;
        const Index j = first_small_gap(s, epsilon);
        est.per_mode.push_back(j > 0 ? j : s.size());
        est.fallback.push_back(j == 0);
    }
    est.overall = *std::max_element(est.per_mode.begin(), est.per_mode.end());
    return est;
}

RankBounds rank_bounds(const std::array<Index, 3>& dims) {
    const auto [n1, n2, n3] = dims;
    RankBounds b;
    b.upper = std::min({n1 * n2, n1 * n3, n2 * n3});
    b.mode_caps = {std::min(n1, n2 * n3), std::min(n2, n1 * n3), std::min(n3, n1 * n2)};
    return b;
}

template RankEstimate estimate_rank(const Tensor<3>&, double);
template RankEstimate estimate_rank(const Tensor<4>&, double);

} // namespace ultrav
