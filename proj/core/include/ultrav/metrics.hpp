#pragma once

// Evaluation metrics: MSE of abundances/endmembers/reconstruction, spectral
// angle mapper for pixels and per-pixel endmembers, and endmember
// permutation alignment.

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ultrav/synth.hpp"
#include "ultrav/tensor.hpp"
#include "ultrav/unmixing.hpp"

namespace ultrav {

/// ||vec(x) - vec(y)||^2 / N.
template <std::size_t Order>
[[nodiscard]] double mse(const Tensor<Order>& x, const Tensor<Order>& y) {
    if (x.dims() != y.dims()) throw DimensionError("mse: dims differ");
    return squared_distance(x, y) / static_cast<double>(x.size());
}

struct AngleStat {
    double radians = 0.0;
    /// Pixels (sam_r) or pixel/endmember pairs (sam_m) skipped for zero norm.
    Index skipped = 0;
};

/// Angle between two vectors, clamped to [0, pi]. Returns NaN if either is zero.
[[nodiscard]] double spectral_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Mean over pixels of the spectral angle between observed and reconstructed fibers.
[[nodiscard]] AngleStat sam_r(const Tensor3& cube, const Tensor3& reconstructed);

/// (1/N) sum over pixels of the sum over endmembers of the angle between
/// true and estimated endmember columns.
[[nodiscard]] AngleStat sam_m(const Tensor4& truth, const Tensor4& estimate);

/// Pixelwise M_n a_n.
[[nodiscard]] Tensor3 reconstruct_cube(const Tensor3& abundances, const Tensor4& endmembers);

/// Minimum-cost assignment of rows to columns of a square cost matrix
/// (Hungarian algorithm). Returns col[row].
[[nodiscard]] std::vector<Index> min_cost_assignment(const Eigen::MatrixXd& cost);

/// Permutation `perm` such that estimated endmember perm[k] matches true
/// endmember k, by minimum total spectral angle between pixel-averaged spectra.
[[nodiscard]] std::vector<Index> align_endmembers(const Tensor4& truth, const Tensor4& estimate);

/// Reorders the last mode: out[..., k] = t[..., perm[k]].
template <std::size_t Order>
[[nodiscard]] Tensor<Order> permute_members(const Tensor<Order>& t, const std::vector<Index>& perm) {
    const Index r = t.dim(Order - 1);
    if (static_cast<Index>(perm.size()) != r) throw DimensionError("permute_members: size mismatch");
    Tensor<Order> out(t.dims());
    const auto src = t.data();
    auto dst = out.data();
    for (Index base = 0; base < t.size(); base += r) {
        for (Index k = 0; k < r; ++k) {
            dst[static_cast<std::size_t>(base + k)] = src[static_cast<std::size_t>(base + perm[static_cast<std::size_t>(k)])];
        }
    }
    return out;
}

struct MetricsReport {
    double mse_a = 0.0;
    /// Absent for methods that do not estimate endmembers.
    std::optional<double> mse_m;
    std::optional<double> sam_m;
    double mse_r = 0.0;
    double sam_r = 0.0;
    double time_s = 0.0;
    std::vector<Index> permutation;
};

/// Aligns the estimate to the truth, then compares. Reconstruction metrics
/// compare truth.cube with M_n a_n from the estimate.
[[nodiscard]] MetricsReport evaluate(const SceneTruth& truth, const Tensor3& abundances,
                                     const Tensor4& endmembers, double time_s,
                                     bool endmembers_estimated);

[[nodiscard]] MetricsReport evaluate(const SceneTruth& truth, const UnmixResult& result);

} // namespace ultrav
