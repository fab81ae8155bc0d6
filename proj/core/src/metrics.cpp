#include "ultrav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ultrav {

double spectral_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    // Half-angle form; acos loses half the digits for nearly parallel vectors.
    const Eigen::VectorXd ua = a / na;
    const Eigen::VectorXd ub = b / nb;
    return 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

AngleStat sam_r(const Tensor3& cube, const Tensor3& reconstructed) {
    if (cube.dims() != reconstructed.dims()) throw DimensionError("sam_r: dims differ");
    const Index bands = cube.dim(2);
    const Index pixels = cube.dim(0) * cube.dim(1);
    AngleStat out;
    double total = 0.0;
    for (Index p = 0; p < pixels; ++p) {
        Eigen::Map<const Eigen::VectorXd> r(cube.data().data() + p * bands, bands);
        Eigen::Map<const Eigen::VectorXd> rh(reconstructed.data().data() + p * bands, bands);
        const double ang = spectral_angle(r, rh);
        if (std::isnan(ang)) {
            ++out.skipped;
        } else {
            total += ang;
        }
    }
    const Index used = pixels - out.skipped;
    out.radians = used > 0 ? total / static_cast<double>(used) : 0.0;
    return out;
}

AngleStat sam_m(const Tensor4& truth, const Tensor4& estimate) {
    if (truth.dims() != estimate.dims()) throw DimensionError("sam_m: dims differ");
    const Index pixels = truth.dim(0) * truth.dim(1);
    const Index bands = truth.dim(2);
    const Index r = truth.dim(3);
    AngleStat out;
    double total = 0.0;
    Index pixels_used = 0;
    for (Index p = 0; p < pixels; ++p) {
        Eigen::Map<const RowMajorMatrix> m(truth.data().data() + p * bands * r, bands, r);
        Eigen::Map<const RowMajorMatrix> mh(estimate.data().data() + p * bands * r, bands, r);
        bool any = false;
        for (Index k = 0; k < r; ++k) {
            const double ang = spectral_angle(m.col(k), mh.col(k));
            if (std::isnan(ang)) {
                ++out.skipped;
            } else {
                total += ang;
                any = true;
            }
        }
        if (any) ++pixels_used;
    }
    out.radians = pixels_used > 0 ? total / static_cast<double>(pixels_used) : 0.0;
    return out;
}

Tensor3 reconstruct_cube(const Tensor3& abundances, const Tensor4& endmembers) {
    const auto& ad = abundances.dims();
    const auto& md = endmembers.dims();
    if (ad[0] != md[0] || ad[1] != md[1] || ad[2] != md[3]) {
        throw DimensionError("reconstruct_cube: abundance/endmember dims differ");
    }
    const Index bands = md[2];
    const Index r = md[3];
    Tensor3 out({ad[0], ad[1], bands});
    for (Index p = 0; p < ad[0] * ad[1]; ++p) {
        Eigen::Map<const RowMajorMatrix> m(endmembers.data().data() + p * bands * r, bands, r);
        Eigen::Map<const Eigen::VectorXd> a(abundances.data().data() + p * r, r);
        Eigen::Map<Eigen::VectorXd>(out.data().data() + p * bands, bands).noalias() = m * a;
    }
    return out;
}

std::vector<Index> min_cost_assignment(const Eigen::MatrixXd& cost) {
    const Index n = cost.rows();
    if (cost.cols() != n) throw DimensionError("min_cost_assignment: cost must be square");
    // Potentials-based Hungarian algorithm, 1-based internal indexing.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<Index> match(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
    for (Index i = 1; i <= n; ++i) {
        match[0] = i;
        Index j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
        std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const Index i0 = match[static_cast<std::size_t>(j0)];
            double delta = inf;
            Index j1 = 0;
            for (Index j = 1; j <= n; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                if (used[uj]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[uj];
                if (cur < minv[uj]) {
                    minv[uj] = cur;
                    way[uj] = j0;
                }
                if (minv[uj] < delta) {
                    delta = minv[uj];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                if (used[uj]) {
                    u[static_cast<std::size_t>(match[uj])] += delta;
                    v[uj] -= delta;
                } else {
                    minv[uj] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const Index j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<Index> col_of_row(static_cast<std::size_t>(n), 0);
    for (Index j = 1; j <= n; ++j) col_of_row[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return col_of_row;
}

namespace {

Eigen::MatrixXd mean_endmembers(const Tensor4& m) {
    const Index pixels = m.dim(0) * m.dim(1);
    const Index bands = m.dim(2);
    const Index r = m.dim(3);
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(bands, r);
    for (Index p = 0; p < pixels; ++p) {
        mean += Eigen::Map<const RowMajorMatrix>(m.data().data() + p * bands * r, bands, r);
    }
    return mean / static_cast<double>(pixels);
}

} // namespace

std::vector<Index> align_endmembers(const Tensor4& truth, const Tensor4& estimate) {
    if (truth.dims() != estimate.dims()) throw DimensionError("align_endmembers: dims differ");
    const Eigen::MatrixXd mt = mean_endmembers(truth);
    const Eigen::MatrixXd me = mean_endmembers(estimate);
    const Index r = mt.cols();
    Eigen::MatrixXd c(r, r);
    for (Index k = 0; k < r; ++k) {
        for (Index j = 0; j < r; ++j) {
            const double ang = spectral_angle(mt.col(k), me.col(j));
            c(k, j) = std::isnan(ang) ? 4.0 : ang;
        }
    }
    return min_cost_assignment(c);
}

MetricsReport evaluate(const SceneTruth& truth, const Tensor3& abundances,
                       const Tensor4& endmembers, double time_s, bool endmembers_estimated) {
    MetricsReport rep;
    rep.permutation = align_endmembers(truth.endmembers, endmembers);
    const Tensor3 a = permute_members(abundances, rep.permutation);
    const Tensor4 m = permute_members(endmembers, rep.permutation);
    rep.mse_a = mse(truth.abundances, a);
    if (endmembers_estimated) {
        rep.mse_m = mse(truth.endmembers, m);
        rep.sam_m = sam_m(truth.endmembers, m).radians;
    }
    const Tensor3 rec = reconstruct_cube(a, m);
    rep.mse_r = mse(truth.cube, rec);
    rep.sam_r = sam_r(truth.cube, rec).radians;
    rep.time_s = time_s;
    return rep;
}

MetricsReport evaluate(const SceneTruth& truth, const UnmixResult& result) {
    return evaluate(truth, result.abundances, result.endmembers, result.wall_time, true);
}

} // namespace ultrav
