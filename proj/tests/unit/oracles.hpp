#pragma once

// Independent reference implementations used by the tests. They favour
// obviousness over speed: explicit loops, exhaustive enumeration, and
// different Eigen decompositions from the ones the library uses.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ultrav/tensor.hpp"

namespace oracle {

using ultrav::Index;

inline Eigen::MatrixXd random_matrix(Index rows, Index cols, std::mt19937_64& rng, double lo = -1.0,
                                     double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = u(rng);
    }
    return m;
}

inline ultrav::Tensor3 random_tensor3(Index a, Index b, Index c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ultrav::Tensor3 t({a, b, c});
    for (double& v : t.data()) v = u(rng);
    return t;
}

inline ultrav::Tensor4 random_tensor4(Index a, Index b, Index c, Index d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ultrav::Tensor4 t({a, b, c, d});
    for (double& v : t.data()) v = u(rng);
    return t;
}

/// Mode-k unfolding of an order-3 tensor with explicit loops; columns in
/// row-major order of the remaining indices.
inline Eigen::MatrixXd unfold3(const ultrav::Tensor3& t, int mode) {
    const Index n0 = t.dim(0), n1 = t.dim(1), n2 = t.dim(2);
    const Index rows = t.dim(static_cast<std::size_t>(mode));
    Eigen::MatrixXd m(rows, t.size() / rows);
    for (Index i = 0; i < n0; ++i) {
        for (Index j = 0; j < n1; ++j) {
            for (Index k = 0; k < n2; ++k) {
                const double v = t(i, j, k);
                if (mode == 0) m(i, j * n2 + k) = v;
                if (mode == 1) m(j, i * n2 + k) = v;
                if (mode == 2) m(k, i * n1 + j) = v;
            }
        }
    }
    return m;
}

/// Singular values through the eigenvalues of the smaller Gram matrix.
inline Eigen::VectorXd gram_singular_values(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd g = m.rows() <= m.cols() ? Eigen::MatrixXd(m * m.transpose())
                                                   : Eigen::MatrixXd(m.transpose() * m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

/// Exhaustive active-set oracle for min ||a x - b||^2 + ridge ||x - prior||^2, x >= 0.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double ridge = 0.0,
                            Eigen::VectorXd prior = {}) {
    const Index n = a.cols();
    if (prior.size() == 0) prior = Eigen::VectorXd::Zero(n);
    auto objective = [&](const Eigen::VectorXd& x) {
        return (a * x - b).squaredNorm() + ridge * (x - prior).squaredNorm();
    };
    Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
    double best_obj = objective(best);
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<Index> s;
        for (Index i = 0; i < n; ++i) {
            if (mask & (1u << i)) s.push_back(i);
        }
        const Index k = static_cast<Index>(s.size());
        // Stacked least squares [a_S; sqrt(ridge) I] x_S = [b; sqrt(ridge) prior_S].
        Eigen::MatrixXd sys(a.rows() + k, k);
        Eigen::VectorXd rhs(a.rows() + k);
        sys.setZero();
        for (Index j = 0; j < k; ++j) sys.col(j).head(a.rows()) = a.col(s[static_cast<std::size_t>(j)]);
        rhs.head(a.rows()) = b;
        for (Index j = 0; j < k; ++j) {
            sys(a.rows() + j, j) = std::sqrt(ridge);
            rhs(a.rows() + j) = std::sqrt(ridge) * prior(s[static_cast<std::size_t>(j)]);
        }
        const Eigen::VectorXd xs = sys.colPivHouseholderQr().solve(rhs);
        if (xs.minCoeff() < 0.0) continue;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (Index j = 0; j < k; ++j) x(s[static_cast<std::size_t>(j)]) = xs(j);
        const double obj = objective(x);
        if (obj < best_obj - 1e-14 * std::max(1.0, best_obj)) {
            best_obj = obj;
            best = x;
        }
    }
    return best;
}

/// Exhaustive KKT oracle for min ||r - m x||^2 + lambda ||x - q||^2 on the simplex.
/// Every support S gets the equality-constrained minimizer from the full KKT
/// system; the feasible candidate with the smallest objective wins.
inline Eigen::VectorXd fcls(const Eigen::MatrixXd& m, const Eigen::VectorXd& r, double lambda = 0.0,
                            Eigen::VectorXd q = {}) {
    const Index n = m.cols();
    if (q.size() == 0) q = Eigen::VectorXd::Zero(n);
    auto objective = [&](const Eigen::VectorXd& x) {
        return (r - m * x).squaredNorm() + lambda * (x - q).squaredNorm();
    };
    Eigen::VectorXd best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<Index> s;
        for (Index i = 0; i < n; ++i) {
            if (mask & (1u << i)) s.push_back(i);
        }
        const Index k = static_cast<Index>(s.size());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
        Eigen::VectorXd rhs(k + 1);
        for (Index i = 0; i < k; ++i) {
            const Index si = s[static_cast<std::size_t>(i)];
            for (Index j = 0; j < k; ++j) {
                kkt(i, j) = 2.0 * m.col(si).dot(m.col(s[static_cast<std::size_t>(j)]));
            }
            kkt(i, i) += 2.0 * lambda;
            kkt(i, k) = 1.0;
            kkt(k, i) = 1.0;
            rhs(i) = 2.0 * m.col(si).dot(r) + 2.0 * lambda * q(si);
        }
        rhs(k) = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (!lu.isInvertible()) continue;
        const Eigen::VectorXd sol = lu.solve(rhs);
        if (sol.head(k).minCoeff() < -1e-13) continue;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (Index j = 0; j < k; ++j) x(s[static_cast<std::size_t>(j)]) = std::max(0.0, sol(j));
        const double obj = objective(x);
        if (best.size() == 0 || obj < best_obj - 1e-14 * std::max(1.0, std::abs(best_obj))) {
            best_obj = obj;
            best = x;
        }
    }
    return best;
}

/// Simplex projection by bisection on the threshold.
inline Eigen::VectorXd simplex_projection(const Eigen::VectorXd& v) {
    double lo = v.minCoeff() - 1.0;
    double hi = v.maxCoeff();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double s = (v.array() - mid).cwiseMax(0.0).sum();
        if (s > 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return (v.array() - 0.5 * (lo + hi)).cwiseMax(0.0);
}

/// Minimum-cost assignment by enumerating all permutations.
inline std::vector<Index> assignment(const Eigen::MatrixXd& cost) {
    std::vector<Index> perm(static_cast<std::size_t>(cost.rows()));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::vector<Index> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (Index i = 0; i < cost.rows(); ++i) c += cost(i, perm[static_cast<std::size_t>(i)]);
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

inline double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<Index>& perm) {
    double c = 0.0;
    for (Index i = 0; i < cost.rows(); ++i) c += cost(i, perm[static_cast<std::size_t>(i)]);
    return c;
}

/// The gap rule written out literally: d_j = s_j - s_{j+1}; the first
/// 1-based j with |d_j| < eps, or the number of singular values if none.
inline Index rank_from_spectrum(const Eigen::VectorXd& s, double eps) {
    for (Index j = 0; j + 1 < s.size(); ++j) {
        if (std::abs(s(j) - s(j + 1)) < eps) return j + 1;
    }
    return s.size();
}

/// sum_k w_k u_k o v_k o z_k with orthonormal columns: every unfolding then
/// has singular values |w| (padded with zeros).
inline ultrav::Tensor3 orthogonal_cp3(const Eigen::VectorXd& w, Index n0, Index n1, Index n2,
                                      std::mt19937_64& rng) {
    const Index k = w.size();
    auto orth = [&](Index n) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(n, k, rng));
        return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(n, k));
    };
    const Eigen::MatrixXd u = orth(n0), v = orth(n1), z = orth(n2);
    ultrav::Tensor3 t({n0, n1, n2});
    for (Index i = 0; i < n0; ++i) {
        for (Index j = 0; j < n1; ++j) {
            for (Index l = 0; l < n2; ++l) {
                double s = 0.0;
                for (Index c = 0; c < k; ++c) s += w(c) * u(i, c) * v(j, c) * z(l, c);
                t(i, j, l) = s;
            }
        }
    }
    return t;
}

} // namespace oracle
