#include "ultrav/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace ultrav {

namespace {

std::vector<Index> indices_where(const std::vector<bool>& mask, bool value) {
    std::vector<Index> out;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] == value) out.push_back(static_cast<Index>(i));
    }
    return out;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& g, const std::vector<Index>& idx) {
    const auto n = static_cast<Index>(idx.size());
    Eigen::MatrixXd out(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) out(i, j) = g(idx[i], idx[j]);
    }
    return out;
}

Eigen::VectorXd subvector(const Eigen::VectorXd& v, const std::vector<Index>& idx) {
    Eigen::VectorXd out(static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = v(idx[i]);
    return out;
}

// Solve the symmetric PSD system g x = c; falls back to a minimum-norm
// solution when g is singular.
Eigen::VectorXd solve_psd(const Eigen::MatrixXd& g, const Eigen::VectorXd& c) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        const auto d = ldlt.vectorD();
        const double dmax = d.cwiseAbs().maxCoeff();
        if (d.minCoeff() > 1e-13 * std::max(dmax, 1e-300)) return ldlt.solve(c);
    }
    return g.completeOrthogonalDecomposition().solve(c);
}

double scale_of(const Eigen::MatrixXd& g, const Eigen::VectorXd& c) {
    double s = 1.0;
    if (g.size() > 0) s = std::max(s, g.cwiseAbs().maxCoeff());
    if (c.size() > 0) s = std::max(s, c.cwiseAbs().maxCoeff());
    return s;
}

} // namespace

SvdResult singular_values(const Eigen::MatrixXd& m) {
    if (!m.allFinite()) throw NumericError("singular_values: non-finite input");
    if (m.size() == 0) return {Eigen::VectorXd()};
    // Strongly rectangular unfoldings are reduced to their square triangular
    // factor first; Householder QR preserves the singular values.
    const Index small = std::min(m.rows(), m.cols());
    const Index large = std::max(m.rows(), m.cols());
    Eigen::VectorXd s;
    if (large > 4 * small) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr =
            m.rows() >= m.cols() ? Eigen::HouseholderQR<Eigen::MatrixXd>(m)
                                 : Eigen::HouseholderQR<Eigen::MatrixXd>(m.transpose());
        const Eigen::MatrixXd r =
            qr.matrixQR().topRows(small).template triangularView<Eigen::Upper>();
        s = Eigen::BDCSVD<Eigen::MatrixXd>(r).singularValues();
    } else {
        s = Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues();
    }
    s = s.cwiseMax(0.0);
    std::sort(s.begin(), s.end(), std::greater<>());
    return {s};
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double ridge,
                     const Eigen::VectorXd& prior) {
    if (a.rows() != b.size()) throw DimensionError("nnls: rows(a) != len(b)");
    if (ridge < 0.0) throw SpecError("nnls: ridge must be nonnegative");
    const Index n = a.cols();
    if (prior.size() != 0 && prior.size() != n) throw DimensionError("nnls: prior length mismatch");

    Eigen::MatrixXd g = a.transpose() * a;
    Eigen::VectorXd c = a.transpose() * b;
    if (ridge > 0.0) {
        g.diagonal().array() += ridge;
        if (prior.size() != 0) c += ridge * prior;
    }
    const double tol = 1e-13 * scale_of(g, c);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    Eigen::VectorXd w = c;
    const Index max_iter = 30 * n + 30;
    Index iter = 0;

    // Indices barred from entering until the next successful step; guards
    // against round-off cycling when a column enters with a nonpositive value.
    std::vector<bool> barred(static_cast<std::size_t>(n), false);

    while (true) {
        Index enter = -1;
        double wmax = tol;
        for (Index j = 0; j < n; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            if (!passive[uj] && !barred[uj] && w(j) > wmax) {
                wmax = w(j);
                enter = j;
            }
        }
        if (enter < 0) break;
        if (++iter > max_iter) throw ConvergenceError("nnls: iteration cap exceeded", x);

        passive[static_cast<std::size_t>(enter)] = true;
        bool entered = true;
        while (true) {
            const auto p = indices_where(passive, true);
            const Eigen::VectorXd zp = solve_psd(submatrix(g, p), subvector(c, p));
            if (entered && zp(static_cast<Index>(std::find(p.begin(), p.end(), enter) - p.begin())) <= 0.0) {
                passive[static_cast<std::size_t>(enter)] = false;
                barred[static_cast<std::size_t>(enter)] = true;
                break;
            }
            entered = false;
            if (zp.minCoeff() > 0.0) {
                x.setZero();
                for (std::size_t i = 0; i < p.size(); ++i) x(p[i]) = zp(static_cast<Index>(i));
                std::fill(barred.begin(), barred.end(), false);
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            Index block = -1;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double zi = zp(static_cast<Index>(i));
                const double xi = x(p[i]);
                if (zi <= 0.0 && xi / (xi - zi) < alpha) {
                    alpha = xi / (xi - zi);
                    block = p[i];
                }
            }
            for (std::size_t i = 0; i < p.size(); ++i) {
                x(p[i]) += alpha * (zp(static_cast<Index>(i)) - x(p[i]));
            }
            x(block) = 0.0;
            for (Index i : p) {
                if (x(i) <= 0.0) {
                    x(i) = 0.0;
                    passive[static_cast<std::size_t>(i)] = false;
                }
            }
            if (++iter > max_iter) throw ConvergenceError("nnls: iteration cap exceeded", x);
        }
        w = c - g * x;
    }
    return x;
}

Eigen::VectorXd fcls_solve(const Eigen::MatrixXd& m, const Eigen::VectorXd& r, double lambda,
                           const Eigen::VectorXd& q) {
    const Index n = m.cols();
    if (n < 1) throw DimensionError("fcls_solve: need at least one endmember");
    if (m.rows() != r.size()) throw DimensionError("fcls_solve: rows(m) != len(r)");
    if (lambda < 0.0) throw SpecError("fcls_solve: lambda must be nonnegative");
    if (lambda > 0.0 && q.size() != n) throw DimensionError("fcls_solve: prior length mismatch");
    if (lambda > 0.0 && !q.allFinite()) throw NumericError("fcls_solve: non-finite prior");

    Eigen::MatrixXd g = m.transpose() * m;
    Eigen::VectorXd c = m.transpose() * r;
    if (lambda > 0.0) {
        g.diagonal().array() += lambda;
        c += lambda * q;
    }
    if (n == 1) return Eigen::VectorXd::Ones(1);

    const double tol = 1e-12 * scale_of(g, c);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    std::vector<bool> free(static_cast<std::size_t>(n), true);
    const Index max_iter = 20 * n + 50;

    for (Index iter = 0; iter < max_iter; ++iter) {
        const auto f = indices_where(free, true);
        const auto nf = static_cast<Index>(f.size());

        // Equality-constrained subproblem on the free set:
        //   [G_FF 1; 1' 0] [z; mu] = [c_F; 1]
        Eigen::VectorXd z;
        double mu = 0.0;
        {
            const Eigen::MatrixXd gff = submatrix(g, f);
            const Eigen::VectorXd cf = subvector(c, f);
            Eigen::LDLT<Eigen::MatrixXd> ldlt(gff);
            const auto d = ldlt.vectorD();
            const bool pd = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                            d.minCoeff() > 1e-13 * std::max(d.cwiseAbs().maxCoeff(), 1e-300);
            if (pd) {
                const Eigen::VectorXd ginv_c = ldlt.solve(cf);
                const Eigen::VectorXd ginv_1 = ldlt.solve(Eigen::VectorXd::Ones(nf));
                mu = (ginv_c.sum() - 1.0) / ginv_1.sum();
                z = ginv_c - mu * ginv_1;
            } else {
                Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nf + 1, nf + 1);
                kkt.topLeftCorner(nf, nf) = gff;
                kkt.topRightCorner(nf, 1).setOnes();
                kkt.bottomLeftCorner(1, nf).setOnes();
                Eigen::VectorXd rhs(nf + 1);
                rhs << cf, 1.0;
                const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
                z = sol.head(nf);
                mu = sol(nf);
            }
        }

        if (z.minCoeff() >= 0.0) {
            x.setZero();
            for (Index i = 0; i < nf; ++i) x(f[static_cast<std::size_t>(i)]) = z(i);
            // Multipliers of the active bounds: nu_i = (G x - c)_i + mu.
            const Eigen::VectorXd grad = g * x - c;
            Index leave = -1;
            double most_negative = -tol;
            for (Index i = 0; i < n; ++i) {
                if (free[static_cast<std::size_t>(i)]) continue;
                const double nu = grad(i) + mu;
                if (nu < most_negative) {
                    most_negative = nu;
                    leave = i;
                }
            }
            if (leave < 0) return x;
            free[static_cast<std::size_t>(leave)] = true;
            continue;
        }

        // Step toward z until the first bound becomes active.
        double alpha = 1.0;
        Index block = -1;
        for (Index i = 0; i < nf; ++i) {
            const Index gi = f[static_cast<std::size_t>(i)];
            if (z(i) < 0.0) {
                const double a = x(gi) / (x(gi) - z(i));
                if (a < alpha) {
                    alpha = a;
                    block = gi;
                }
            }
        }
        for (Index i = 0; i < nf; ++i) {
            const Index gi = f[static_cast<std::size_t>(i)];
            x(gi) += alpha * (z(i) - x(gi));
        }
        if (block >= 0) {
            x(block) = 0.0;
            free[static_cast<std::size_t>(block)] = false;
        }
        // Renormalize against round-off drift off the hyperplane.
        x = x.cwiseMax(0.0);
        x /= x.sum();
    }
    throw ConvergenceError("fcls_solve: iteration cap exceeded", x);
}

SclsResult scls_solve(const Eigen::MatrixXd& m, const Eigen::VectorXd& r) {
    const Index n = m.cols();
    Eigen::VectorXd beta;
    try {
        beta = nnls(m, r);
    } catch (const ConvergenceError& e) {
        beta = e.best_iterate();
    }
    const double scale = beta.sum();
    if (scale > 0.0) return {beta / scale, scale};
    return {Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), 0.0};
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
    const Index n = v.size();
    if (n == 0) throw DimensionError("project_to_simplex: empty vector");
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (Index j = 0; j < n; ++j) {
        cumsum += u[static_cast<std::size_t>(j)];
        const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (u[static_cast<std::size_t>(j)] - t > 0.0) theta = t;
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

} // namespace ultrav
