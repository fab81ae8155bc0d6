#include "ultrav/cpd.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Cholesky>

namespace ultrav {

namespace {

// Khatri-Rao product of factors[first..last) with rows in row-major order of
// the corresponding tensor indices (first mode slowest).
template <std::size_t Order>
Eigen::MatrixXd khatri_rao(const std::array<Eigen::MatrixXd, Order>& factors, std::size_t first,
                           std::size_t last, Index rank) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Ones(1, rank);
    for (std::size_t m = first; m < last; ++m) {
        const auto& b = factors[m];
        Eigen::MatrixXd next(acc.rows() * b.rows(), rank);
        for (Index r = 0; r < acc.rows(); ++r) {
            next.middleRows(r * b.rows(), b.rows()) =
                b.array().rowwise() * acc.row(r).array();
        }
        acc = std::move(next);
    }
    return acc;
}

// Rows [begin, begin + count) of khatri_rao(factors, first, last, rank).
template <std::size_t Order>
Eigen::MatrixXd khatri_rao_rows(const std::array<Eigen::MatrixXd, Order>& factors,
                                std::size_t first, std::size_t last, Index begin, Index count) {
    const Index rank = factors[0].cols();
    Eigen::MatrixXd out(count, rank);
    if (first == last) {
        out.setOnes();
        return out;
    }
    const auto& fast = factors[last - 1];
    const Index nfast = fast.rows();
    Eigen::RowVectorXd prefix(rank);
    auto load_prefix = [&](Index idx) {
        prefix.setOnes();
        for (std::size_t m = last - 1; m-- > first;) {
            const Index n = factors[m].rows();
            prefix.array() *= factors[m].row(idx % n).array();
            idx /= n;
        }
    };
    Index slow = begin / nfast;
    Index digit = begin % nfast;
    load_prefix(slow);
    for (Index r = 0; r < count; ++r) {
        out.row(r) = prefix.cwiseProduct(fast.row(digit));
        if (++digit == nfast) {
            digit = 0;
            load_prefix(++slow);
        }
    }
    return out;
}

template <std::size_t Order>
Eigen::MatrixXd hadamard_gram(const std::array<Eigen::MatrixXd, Order>& factors, Index rank,
                              std::size_t skip) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Ones(rank, rank);
    for (std::size_t m = 0; m < Order; ++m) {
        if (m == skip) continue;
        v.array() *= (factors[m].transpose() * factors[m]).array();
    }
    return v;
}

template <std::size_t Order>
std::array<Eigen::MatrixXd, Order> random_factors(const typename Tensor<Order>::Dims& dims,
                                                  Index rank, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::array<Eigen::MatrixXd, Order> f;
    for (std::size_t m = 0; m < Order; ++m) {
        f[m].resize(dims[m], rank);
        for (Index k = 0; k < rank; ++k) {
            for (Index i = 0; i < dims[m]; ++i) f[m](i, k) = unif(rng);
        }
        for (Index k = 0; k < rank; ++k) {
            const double n = f[m].col(k).norm();
            if (n > 0.0) f[m].col(k) /= n;
        }
    }
    return f;
}

// Normalizes the columns of `w` in place and returns the norms. Zero columns
// become the normalized all-ones vector with weight zero.
Eigen::VectorXd normalize_columns(Eigen::MatrixXd& w) {
    Eigen::VectorXd norms(w.cols());
    for (Index k = 0; k < w.cols(); ++k) {
        const double n = w.col(k).norm();
        norms(k) = n;
        if (n > 0.0) {
            w.col(k) /= n;
        } else {
            w.col(k).setConstant(1.0 / std::sqrt(static_cast<double>(w.rows())));
        }
    }
    return norms;
}

// ||T||^2 - 2<T, X> + ||X||^2 cancels catastrophically once X is close to T,
// leaving noise of a few ulps of ||T||^2. Below this fraction of ||T||^2 the
// residual is recomputed from the reconstruction.
constexpr double kExplicitResidualBelow = 1e-4;

template <std::size_t Order>
double accurate_residual(double cheap, const Tensor<Order>& t, double t_norm2,
                         const CpdFactorization<Order>& f) {
    if (cheap >= kExplicitResidualBelow * t_norm2) return cheap;
    return squared_distance(t, cpd_reconstruct(f));
}

template <std::size_t Order>
CpdFactorization<Order> run_als(const Tensor<Order>& t, double t_norm2,
                                CpdFactorization<Order> f, const AlsOptions& opts) {
    const Index rank = f.rank();
    const double t_norm = std::sqrt(t_norm2);

    // Residual at the starting point.
    {
        const Eigen::MatrixXd mt = mttkrp(t, f.factors, 0);
        const Eigen::MatrixXd w0 = f.factors[0] * f.weights.asDiagonal();
        const double inner = (mt.array() * w0.array()).sum();
        const Eigen::MatrixXd v = hadamard_gram(f.factors, rank, Order);
        const double xnorm2 = f.weights.dot(v * f.weights);
        f.residual_trace.push_back(accurate_residual(std::max(0.0, t_norm2 - 2.0 * inner + xnorm2), t, t_norm2, f));
    }

    double fit_prev = 1.0 - std::sqrt(f.residual_trace.back()) / t_norm;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double residual = 0.0;
        for (std::size_t mode = 0; mode < Order; ++mode) {
            Eigen::MatrixXd v = hadamard_gram(f.factors, rank, mode);
            const Eigen::MatrixXd mt = mttkrp(t, f.factors, mode);

            Eigen::LDLT<Eigen::MatrixXd> ldlt(v);
            const auto d = ldlt.vectorD();
            const double dmax = std::max(d.cwiseAbs().maxCoeff(), 1e-300);
            if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || d.minCoeff() <= 1e-12 * dmax) {
                v.diagonal().array() += 1e-12 * v.diagonal().maxCoeff();
                ldlt.compute(v);
                f.ridge_applied = true;
            }
            Eigen::MatrixXd w = ldlt.solve(mt.transpose()).transpose();

            if (mode + 1 == Order) {
                const double inner = (mt.array() * w.array()).sum();
                const double xnorm2 = (v.array() * (w.transpose() * w).array()).sum();
                residual = std::max(0.0, t_norm2 - 2.0 * inner + xnorm2);
            }
            f.weights = normalize_columns(w);
            f.factors[mode] = std::move(w);
        }
        residual = accurate_residual(residual, t, t_norm2, f);
        f.residual_trace.push_back(residual);
        f.sweeps = sweep + 1;
        const double fit = 1.0 - std::sqrt(residual) / t_norm;
        if (std::abs(fit - fit_prev) < opts.tol) break;
        fit_prev = fit;
    }
    return f;
}

} // namespace

template <std::size_t Order>
Eigen::MatrixXd mttkrp(const Tensor<Order>& t, const std::array<Eigen::MatrixXd, Order>& factors,
                       std::size_t mode) {
    const auto s = detail::split(t.dims(), mode);
    const Index rank = factors[0].cols();
    for (std::size_t m = 0; m < Order; ++m) {
        if (factors[m].rows() != t.dim(m) || factors[m].cols() != rank) {
            throw DimensionError("mttkrp: factor " + std::to_string(m) + " has wrong shape");
        }
    }
    const double* src = t.data().data();
    // The outer (left) Khatri-Rao rows are generated per chunk so that neither
    // it nor the intermediate product is ever materialized in full.
    constexpr Index kChunkRows = 8192;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(s.n, rank);
    if (s.inner == 1) {
        Eigen::Map<const RowMajorMatrix> tm(src, s.outer, s.n);
        for (Index o0 = 0; o0 < s.outer; o0 += kChunkRows) {
            const Index c = std::min(kChunkRows, s.outer - o0);
            out.noalias() += tm.middleRows(o0, c).transpose() * khatri_rao_rows(factors, 0, mode, o0, c);
        }
        return out;
    }
    const Eigen::MatrixXd right = khatri_rao(factors, mode + 1, Order, rank);
    Eigen::Map<const RowMajorMatrix> tm(src, s.outer * s.n, s.inner);
    if (s.outer == 1) return tm * right;
    const Index chunk = std::max<Index>(1, kChunkRows / s.n);
    Eigen::MatrixXd y;
    for (Index o0 = 0; o0 < s.outer; o0 += chunk) {
        const Index c = std::min(chunk, s.outer - o0);
        y.noalias() = tm.middleRows(o0 * s.n, c * s.n) * right;
        const Eigen::MatrixXd left = khatri_rao_rows(factors, 0, mode, o0, c);
        for (Index o = 0; o < c; ++o) {
            out.array() += y.middleRows(o * s.n, s.n).array().rowwise() * left.row(o).array();
        }
    }
    return out;
}

template <std::size_t Order>
Tensor<Order> cpd_reconstruct(const CpdFactorization<Order>& f) {
    const Index rank = f.rank();
    typename Tensor<Order>::Dims dims{};
    for (std::size_t m = 0; m < Order; ++m) {
        if (f.factors[m].cols() != rank) throw DimensionError("cpd_reconstruct: rank mismatch");
        dims[m] = f.factors[m].rows();
    }
    Tensor<Order> out(dims);
    const Eigen::MatrixXd rest = khatri_rao(f.factors, 1, Order, rank);
    Eigen::Map<RowMajorMatrix> x(out.data().data(), dims[0], rest.rows());
    x.noalias() = (f.factors[0] * f.weights.asDiagonal()) * rest.transpose();
    return out;
}

template <std::size_t Order>
CpdFactorization<Order> cpd_als(const Tensor<Order>& t, Index rank, const AlsOptions& opts,
                                const CpdFactorization<Order>* warm_start) {
    if (rank < 1) throw DimensionError("cpd_als: rank must be >= 1");
    if (opts.max_sweeps < 1 || !(opts.tol > 0.0)) throw SpecError("cpd_als: invalid AlsOptions");
    for (std::size_t m = 0; m < Order; ++m) {
        const Index others = t.size() / t.dim(m);
        if (rank > others) {
            throw DimensionError("cpd_als: rank " + std::to_string(rank) +
                                 " exceeds the column count of mode-" + std::to_string(m) +
                                 " unfolding (" + std::to_string(others) + ")");
        }
    }
    if (!t.all_finite()) throw NumericError("cpd_als: tensor has non-finite entries");

    const double t_norm2 = t.squared_norm();
    if (t_norm2 == 0.0) {
        CpdFactorization<Order> f;
        f.factors = random_factors<Order>(t.dims(), rank, opts.seed);
        f.weights = Eigen::VectorXd::Zero(rank);
        f.residual_trace = {0.0};
        return f;
    }

    bool warm_ok = warm_start != nullptr && warm_start->rank() == rank;
    if (warm_ok) {
        for (std::size_t m = 0; m < Order; ++m) {
            warm_ok = warm_ok && warm_start->factors[m].rows() == t.dim(m);
        }
    }

    const int attempts = std::max(1, opts.restarts);
    std::optional<CpdFactorization<Order>> best;
    for (int a = 0; a < attempts; ++a) {
        CpdFactorization<Order> init;
        if (a == 0 && warm_ok) {
            init.factors = warm_start->factors;
            init.weights = warm_start->weights;
        } else {
            init.factors = random_factors<Order>(t.dims(), rank,
                                                 opts.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(a));
            init.weights = Eigen::VectorXd::Ones(rank);
        }
        auto f = run_als(t, t_norm2, std::move(init), opts);
        if (!best || f.residual_trace.back() < best->residual_trace.back()) best = std::move(f);
    }
    return std::move(*best);
}

template Tensor<3> cpd_reconstruct(const CpdFactorization<3>&);
template Tensor<4> cpd_reconstruct(const CpdFactorization<4>&);
template CpdFactorization<3> cpd_als(const Tensor<3>&, Index, const AlsOptions&,
                                     const CpdFactorization<3>*);
template CpdFactorization<4> cpd_als(const Tensor<4>&, Index, const AlsOptions&,
                                     const CpdFactorization<4>*);
template Eigen::MatrixXd mttkrp(const Tensor<3>&, const std::array<Eigen::MatrixXd, 3>&,
                                std::size_t);
template Eigen::MatrixXd mttkrp(const Tensor<4>&, const std::array<Eigen::MatrixXd, 4>&,
                                std::size_t);

} // namespace ultrav
