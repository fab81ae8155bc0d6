#include "ultrav/unmixing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "ultrav/linalg.hpp"

namespace ultrav {

namespace {

struct Shape {
    Index n1, n2, bands, members;
    [[nodiscard]] Index pixels() const { return n1 * n2; }
};

Shape shape_of(const Tensor3& cube, const Tensor4& m) {
    const auto& cd = cube.dims();
    const auto& md = m.dims();
    if (md[0] != cd[0] || md[1] != cd[1] || md[2] != cd[2]) {
        throw DimensionError("endmember tensor dims do not match the cube");
    }
    return {cd[0], cd[1], cd[2], md[3]};
}

void check_abundances(const Tensor3& a, const Shape& s, const char* what) {
    const auto& d = a.dims();
    if (d[0] != s.n1 || d[1] != s.n2 || d[2] != s.members) {
        throw DimensionError(std::string(what) + ": dims do not match cube/endmembers");
    }
}

Eigen::Map<const RowMajorMatrix> slab(const Tensor4& m, Index pixel, const Shape& s) {
    return {m.data().data() + pixel * s.bands * s.members, s.bands, s.members};
}
Eigen::Map<RowMajorMatrix> slab(Tensor4& m, Index pixel, const Shape& s) {
    return {m.data().data() + pixel * s.bands * s.members, s.bands, s.members};
}
Eigen::Map<const Eigen::VectorXd> pixel_fiber(const Tensor3& t, Index pixel) {
    const Index n = t.dim(2);
    return {t.data().data() + pixel * n, n};
}
Eigen::Map<Eigen::VectorXd> pixel_fiber(Tensor3& t, Index pixel) {
    const Index n = t.dim(2);
    return {t.data().data() + pixel * n, n};
}

std::string pixel_name(Index pixel, const Shape& s) {
    return "(" + std::to_string(pixel / s.n2) + ", " + std::to_string(pixel % s.n2) + ")";
}

Index feasible_rank_cap(const auto& t) {
    Index cap = t.size();
    for (std::size_t m = 0; m < t.dims().size(); ++m) cap = std::min(cap, t.size() / t.dim(m));
    return cap;
}

AlsOptions seeded(AlsOptions als, std::uint64_t seed) {
    als.seed = seed;
    return als;
}

} // namespace

Tensor4 replicate_endmembers(const Eigen::MatrixXd& m0, Index n1, Index n2) {
    Tensor4 out({n1, n2, m0.rows(), m0.cols()});
    const Shape s{n1, n2, m0.rows(), m0.cols()};
    for (Index p = 0; p < s.pixels(); ++p) slab(out, p, s) = m0;
    return out;
}

double data_fit(const Tensor3& cube, const Tensor3& a, const Tensor4& m) {
    const Shape s = shape_of(cube, m);
    check_abundances(a, s, "data_fit");
    double total = 0.0;
    for (Index p = 0; p < s.pixels(); ++p) {
        total += (pixel_fiber(cube, p) - slab(m, p, s) * pixel_fiber(a, p)).squaredNorm();
    }
    return 0.5 * total;
}

double cost(const Tensor3& cube, const Tensor3& a, const Tensor4& m, const Tensor4& p,
            const Tensor3& q, const UnmixConfig& cfg) {
    return data_fit(cube, a, m) + 0.5 * cfg.lambda_m * squared_distance(m, p) +
           0.5 * cfg.lambda_a * squared_distance(a, q);
}

Tensor3 update_a(const Tensor3& cube, const Tensor4& m, const Tensor3& q, double lambda_a) {
    const Shape s = shape_of(cube, m);
    check_abundances(q, s, "update_a");
    Tensor3 out({s.n1, s.n2, s.members});
    Eigen::VectorXd prior;
    for (Index p = 0; p < s.pixels(); ++p) {
        if (lambda_a > 0.0) prior = pixel_fiber(q, p);
        try {
            pixel_fiber(out, p) = fcls_solve(slab(m, p, s), pixel_fiber(cube, p), lambda_a, prior);
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(std::string(e.what()) + " at pixel " + pixel_name(p, s),
                                   e.best_iterate());
        }
    }
    return out;
}

Tensor4 update_m(const Tensor3& cube, const Tensor3& a, const Tensor4& p, double lambda_m) {
    const Shape s = shape_of(cube, p);
    check_abundances(a, s, "update_m");
    if (lambda_m < 0.0) throw SpecError("update_m: lambda_m must be nonnegative");
    Tensor4 out(p.dims());
    for (Index px = 0; px < s.pixels(); ++px) {
        const auto r = pixel_fiber(cube, px);
        const auto al = pixel_fiber(a, px);
        const auto prior = slab(p, px, s);
        auto dst = slab(out, px, s);
        const double a2 = al.squaredNorm();
        if (lambda_m > 0.0) {
            // (r a' + l P)(a a' + l I)^-1 = P + (r - P a) a' / (l + |a|^2)
            dst = prior + ((r - prior * al) / (lambda_m + a2)) * al.transpose();
        } else if (s.members == 1 && a2 > 0.0) {
            dst = r / al(0);
        } else {
            throw NumericError("update_m: a a' is singular at pixel " + pixel_name(px, s) +
                               "; use lambda_m > 0");
        }
    }
    for (double& v : out.data()) v = std::max(v, 0.0);
    return out;
}

LowRankPrior<4> update_p(const Tensor4& m, Index rank, const AlsOptions& als,
                         const CpdFactorization<4>* warm) {
    auto f = cpd_als(m, rank, als, warm);
    auto t = cpd_reconstruct(f);
    return {std::move(t), std::move(f)};
}

LowRankPrior<3> update_q(const Tensor3& a, Index rank, const AlsOptions& als,
                         const CpdFactorization<3>* warm) {
    auto f = cpd_als(a, rank, als, warm);
    auto t = cpd_reconstruct(f);
    return {std::move(t), std::move(f)};
}

Tensor3 unmix_fcls(const Tensor3& cube, const Eigen::MatrixXd& m0) {
    if (m0.rows() != cube.dim(2)) throw DimensionError("unmix_fcls: band count mismatch");
    const Index n = cube.dim(0) * cube.dim(1);
    Tensor3 out({cube.dim(0), cube.dim(1), m0.cols()});
    for (Index p = 0; p < n; ++p) pixel_fiber(out, p) = fcls_solve(m0, pixel_fiber(cube, p));
    return out;
}

SclsMaps unmix_scls(const Tensor3& cube, const Eigen::MatrixXd& m0) {
    if (m0.rows() != cube.dim(2)) throw DimensionError("unmix_scls: band count mismatch");
    const Index n = cube.dim(0) * cube.dim(1);
    SclsMaps out{Tensor3({cube.dim(0), cube.dim(1), m0.cols()}), Tensor2({cube.dim(0), cube.dim(1)})};
    for (Index p = 0; p < n; ++p) {
        auto res = scls_solve(m0, pixel_fiber(cube, p));
        pixel_fiber(out.abundances, p) = res.alpha;
        out.scale.data()[static_cast<std::size_t>(p)] = res.scale;
    }
    return out;
}

UnmixResult ultra_v(const Tensor3& cube, const Eigen::MatrixXd& m0, const UnmixConfig& cfg) {
    if (m0.rows() != cube.dim(2)) throw DimensionError("ultra_v: band count mismatch");
    if (!m0.allFinite() || m0.minCoeff() < 0.0) {
        throw SpecError("ultra_v: initial endmembers must be finite and nonnegative");
    }
    return ultra_v(cube, replicate_endmembers(m0, cube.dim(0), cube.dim(1)), cfg);
}

UnmixResult ultra_v(const Tensor3& cube, const Tensor4& m0, const UnmixConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    if (!cube.all_finite()) throw NumericError("ultra_v: cube has non-finite entries");
    if (!m0.all_finite()) throw NumericError("ultra_v: initial endmembers are non-finite");
    if (cfg.lambda_a < 0.0 || cfg.lambda_m < 0.0) throw SpecError("ultra_v: lambdas must be >= 0");
    if (cfg.max_outer_iters < 1) throw SpecError("ultra_v: max_outer_iters must be >= 1");
    const Shape s = shape_of(cube, m0);
    if (s.members < 1) throw SpecError("ultra_v: need at least one endmember");
    for (double v : m0.data()) {
        if (v < 0.0) throw SpecError("ultra_v: initial endmembers must be nonnegative");
    }

    // A(0): SCLS against the pixelwise initial endmembers.
    Tensor3 a({s.n1, s.n2, s.members});
    for (Index p = 0; p < s.pixels(); ++p) {
        pixel_fiber(a, p) = scls_solve(slab(m0, p, s), pixel_fiber(cube, p)).alpha;
    }
    Tensor4 m = m0;

    UnmixResult res;
    res.rank_q = cfg.rank_q_override ? *cfg.rank_q_override : estimate_rank(a, cfg.epsilon).overall;
    res.rank_p = cfg.rank_p_override ? *cfg.rank_p_override : estimate_rank(m, cfg.epsilon).overall;
    res.rank_q = std::clamp<Index>(res.rank_q, 1, feasible_rank_cap(a));
    res.rank_p = std::clamp<Index>(res.rank_p, 1, feasible_rank_cap(m));

    const AlsOptions als_p = seeded(cfg.als_p, cfg.seed * 2 + 1);
    const AlsOptions als_q = seeded(cfg.als, cfg.seed * 2 + 2);

    Tensor4 p(m.dims());
    Tensor3 q(a.dims());
    std::optional<CpdFactorization<4>> p_fact;
    std::optional<CpdFactorization<3>> q_fact;

    for (int it = 1; it <= cfg.max_outer_iters; ++it) {
        IterationRecord rec;
        rec.before = cost(cube, a, m, p, q, cfg);

        auto pu = update_p(m, res.rank_p, als_p, p_fact ? &*p_fact : nullptr);
        p = std::move(pu.tensor);
        p_fact = std::move(pu.factorization);
        rec.p_residuals = p_fact->residual_trace;
        rec.after_p = cost(cube, a, m, p, q, cfg);

        auto qu = update_q(a, res.rank_q, als_q, q_fact ? &*q_fact : nullptr);
        q = std::move(qu.tensor);
        q_fact = std::move(qu.factorization);
        rec.q_residuals = q_fact->residual_trace;
        rec.after_q = cost(cube, a, m, p, q, cfg);

        if (cfg.lambda_m > 0.0) {
            try {
                m = update_m(cube, a, p, cfg.lambda_m);
            } catch (const Error& e) {
                throw NumericError("ultra_v iteration " + std::to_string(it) + ": " + e.what());
            }
        }
        rec.after_m = cost(cube, a, m, p, q, cfg);

        try {
            a = update_a(cube, m, q, cfg.lambda_a);
        } catch (const ConvergenceError& e) {
            throw ConvergenceError("ultra_v iteration " + std::to_string(it) + ": " + e.what(),
                                   e.best_iterate());
        }
        rec.after_a = cost(cube, a, m, p, q, cfg);

        res.cost_trace.push_back(rec.after_a);
        res.history.push_back(std::move(rec));
        res.iters = it;

        if (res.cost_trace.size() >= 2) {
            const double prev = res.cost_trace[res.cost_trace.size() - 2];
            const double cur = res.cost_trace.back();
            if (std::abs(prev - cur) <= cfg.outer_tol * std::max(std::abs(prev), 1e-300)) break;
        }
    }

    res.abundances = std::move(a);
    res.endmembers = std::move(m);
    res.q_hat = std::move(q);
    res.p_hat = std::move(p);
    res.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

} // namespace ultrav
