#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "ultrav/metrics.hpp"
#include "ultrav/synth.hpp"
#include "ultrav/unmixing.hpp"

using namespace ultrav;

namespace {

SceneTruth small_scene(const Variability& v, double snr_db, std::uint64_t seed, Index n = 8,
                       Index bands = 20) {
    SceneSpec spec;
    spec.n1 = n;
    spec.n2 = n;
    spec.library = synthetic_library(bands, 3, 5);
    spec.variability = v;
    spec.snr_db = snr_db;
    spec.seed = seed;
    return generate_scene(spec);
}

Tensor3 random_abundances(Index n1, Index n2, Index r, std::mt19937_64& rng) {
    Tensor3 a({n1, n2, r});
    for (Index i = 0; i < n1; ++i) {
        for (Index j = 0; j < n2; ++j) {
            const Eigen::VectorXd x = oracle::simplex_projection(oracle::random_matrix(r, 1, rng).col(0));
            for (Index k = 0; k < r; ++k) a(i, j, k) = x(k);
        }
    }
    return a;
}

Tensor4 random_endmembers(Index n1, Index n2, Index l, Index r, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Tensor4 m({n1, n2, l, r});
    for (double& v : m.data()) v = u(rng);
    return m;
}

void expect_feasible(const Tensor3& a, const Tensor4& m) {
    for (Index i = 0; i < a.dim(0); ++i) {
        for (Index j = 0; j < a.dim(1); ++j) {
            double s = 0.0;
            for (Index k = 0; k < a.dim(2); ++k) {
                EXPECT_GE(a(i, j, k), -1e-12);
                s += a(i, j, k);
            }
            EXPECT_NEAR(s, 1.0, 1e-6);
        }
    }
    for (double v : m.data()) EXPECT_GE(v, 0.0);
}

} // namespace

TEST(Cost, MatchesLoopOracle) {
    std::mt19937_64 rng(1);
    const Index n1 = 3, n2 = 4, l = 5, r = 2;
    const Tensor3 cube = oracle::random_tensor3(n1, n2, l, rng);
    const Tensor3 a = random_abundances(n1, n2, r, rng);
    const Tensor3 q = random_abundances(n1, n2, r, rng);
    const Tensor4 m = random_endmembers(n1, n2, l, r, rng);
    const Tensor4 p = random_endmembers(n1, n2, l, r, rng);
    UnmixConfig cfg;
    cfg.lambda_a = 0.7;
    cfg.lambda_m = 0.3;
    double fit = 0.0, dm = 0.0, da = 0.0;
    for (Index i = 0; i < n1; ++i) {
        for (Index j = 0; j < n2; ++j) {
            for (Index b = 0; b < l; ++b) {
                double y = 0.0;
                for (Index k = 0; k < r; ++k) {
                    y += m(i, j, b, k) * a(i, j, k);
                    dm += (m(i, j, b, k) - p(i, j, b, k)) * (m(i, j, b, k) - p(i, j, b, k));
                }
                fit += (cube(i, j, b) - y) * (cube(i, j, b) - y);
            }
            for (Index k = 0; k < r; ++k) da += (a(i, j, k) - q(i, j, k)) * (a(i, j, k) - q(i, j, k));
        }
    }
    EXPECT_NEAR(data_fit(cube, a, m), 0.5 * fit, 1e-12);
    EXPECT_NEAR(cost(cube, a, m, p, q, cfg), 0.5 * fit + 0.15 * dm + 0.35 * da, 1e-12);

    // Linear in each lambda.
    UnmixConfig c2 = cfg;
    c2.lambda_a *= 2.0;
    EXPECT_NEAR(cost(cube, a, m, p, q, c2) - cost(cube, a, m, p, q, cfg), 0.35 * da, 1e-12);
}

TEST(UpdateA, MatchesPerPixelOracle) {
    std::mt19937_64 rng(2);
    const Index n1 = 2, n2 = 3, l = 6, r = 3;
    const Tensor3 cube = oracle::random_tensor3(n1, n2, l, rng);
    const Tensor4 m = random_endmembers(n1, n2, l, r, rng);
    const Tensor3 q = random_abundances(n1, n2, r, rng);
    for (double lambda : {0.0, 0.5}) {
        const Tensor3 a = update_a(cube, m, q, lambda);
        for (Index i = 0; i < n1; ++i) {
            for (Index j = 0; j < n2; ++j) {
                Eigen::MatrixXd mn(l, r);
                Eigen::VectorXd rn(l), qn(r);
                for (Index b = 0; b < l; ++b) {
                    rn(b) = cube(i, j, b);
                    for (Index k = 0; k < r; ++k) mn(b, k) = m(i, j, b, k);
                }
                for (Index k = 0; k < r; ++k) qn(k) = q(i, j, k);
                const Eigen::VectorXd o = oracle::fcls(mn, rn, lambda, qn);
                for (Index k = 0; k < r; ++k) EXPECT_NEAR(a(i, j, k), o(k), 1e-9);
            }
        }
    }
}

TEST(UpdateA, PurePixelAndLargeLambda) {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd m0 = oracle::random_matrix(10, 3, rng, 0.1, 1.0);
    const Tensor4 m = replicate_endmembers(m0, 1, 1);
    Tensor3 cube({1, 1, 10});
    for (Index b = 0; b < 10; ++b) cube(Index{0}, Index{0}, b) = m0(b, 1);
    const Tensor3 q({1, 1, 3}, 0.0);
    const Tensor3 a = update_a(cube, m, q, 0.0);
    EXPECT_NEAR(a(Index{0}, Index{0}, Index{1}), 1.0, 1e-9);

    Tensor3 q2({1, 1, 3});
    q2(Index{0}, Index{0}, Index{0}) = 0.9;
    q2(Index{0}, Index{0}, Index{2}) = 0.6;
    const Tensor3 a2 = update_a(cube, m, q2, 1e9);
    const Eigen::VectorXd proj = oracle::simplex_projection(Eigen::Vector3d(0.9, 0.0, 0.6));
    for (Index k = 0; k < 3; ++k) EXPECT_NEAR(a2(Index{0}, Index{0}, k), proj(k), 1e-4);
}

TEST(UpdateA, DoesNotIncreaseCost) {
    std::mt19937_64 rng(4);
    const Tensor3 cube = oracle::random_tensor3(3, 3, 8, rng);
    const Tensor4 m = random_endmembers(3, 3, 8, 3, rng);
    const Tensor4 p = random_endmembers(3, 3, 8, 3, rng);
    const Tensor3 q = random_abundances(3, 3, 3, rng);
    const Tensor3 a0 = random_abundances(3, 3, 3, rng);
    UnmixConfig cfg;
    cfg.lambda_a = 0.3;
    const Tensor3 a1 = update_a(cube, m, q, cfg.lambda_a);
    EXPECT_LE(cost(cube, a1, m, p, q, cfg), cost(cube, a0, m, p, q, cfg) + 1e-12);
}

TEST(UpdateM, ZeroAbundanceReturnsPrior) {
    std::mt19937_64 rng(5);
    const Tensor3 cube = oracle::random_tensor3(2, 2, 5, rng);
    const Tensor4 p = random_endmembers(2, 2, 5, 3, rng);
    const Tensor4 m = update_m(cube, Tensor3({2, 2, 3}), p, 0.4);
    EXPECT_EQ(m, p);
}

TEST(UpdateM, LargeLambdaReturnsClippedPrior) {
    std::mt19937_64 rng(6);
    const Tensor3 cube = oracle::random_tensor3(2, 2, 5, rng);
    const Tensor3 a = random_abundances(2, 2, 3, rng);
    const Tensor4 p = 2.0 * random_endmembers(2, 2, 5, 3, rng) - Tensor4({2, 2, 5, 3}, 1.0);
    const Tensor4 m = update_m(cube, a, p, 1e12);
    for (Index i = 0; i < p.size(); ++i) {
        EXPECT_NEAR(m.data()[static_cast<std::size_t>(i)], std::max(0.0, p.data()[static_cast<std::size_t>(i)]), 1e-9);
    }
}

TEST(UpdateM, MatchesVectorizedLeastSquares) {
    // Per pixel, min 1/2||r - X a||^2 + l/2||X - P||^2 over X written as a
    // stacked least-squares problem in vec(X), solved by QR, then clipped.
    std::mt19937_64 rng(7);
    const Index l = 4, r = 3;
    const Tensor3 cube = oracle::random_tensor3(2, 3, l, rng);
    const Tensor3 a = random_abundances(2, 3, r, rng);
    const Tensor4 p = random_endmembers(2, 3, l, r, rng);
    const double lambda = 0.35;
    const Tensor4 m = update_m(cube, a, p, lambda);
    for (Index i = 0; i < 2; ++i) {
        for (Index j = 0; j < 3; ++j) {
            Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(l + l * r, l * r);
            Eigen::VectorXd rhs(l + l * r);
            for (Index b = 0; b < l; ++b) {
                rhs(b) = cube(i, j, b);
                for (Index k = 0; k < r; ++k) sys(b, b * r + k) = a(i, j, k);
            }
            for (Index b = 0; b < l; ++b) {
                for (Index k = 0; k < r; ++k) {
                    sys(l + b * r + k, b * r + k) = std::sqrt(lambda);
                    rhs(l + b * r + k) = std::sqrt(lambda) * p(i, j, b, k);
                }
            }
            const Eigen::VectorXd x = sys.colPivHouseholderQr().solve(rhs);
            for (Index b = 0; b < l; ++b) {
                for (Index k = 0; k < r; ++k) EXPECT_NEAR(m(i, j, b, k), std::max(0.0, x(b * r + k)), 1e-10);
            }
        }
    }
}

TEST(UpdateM, LambdaZeroNeedsInvertibleGram) {
    std::mt19937_64 rng(8);
    const Tensor3 cube = oracle::random_tensor3(1, 2, 4, rng);
    const Tensor3 a = random_abundances(1, 2, 2, rng);
    EXPECT_THROW((void)update_m(cube, a, random_endmembers(1, 2, 4, 2, rng), 0.0), NumericError);
    EXPECT_THROW((void)update_m(cube, a, random_endmembers(1, 2, 4, 2, rng), -1.0), SpecError);
    // R = 1 with a != 0 is solvable.
    const Tensor3 one({1, 2, 1}, 1.0);
    Tensor3 pos = cube;
    for (double& v : pos.data()) v = std::abs(v);
    const Tensor4 m = update_m(pos, one, Tensor4({1, 2, 4, 1}), 0.0);
    for (Index b = 0; b < 4; ++b) EXPECT_EQ(m(Index{0}, Index{1}, b, Index{0}), pos(Index{0}, Index{1}, b));
}

TEST(UpdatePQ, ExactForLowRankInputs) {
    std::mt19937_64 rng(9);
    const Eigen::MatrixXd m0 = oracle::random_matrix(6, 3, rng, 0.1, 1.0);
    const Tensor4 m = replicate_endmembers(m0, 4, 5);
    AlsOptions als;
    als.max_sweeps = 300;
    als.tol = 1e-15;
    als.restarts = 3;
    const auto p = update_p(m, 3, als);
    EXPECT_LT(std::sqrt(squared_distance(p.tensor, m)) / m.frobenius_norm(), 1e-6);

    const Eigen::Vector3d a0(0.2, 0.5, 0.3);
    Tensor3 a({4, 5, 3});
    for (Index i = 0; i < 4; ++i) {
        for (Index j = 0; j < 5; ++j) {
            for (Index k = 0; k < 3; ++k) a(i, j, k) = a0(k);
        }
    }
    const auto q = update_q(a, 1, als);
    EXPECT_LT(std::sqrt(squared_distance(q.tensor, a)), 1e-10);
    EXPECT_EQ(cpd_reconstruct(q.factorization), q.tensor);
}

TEST(UltraV, NoiselessFixedEndmembersRecoverTruth) {
    const SceneTruth t = small_scene(NoVariability{}, kNoiseless, 1);
    UnmixConfig cfg;
    cfg.lambda_a = 0.0;
    cfg.lambda_m = 0.0;
    cfg.max_outer_iters = 3;
    const UnmixResult r = ultra_v(t.cube, synthetic_library(20, 3, 5), cfg);
    EXPECT_LT(mse(r.abundances, t.abundances), 1e-10);
    EXPECT_EQ(r.endmembers, t.endmembers);
}

TEST(UltraV, ReducesToFclsWithoutRegularization) {
    const SceneTruth t = small_scene(NoVariability{}, 40.0, 2);
    const Eigen::MatrixXd lib = synthetic_library(20, 3, 5);
    UnmixConfig cfg;
    cfg.lambda_a = 0.0;
    cfg.lambda_m = 0.0;
    cfg.max_outer_iters = 1;
    const UnmixResult r = ultra_v(t.cube, lib, cfg);
    const Tensor3 f = unmix_fcls(t.cube, lib);
    for (Index i = 0; i < f.size(); ++i) {
        EXPECT_NEAR(r.abundances.data()[static_cast<std::size_t>(i)], f.data()[static_cast<std::size_t>(i)], 1e-8);
    }
    EXPECT_EQ(r.iters, 1);
}

TEST(UltraV, DescentFeasibilityAndDeterminism) {
    const SceneTruth t = small_scene(MultiplicativeVariability{0.2}, 30.0, 3, 10, 24);
    const Eigen::MatrixXd lib = synthetic_library(24, 3, 5);
    UnmixConfig cfg;
    cfg.max_outer_iters = 8;
    cfg.outer_tol = 1e-9;
    cfg.seed = 4;
    const UnmixResult r = ultra_v(t.cube, lib, cfg);
    ASSERT_EQ(r.history.size(), r.cost_trace.size());
    for (std::size_t it = 0; it < r.history.size(); ++it) {
        const auto& h = r.history[it];
        EXPECT_LE(h.after_q, h.after_p + 1e-10 * std::abs(h.after_p)) << "iteration " << it + 1;
        EXPECT_LE(h.after_a, h.after_m + 1e-10 * std::abs(h.after_m)) << "iteration " << it + 1;
        for (const auto* trace : {&h.p_residuals, &h.q_residuals}) {
            for (std::size_t s = 1; s < trace->size(); ++s) {
                EXPECT_LE((*trace)[s], (*trace)[s - 1] * (1.0 + 1e-10) + 1e-14);
            }
        }
        EXPECT_EQ(h.after_a, r.cost_trace[it]);
    }
    EXPECT_LE(r.cost_trace.back(), r.cost_trace.front());
    expect_feasible(r.abundances, r.endmembers);

    const UnmixResult again = ultra_v(t.cube, lib, cfg);
    EXPECT_EQ(r.cost_trace, again.cost_trace);
    EXPECT_EQ(r.abundances, again.abundances);
}

TEST(UltraV, RankOverridesAndErrors) {
    const SceneTruth t = small_scene(NoVariability{}, 30.0, 5);
    const Eigen::MatrixXd lib = synthetic_library(20, 3, 5);
    UnmixConfig cfg;
    cfg.max_outer_iters = 2;
    cfg.rank_q_override = 2;
    cfg.rank_p_override = 5;
    const UnmixResult r = ultra_v(t.cube, lib, cfg);
    EXPECT_EQ(r.rank_q, 2);
    EXPECT_EQ(r.rank_p, 5);
    EXPECT_EQ(r.q_hat.dims(), r.abundances.dims());

    UnmixConfig bad = cfg;
    bad.lambda_a = -1.0;
    EXPECT_THROW((void)ultra_v(t.cube, lib, bad), SpecError);
    EXPECT_THROW((void)ultra_v(t.cube, Eigen::MatrixXd(-lib), cfg), SpecError);
    EXPECT_THROW((void)ultra_v(t.cube, synthetic_library(19, 3, 5), cfg), DimensionError);
}

TEST(Baselines, SclsScaledPurePixelAndFclsAgreeOnCleanData) {
    const Eigen::MatrixXd lib = synthetic_library(20, 3, 5);
    Tensor3 cube({1, 2, 20});
    for (Index b = 0; b < 20; ++b) {
        cube(Index{0}, Index{0}, b) = 1.5 * lib(b, 2);
        cube(Index{0}, Index{1}, b) = 0.5 * lib(b, 0) + 0.5 * lib(b, 1);
    }
    const SclsMaps s = unmix_scls(cube, lib);
    EXPECT_NEAR(s.abundances(Index{0}, Index{0}, Index{2}), 1.0, 1e-10);
    EXPECT_NEAR(s.scale(Index{0}, Index{0}), 1.5, 1e-10);

    const SceneTruth t = small_scene(NoVariability{}, kNoiseless, 6);
    const Tensor3 f = unmix_fcls(t.cube, lib);
    const SclsMaps c = unmix_scls(t.cube, lib);
    EXPECT_LT(mse(f, c.abundances), 1e-18);
    EXPECT_LT(mse(f, t.abundances), 1e-18);
    for (double v : c.scale.data()) EXPECT_NEAR(v, 1.0, 1e-8);
}
