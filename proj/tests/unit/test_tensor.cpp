#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "ultrav/tensor.hpp"

using namespace ultrav;

namespace {

Tensor3 iota3(Index a, Index b, Index c) {
    Tensor3 t({a, b, c});
    double v = 1.0;
    for (double& x : t.data()) x = v++;
    return t;
}

} // namespace

TEST(Tensor, RowMajorLayoutThirdIndexFastest) {
    const Tensor3 t = iota3(2, 3, 4);
    for (Index i = 0; i < 2; ++i) {
        for (Index j = 0; j < 3; ++j) {
            for (Index k = 0; k < 4; ++k) {
                EXPECT_EQ(t(i, j, k), static_cast<double>((i * 3 + j) * 4 + k + 1));
            }
        }
    }
    EXPECT_EQ(t.stride(0), 12);
    EXPECT_EQ(t.stride(1), 4);
    EXPECT_EQ(t.stride(2), 1);
}

TEST(Tensor, ConstructorRejectsBadData) {
    EXPECT_THROW(Tensor3({2, 2, 2}, std::vector<double>(7, 0.0)), DimensionError);
    EXPECT_THROW(Tensor3({2, 0, 2}), DimensionError);
    std::vector<double> d(8, 1.0);
    d[3] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(Tensor3({2, 2, 2}, d), NumericError);
    d[3] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(Tensor3({2, 2, 2}, d), NumericError);
}

TEST(Tensor, AtChecksBounds) {
    const Tensor3 t = iota3(2, 2, 2);
    EXPECT_EQ(t.at({1, 0, 1}), 6.0);
    EXPECT_THROW((void)t.at({2, 0, 0}), DimensionError);
    EXPECT_THROW((void)t.at({0, -1, 0}), DimensionError);
}

TEST(Fiber, MatchesLoopIndexing) {
    const Tensor3 t = iota3(2, 2, 2);
    // 0-based (0,0) here is the first pixel, third-mode fiber.
    EXPECT_EQ(fiber(t, 2, {0, 0}), (Eigen::VectorXd(2) << 1, 2).finished());
    std::mt19937_64 rng(3);
    const Tensor3 r = oracle::random_tensor3(3, 4, 5, rng);
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 4; ++j) {
            const Eigen::VectorXd f = fiber(r, 2, {i, j});
            for (Index k = 0; k < 5; ++k) EXPECT_EQ(f(k), r(i, j, k));
        }
    }
    const Eigen::VectorXd f1 = fiber(r, 1, {2, 3});
    for (Index j = 0; j < 4; ++j) EXPECT_EQ(f1(j), r(2, j, 3));
    const Eigen::VectorXd f0 = fiber(r, 0, {1, 4});
    for (Index i = 0; i < 3; ++i) EXPECT_EQ(f0(i), r(i, 1, 4));
}

TEST(Fiber, ConstantAndDegenerate) {
    const Tensor3 c({3, 2, 4}, 2.5);
    EXPECT_TRUE(fiber(c, 2, {1, 1}).isApprox(Eigen::VectorXd::Constant(4, 2.5)));
    const Tensor3 t = iota3(1, 1, 6);
    EXPECT_EQ(fiber(t, 2, {0, 0}), t.vec());
    EXPECT_THROW((void)fiber(t, 2, {1, 0}), DimensionError);
    EXPECT_THROW((void)fiber(t, 3, {0, 0}), DimensionError);
}

TEST(Matricize, MatchesLoopOracleAndPreservesNorm) {
    std::mt19937_64 rng(5);
    const Tensor3 t = oracle::random_tensor3(2, 3, 4, rng);
    for (int mode = 0; mode < 3; ++mode) {
        const Matricization m = matricize(t, static_cast<std::size_t>(mode));
        EXPECT_EQ(m.matrix, oracle::unfold3(t, mode)) << "mode " << mode;
        EXPECT_NEAR(m.matrix.norm(), t.frobenius_norm(), 1e-12 * t.frobenius_norm());
    }
    EXPECT_EQ(matricize(t, 1).rows(), 3);
    EXPECT_EQ(matricize(t, 1).cols(), 8);
}

TEST(Matricize, RankOneTensorHasRankOneUnfoldings) {
    std::mt19937_64 rng(7);
    const std::array<Eigen::VectorXd, 3> v{oracle::random_matrix(4, 1, rng).col(0),
                                           oracle::random_matrix(5, 1, rng).col(0),
                                           oracle::random_matrix(6, 1, rng).col(0)};
    const Tensor3 t = outer_product(v);
    for (std::size_t mode = 0; mode < 3; ++mode) {
        const Eigen::VectorXd s = oracle::gram_singular_values(matricize(t, mode).matrix);
        EXPECT_GT(s(0), 1e-3);
        for (Index j = 1; j < s.size(); ++j) EXPECT_LT(s(j), 1e-7 * s(0));
    }
}

TEST(OuterProduct, MatchesProductOfEntries) {
    const std::array<Eigen::VectorXd, 4> v{(Eigen::VectorXd(2) << 1, 2).finished(),
                                           (Eigen::VectorXd(3) << 3, -1, 0.5).finished(),
                                           (Eigen::VectorXd(1) << 7).finished(),
                                           (Eigen::VectorXd(2) << -2, 4).finished()};
    const Tensor4 t = outer_product(v);
    for (Index a = 0; a < 2; ++a) {
        for (Index b = 0; b < 3; ++b) {
            for (Index d = 0; d < 2; ++d) EXPECT_EQ(t(a, b, Index{0}, d), v[0](a) * v[1](b) * 7.0 * v[3](d));
        }
    }
}

TEST(ModeProduct, MatchesLoopOracle) {
    std::mt19937_64 rng(11);
    const Tensor3 t = oracle::random_tensor3(3, 4, 5, rng);
    for (std::size_t mode = 0; mode < 3; ++mode) {
        const Eigen::MatrixXd b = oracle::random_matrix(2, t.dim(mode), rng);
        const Tensor3 y = mode_product(t, mode, b);
        auto dims = t.dims();
        dims[mode] = 2;
        ASSERT_EQ(y.dims(), dims);
        for (Index i = 0; i < dims[0]; ++i) {
            for (Index j = 0; j < dims[1]; ++j) {
                for (Index k = 0; k < dims[2]; ++k) {
                    double s = 0.0;
                    for (Index c = 0; c < t.dim(mode); ++c) {
                        const double tv = mode == 0 ? t(c, j, k) : mode == 1 ? t(i, c, k) : t(i, j, c);
                        const Index row = mode == 0 ? i : mode == 1 ? j : k;
                        s += b(row, c) * tv;
                    }
                    EXPECT_NEAR(y(i, j, k), s, 1e-12);
                }
            }
        }
    }
    EXPECT_THROW((void)mode_product(t, 1, Eigen::MatrixXd::Ones(2, 3)), DimensionError);
}

TEST(ModeProduct, IdentityIsNoOp) {
    std::mt19937_64 rng(13);
    const Tensor4 t = oracle::random_tensor4(2, 3, 4, 2, rng);
    for (std::size_t mode = 0; mode < 4; ++mode) {
        EXPECT_EQ(mode_product(t, mode, Eigen::MatrixXd::Identity(t.dim(mode), t.dim(mode))), t);
    }
}

TEST(MultilinearProduct, DiagonalCoreGivesCpSum) {
    std::mt19937_64 rng(17);
    const Eigen::VectorXd w = (Eigen::VectorXd(2) << 2.0, -0.5).finished();
    const std::array<Eigen::MatrixXd, 3> f{oracle::random_matrix(3, 2, rng), oracle::random_matrix(4, 2, rng),
                                           oracle::random_matrix(2, 2, rng)};
    const Tensor3 t = multilinear_product(diagonal_tensor<3>(w), f);
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 4; ++j) {
            for (Index k = 0; k < 2; ++k) {
                const double s = w(0) * f[0](i, 0) * f[1](j, 0) * f[2](k, 0) +
                                 w(1) * f[0](i, 1) * f[1](j, 1) * f[2](k, 1);
                EXPECT_NEAR(t(i, j, k), s, 1e-12);
            }
        }
    }
}

TEST(ContractedProduct, OnesSumsFibers) {
    std::mt19937_64 rng(19);
    const Tensor3 t = oracle::random_tensor3(3, 4, 5, rng);
    const Tensor2 s = contracted_product(t, 2, Eigen::VectorXd::Ones(5));
    ASSERT_EQ(s.dims(), (Tensor2::Dims{3, 4}));
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (Index k = 0; k < 5; ++k) acc += t(i, j, k);
            EXPECT_NEAR(s(i, j), acc, 1e-12);
        }
    }
    const Eigen::VectorXd v = oracle::random_matrix(4, 1, rng).col(0);
    const Tensor2 s1 = contracted_product(t, 1, v);
    ASSERT_EQ(s1.dims(), (Tensor2::Dims{3, 5}));
    for (Index i = 0; i < 3; ++i) {
        for (Index k = 0; k < 5; ++k) {
            double acc = 0.0;
            for (Index j = 0; j < 4; ++j) acc += t(i, j, k) * v(j);
            EXPECT_NEAR(s1(i, k), acc, 1e-12);
        }
    }
}

TEST(DiagonalTensor, SuperdiagonalOnly) {
    const Tensor4 d = diagonal_tensor<4>((Eigen::VectorXd(3) << 1, 2, 3).finished());
    EXPECT_EQ(d(Index{1}, Index{1}, Index{1}, Index{1}), 2.0);
    EXPECT_EQ(d(Index{1}, Index{1}, Index{0}, Index{1}), 0.0);
    EXPECT_DOUBLE_EQ(d.squared_norm(), 14.0);
}

TEST(TensorArithmetic, DistanceAndScaling) {
    const Tensor3 a = iota3(2, 2, 2);
    const Tensor3 b = 2.0 * a;
    EXPECT_DOUBLE_EQ(squared_distance(a, b), a.squared_norm());
    EXPECT_EQ((b - a), a);
    EXPECT_THROW((void)squared_distance(a, iota3(2, 2, 3)), DimensionError);
}
