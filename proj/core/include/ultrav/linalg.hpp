#pragma once

#include <Eigen/Core>

#include "ultrav/errors.hpp"

namespace ultrav {

using Index = Eigen::Index;

struct SvdResult {
    /// Non-increasing, nonnegative.
    Eigen::VectorXd singular_values;
};

/// Singular values of `m` (no singular vectors). Throws NumericError on non-finite input.
[[nodiscard]] SvdResult singular_values(const Eigen::MatrixXd& m);

/// Active-set (Lawson-Hanson) solution of
///   min ||a x - b||^2 + ridge ||x - prior||^2   s.t. x >= 0.
/// An empty `prior` means the zero vector. Throws ConvergenceError (carrying
/// the best iterate) if the iteration cap is exceeded.
[[nodiscard]] Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                   double ridge = 0.0, const Eigen::VectorXd& prior = {});

/// Regularized fully constrained least squares for one pixel:
///   min ||r - m alpha||^2 + lambda ||alpha - q||^2   s.t. alpha >= 0, 1'alpha = 1.
/// Primal active-set method; exact termination for the small R used in unmixing.
/// With lambda = 0 this is plain FCLS and `q` is ignored (it may be empty).
[[nodiscard]] Eigen::VectorXd fcls_solve(const Eigen::MatrixXd& m, const Eigen::VectorXd& r,
                                         double lambda = 0.0, const Eigen::VectorXd& q = {});

struct SclsResult {
    Eigen::VectorXd alpha;
    double scale = 0.0;
};

/// Scaled constrained least squares: nonnegative fit, then normalize onto the
/// simplex. The normalizer is returned as the pixel scale; a zero fit maps to
/// uniform abundances with scale 0.
[[nodiscard]] SclsResult scls_solve(const Eigen::MatrixXd& m, const Eigen::VectorXd& r);

/// Euclidean projection onto the probability simplex {x >= 0, 1'x = 1}.
[[nodiscard]] Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

} // namespace ultrav
