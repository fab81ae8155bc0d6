#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace ultrav {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes or indices that do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Non-finite input or a numerically singular system.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Input that is well-formed but carries no information (e.g. an all-zero tensor).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Invalid scene or configuration parameters.
class SpecError : public Error {
public:
    using Error::Error;
};

/// File-system or format failures; the message always names the path.
class IoError : public Error {
public:
    using Error::Error;
};

/// An iterative solver hit its iteration cap. Carries the best iterate seen.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, Eigen::VectorXd best)
        : Error(what), best_(std::move(best)) {}

    [[nodiscard]] const Eigen::VectorXd& best_iterate() const noexcept { return best_; }

private:
    Eigen::VectorXd best_;
};

} // namespace ultrav
