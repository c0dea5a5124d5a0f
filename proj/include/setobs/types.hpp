#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace setobs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kDefaultRankTol = 1e-10;
inline constexpr double kSimplexTol = 1e-12;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent dimensions or malformed structure.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// rank(C2 G2) != p - p_H: no bounded input/state estimate exists.
class BoundednessError : public Error {
public:
    using Error::Error;
};

class InvalidWeightsError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

/// The semidefinite program has no strictly feasible point.
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, std::string status)
        : Error(what), status_(std::move(status)) {}
    const std::string& status() const noexcept { return status_; }

private:
    std::string status_;
};

/// No gain in the searched range certifies contracting radii.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace setobs
