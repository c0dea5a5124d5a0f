#pragma once

#include "setobs/types.hpp"

#include <string>
#include <utility>
#include <vector>

/// Small dense semidefinite programs in inequality form:
///
///   minimize    c^T x
///   subject to  F_b(x) = F_b0 + sum_j x_j F_bj  >= 0   for every block b
///               |x_j| <= box
///
/// solved by a primal log-barrier interior-point method with a phase-I
/// slack problem for the initial strictly feasible point. Intended for the
/// tens-of-variables problems arising in observer synthesis.
namespace setobs::sdp {

struct LmiBlock {
    Matrix constant;
    std::vector<std::pair<Index, Matrix>> terms;  ///< (variable index, coefficient matrix)

    Index size() const { return constant.rows(); }
    Matrix evaluate(const Vector& x) const;
};

struct Problem {
    Index num_vars = 0;
    Vector objective;
    std::vector<LmiBlock> blocks;
    double box = 1e6;
};

enum class Status {
    optimal,
    feasible,
    infeasible,
    iteration_limit,
    numerical_failure,
};

std::string to_string(Status status);

struct Options {
    double tolerance = 1e-9;       ///< duality-gap target, relative to max(1, |c^T x|)
    double feasibility_tol = 1e-9;  ///< phase-I slack must drop below -feasibility_tol
    double barrier_growth = 50.0;
    int max_newton_steps = 200;     ///< per centering step
    int max_outer_iterations = 80;
};

struct Result {
    Status status = Status::numerical_failure;
    Vector x;
    double objective = 0.0;
    double min_eigenvalue = 0.0;  ///< smallest eigenvalue over all blocks at x
    double phase1_slack = 0.0;    ///< final phase-I value (negative when strictly feasible)
    double duality_gap = 0.0;     ///< nu / t at the last centred point (infinite before the first)
    int newton_steps = 0;
};

/// Runs phase I from x0, then the barrier path. Status is `infeasible`
/// when phase I converges without finding a strictly feasible point.
Result minimize(const Problem& problem, const Vector& x0, const Options& options = {});

/// Phase I only: stops at the first strictly feasible point.
Result find_feasible(const Problem& problem, const Vector& x0, const Options& options = {});

double min_block_eigenvalue(const Problem& problem, const Vector& x);

}  // namespace setobs::sdp
