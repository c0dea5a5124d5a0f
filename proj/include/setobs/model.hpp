#pragma once

#include "setobs/types.hpp"

#include <string>
#include <vector>

namespace setobs {

struct Dimensions {
    Index N = 0;  ///< vertex count
    Index n = 0;  ///< state
    Index m = 0;  ///< known input
    Index p = 0;  ///< unknown (attack) input
    Index l = 0;  ///< output
};

/// Polytopic LPV plant with bounded noise and an unknown input channel:
///
///   x+ = sum_i lambda_i (A[i] x + B[i] u + w_i) + G d
///   y  = C x + sum_i lambda_i (D[i] u + v_i) + H d
///
/// Each (A[i], B[i], C, D[i], G, H) is one LTI constituent system.
struct LpvModel {
    Dimensions dims;
    std::vector<Matrix> A;  ///< N matrices, n x n
    std::vector<Matrix> B;  ///< N matrices, n x m
    Matrix C;               ///< l x n
    std::vector<Matrix> D;  ///< N matrices, l x m
    Matrix G;               ///< n x p
    Matrix H;               ///< l x p
    double eta_w = 0.0;     ///< bound on ||w_i||
    double eta_v = 0.0;     ///< bound on ||v_i||
    Vector x0_hat;
    double delta0_x = 0.0;  ///< bound on ||x0 - x0_hat||
};

struct ValidationReport {
    struct Check {
        std::string name;
        bool passed = false;
        std::string detail;
    };
    std::vector<Check> checks;
    /// Singular values of [G; H], for judging how marginal the rank test is.
    Vector stacked_singular_values;

    bool accepted() const;
};

/// Throws StructuralError naming the first matrix whose shape disagrees
/// with model.dims; otherwise reports each modelling assumption.
ValidationReport validate_model(const LpvModel& model, double rank_tol = kDefaultRankTol);

/// Convex-combination weights for one time step.
class WeightVector {
public:
    /// Accepts entries in [0, 1] whose sum is within tol of one and
    /// renormalizes; anything else throws InvalidWeightsError.
    static WeightVector from(const Vector& lambda, double tol = kSimplexTol);
    static WeightVector vertex(Index N, Index j);

    const Vector& values() const noexcept { return lambda_; }
    Index size() const noexcept { return lambda_.size(); }
    double operator[](Index i) const { return lambda_(i); }

private:
    explicit WeightVector(Vector lambda) : lambda_(std::move(lambda)) {}
    Vector lambda_;
};

/// sum_i lambda_i M[i]
Matrix blend(const std::vector<Matrix>& vertices, const WeightVector& lambda);

struct BlendedMatrices {
    Matrix A;
    Matrix B;
    Matrix D;
};

BlendedMatrices evaluate_at(const LpvModel& model, const WeightVector& lambda);

}  // namespace setobs
