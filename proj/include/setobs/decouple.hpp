#pragma once

#include "setobs/model.hpp"

#include <memory>

namespace setobs {

/// Output/input decoupling of an LpvModel through the SVD of H.
///
/// H = U1 Sigma V1^T; the unknown input splits into d1 = V1^T d (seen
/// directly through the feedthrough) and d2 = V2^T d (seen only one step
/// later through the dynamics). Output components z1 = U1^T y and
/// z2 = U2^T y separate accordingly. When H = 0, Sigma/U1/V1 are empty and
/// U2 = I_l, V2 = I_p.
struct DecoupledModel {
    std::shared_ptr<const LpvModel> model;
    double rank_tol = kDefaultRankTol;

    Index p_H = 0;
    Vector h_singular_values;  ///< all singular values of H, for rank-margin reporting
    Matrix Sigma;
    Matrix U1, U2, V1, V2;
    Matrix T1, T2;
    Matrix G1, G2, H1;
    Matrix C1, C2;
    std::vector<Matrix> D1, D2;
    Matrix M1;   ///< Sigma^-1
    Matrix M2;   ///< (C2 G2)^+
    Matrix Phi;  ///< I - G2 M2 C2
    Index rank_C2G2 = 0;

    std::vector<Matrix> A_hat;  ///< A[i] - G1 M1 C1
    std::vector<Matrix> A_bar;  ///< Phi A_hat[i]

    const Dimensions& dims() const { return model->dims; }
    Index z2_dim() const { return dims().l - p_H; }
    Index d2_dim() const { return dims().p - p_H; }
    bool rank_condition_ok() const { return rank_C2G2 == d2_dim(); }

    /// sigma_{p_H} / (rank_tol * sigma_max): how far the smallest retained
    /// singular value of H sits above the cutoff (infinity when p_H = 0).
    double retained_margin() const;
    /// sigma_{p_H+1} / (rank_tol * sigma_max): how far below the cutoff the
    /// largest discarded value is (zero when none is discarded).
    double discarded_margin() const;
};

enum class DecoupleMode {
    strict,   ///< throw BoundednessError when rank(C2 G2) != p - p_H
    lenient,  ///< record the rank and let callers (detect) report it
};

DecoupledModel decouple(const LpvModel& model, double rank_tol = kDefaultRankTol,
                        DecoupleMode mode = DecoupleMode::strict);
DecoupledModel decouple(std::shared_ptr<const LpvModel> model, double rank_tol = kDefaultRankTol,
                        DecoupleMode mode = DecoupleMode::strict);

struct OutputSplit {
    Vector z1;
    Vector z2;
};

OutputSplit split_output(const DecoupledModel& dm, const Vector& y);

struct InputSplit {
    Vector d1;
    Vector d2;
};

InputSplit split_unknown_input(const DecoupledModel& dm, const Vector& d);
Vector recombine_unknown_input(const DecoupledModel& dm, const Vector& d1, const Vector& d2);

}  // namespace setobs
