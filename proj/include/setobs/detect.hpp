#pragma once

#include "setobs/decouple.hpp"

#include <complex>
#include <string>
#include <vector>

namespace setobs {

inline constexpr double kStabilityTol = 1e-9;
inline constexpr double kPbhRankTol = 1e-8;

/// PBH test: rank [mu I - A; C] = n at every eigenvalue mu of A with
/// |mu| >= 1 - tol.
bool pair_detectability(const Matrix& A, const Matrix& C, double tol = kStabilityTol);

struct VertexDetectability {
    bool strong_detectable = false;
    bool rank_condition_ok = false;
    bool pair_detectable = false;  ///< (A_bar[i], C2) passes PBH
    /// PBH and the Rosenbrock rank at some candidate zero disagreed.
    bool inconclusive = false;
    /// Unobservable modes of (A_bar[i], C2), i.e. the invariant zeros of
    /// (A[i], G, C, H) when the rank condition holds.
    std::vector<std::complex<double>> invariant_zeros;
    std::vector<std::string> warnings;
};

/// Strong detectability of vertex i via rank(C2 G2) = p - p_H plus
/// detectability of (A_bar[i], C2), cross-checked against the Rosenbrock
/// matrix [zI - A, -G; C, H] at every candidate zero with |z| >= 1 - tol.
VertexDetectability strong_detectability(const DecoupledModel& dm, Index vertex,
                                         double tol = kStabilityTol);

struct DetectabilityReport {
    std::vector<bool> per_vertex_strong_detectable;
    std::vector<std::vector<std::complex<double>>> invariant_zeros;
    bool rank_condition_ok = false;
    std::vector<bool> per_vertex_pair_detectable;
    std::vector<bool> per_vertex_inconclusive;
    bool overall_necessary_ok = false;
    /// Rank of H and its distance from the rank threshold, as ratios to
    /// rank_tol * sigma_max (retained > 1 > discarded).
    Index h_rank = 0;
    double h_retained_margin = 0.0;
    double h_discarded_margin = 0.0;
    std::vector<std::string> warnings;
};

/// Ratio band around the rank threshold inside which rank(H) is reported as marginal.
inline constexpr double kMarginalRankRatio = 100.0;

/// Every vertex must be strongly detectable for an H-infinity observer to
/// exist for arbitrary weight sequences. Per-vertex detectability of
/// (A_bar[i], C2) does not certify uniform detectability of the
/// time-varying pair; it is a diagnostic only.
DetectabilityReport existence_report(const DecoupledModel& dm, double tol = kStabilityTol);

}  // namespace setobs
