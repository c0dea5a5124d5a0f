#pragma once

#include "setobs/decouple.hpp"
#include "setobs/sdp.hpp"

#include <string>
#include <vector>

namespace setobs {

/// Gain certificate: every vertex LMI block is >= margin_abs * I at (S, Y, eta).
struct SynthesisCertificate {
    double eta = 0.0;
    Matrix S;        ///< n x n, symmetric positive definite
    Matrix Y;        ///< n x (l - p_H)
    Matrix L_tilde;  ///< S^-1 Y
    double margin = 0.0;      ///< relative margin requested from the solver
    double margin_abs = 0.0;  ///< margin * trace(S)
    double min_block_eig = 0.0;
    double cond_S = 0.0;
    std::string solver_status;
    std::vector<std::string> warnings;
};

/// Error-system constants for a given gain.
struct ErrorConstants {
    Matrix Psi;               ///< I - L_tilde C2
    Matrix Phi;               ///< I - G2 M2 C2
    std::vector<Matrix> A_e;  ///< Psi Phi (A[i] - G1 M1 C1)
    double theta = 0.0;       ///< max_i ||A_e[i]||
    /// max_i ||V1 M1 C1 + V2 M2 C2 (A[i] - G1 M1 C1)||: the state-error gain of
    /// the delayed input error, maximised over vertices.
    double beta = 0.0;
    /// max_i ||V1 M1 C1 + V2 M2 C2 A_e[i]||. Not an upper bound on the
    /// input-error gain in general; reported for comparison only.
    double beta_closed_loop = 0.0;
    Matrix Gamma;  ///< -(Psi Phi G1 M1 T1 + Psi G2 M2 T2 + L_tilde T2)
    Matrix R;      ///< V2 M2 C2 G1 M1 T1 - V1 M1 T1
    /// Bound on the lumped noise entering the state error each step:
    /// ||Psi Phi|| eta_w + (||Psi Phi G1 M1 T1|| + ||(Psi G2 M2 + L_tilde) T2||) eta_v.
    /// The two eta_v terms act on measurement noise from consecutive steps.
    double eta_bar = 0.0;
    /// ||Gamma|| eta_v + ||Psi Phi|| eta_w, which treats both measurement
    /// noise samples as one; never larger than eta_bar.
    double eta_bar_merged = 0.0;

    Matrix input_state_gain;    ///< V1 M1 C1
    Matrix input_dynamic_gain;  ///< V2 M2 C2
    double norm_V2M2C2 = 0.0;
    double norm_V2M2T2 = 0.0;
    double norm_R = 0.0;
    /// ||V2 M2 C2|| eta_w + (||R|| + ||V2 M2 T2||) eta_v
    double input_noise = 0.0;
};

struct SynthesisOptions {
    double margin = 1e-8;  ///< strict LMIs become >= margin * trace(S) * I
    bool force = false;    ///< skip the strong-detectability pre-check
    double max_condition = 1e12;
    bool allow_ill_conditioned = false;
    sdp::Options solver;

    double eta_lo = 1e-4;
    double eta_hi = 1e4;
    double bisection_rel_tol = 1e-3;
    int max_bisection = 60;
    int max_bracket_expansions = 4;  ///< eta_hi grows tenfold per expansion
};

/// Number of scalar unknowns (eta, upper triangle of S, Y column-major).
Index lmi_variable_count(const DecoupledModel& dm);

/// Vertex-i block
///   [ S    A_bar^T (S - C2^T Y^T)   0                 I   ]
///   [ *    S                        [S - Y C2, -Y]    0   ]
///   [ *    *                        eta I             0   ]
///   [ *    *                        *                 eta I ]
/// of size 4n + (l - p_H).
Matrix lmi_block(const DecoupledModel& dm, Index vertex, const Matrix& S, const Matrix& Y, double eta);

struct LmiCheck {
    bool ok = false;
    double min_block_eig = 0.0;
};

/// Pure eigenvalue test: ok iff every vertex block has min eigenvalue >= margin.
LmiCheck verify_lmi(const DecoupledModel& dm, const Matrix& S, const Matrix& Y, double eta, double margin);

/// Minimises eta over (eta, S, Y). Throws InfeasibleError when no strictly
/// feasible point exists or the pre-check fails.
SynthesisCertificate synthesize_hinf(const DecoupledModel& dm, const SynthesisOptions& options = {});

/// Bisection on eta: at each trial, a fixed-eta feasibility problem (ties
/// broken by minimum trace(S)) gives a gain, accepted iff max_i ||A_e[i]|| < 1.
/// Returns the smallest accepted eta found; throws ConvergenceError otherwise.
SynthesisCertificate synthesize_convergent(const DecoupledModel& dm, const SynthesisOptions& options = {});

ErrorConstants error_constants(const DecoupledModel& dm, const Matrix& L_tilde);

}  // namespace setobs
