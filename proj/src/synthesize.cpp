#include "setobs/synthesize.hpp"

#include "setobs/detect.hpp"
#include "setobs/linalg.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace setobs {
namespace {

struct Unpacked {
    double eta;
    Matrix S;
    Matrix Y;
};

Index s_count(Index n) { return n * (n + 1) / 2; }

Unpacked unpack(const DecoupledModel& dm, const Vector& x, bool with_eta, double fixed_eta) {
    const Index n = dm.dims().n;
    const Index q = dm.z2_dim();
    Index k = 0;
    Unpacked u;
    u.eta = with_eta ? x(k++) : fixed_eta;
    u.S = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
            u.S(i, j) = x(k);
            u.S(j, i) = x(k);
            ++k;
        }
    }
    u.Y = Matrix::Zero(n, q);
    for (Index j = 0; j < q; ++j) {
        for (Index i = 0; i < n; ++i) {
            u.Y(i, j) = x(k++);
        }
    }
    return u;
}

Vector pack(const Matrix& S, const Matrix& Y, bool with_eta, double eta) {
    const Index n = S.rows();
    Vector x(static_cast<Index>(with_eta) + s_count(n) + Y.size());
    Index k = 0;
    if (with_eta) {
        x(k++) = eta;
    }
    for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
            x(k++) = S(i, j);
        }
    }
    for (Index j = 0; j < Y.cols(); ++j) {
        for (Index i = 0; i < n; ++i) {
            x(k++) = Y(i, j);
        }
    }
    return x;
}

// Affine LMI problem in the packed variables. With `with_eta` false, eta
// is folded into the constant term and the objective is trace(S).
sdp::Problem build_problem(const DecoupledModel& dm, double margin, bool with_eta, double fixed_eta) {
    const Index n = dm.dims().n;
    const Index num_vars = static_cast<Index>(with_eta) + s_count(n) + n * dm.z2_dim();

    sdp::Problem problem;
    problem.num_vars = num_vars;
    problem.objective = Vector::Zero(num_vars);

    const Vector origin = Vector::Zero(num_vars);
    for (Index i = 0; i < dm.dims().N; ++i) {
        const Unpacked u0 = unpack(dm, origin, with_eta, fixed_eta);
        sdp::LmiBlock block;
        block.constant = lmi_block(dm, i, u0.S, u0.Y, u0.eta);
        const Index size = block.constant.rows();
        for (Index j = 0; j < num_vars; ++j) {
            Vector e = Vector::Zero(num_vars);
            e(j) = 1.0;
            const Unpacked u = unpack(dm, e, with_eta, fixed_eta);
            Matrix Fj = lmi_block(dm, i, u.S, u.Y, u.eta) - block.constant;
            // Strictness margin: subtract margin * trace(S) * I.
            const double dtrace = u.S.trace();
            if (dtrace != 0.0) {
                Fj -= margin * dtrace * Matrix::Identity(size, size);
            }
            if (Fj.cwiseAbs().maxCoeff() > 0.0) {
                block.terms.emplace_back(j, std::move(Fj));
            }
        }
        problem.blocks.push_back(std::move(block));
    }

    Index k = 0;
    if (with_eta) {
        problem.objective(k++) = 1.0;
    } else {
        for (Index i = 0; i < n; ++i) {
            for (Index j = i; j < n; ++j) {
                problem.objective(k++) = (i == j) ? 1.0 : 0.0;
            }
        }
    }
    return problem;
}

SynthesisCertificate make_certificate(const DecoupledModel& dm, const Unpacked& u, const SynthesisOptions& options,
                                      const std::string& status) {
    SynthesisCertificate cert;
    cert.eta = u.eta;
    cert.S = 0.5 * (u.S + u.S.transpose());
    cert.Y = u.Y;
    cert.L_tilde = cert.S.llt().solve(cert.Y);
    cert.margin = options.margin;
    cert.margin_abs = options.margin * cert.S.trace();
    cert.min_block_eig = verify_lmi(dm, cert.S, cert.Y, cert.eta, cert.margin_abs).min_block_eig;
    cert.cond_S = linalg::condition_number(cert.S);
    cert.solver_status = status;
    if (cert.cond_S > options.max_condition) {
        std::ostringstream os;
        os << "S is ill-conditioned (cond = " << cert.cond_S << ")";
        cert.warnings.push_back(os.str());
    }
    return cert;
}

void precheck(const DecoupledModel& dm, const SynthesisOptions& options) {
    if (!dm.rank_condition_ok()) {
        throw BoundednessError("boundedness precondition violated: rank(C2 G2) != p - p_H");
    }
    if (options.force) {
        return;
    }
    const DetectabilityReport report = existence_report(dm);
    if (!report.overall_necessary_ok) {
        throw InfeasibleError(
            "no eta-bounded H-infinity observer exists: some vertex is not strongly detectable "
            "(use force to run the solver anyway)",
            "not_strongly_detectable");
    }
}

bool conditioning_ok(const SynthesisCertificate& cert, const SynthesisOptions& options) {
    return options.allow_ill_conditioned || cert.cond_S <= options.max_condition;
}

}  // namespace

Index lmi_variable_count(const DecoupledModel& dm) {
    const Index n = dm.dims().n;
    return 1 + s_count(n) + n * dm.z2_dim();
}

Matrix lmi_block(const DecoupledModel& dm, Index vertex, const Matrix& S, const Matrix& Y, double eta) {
    const Index n = dm.dims().n;
    const Index q = dm.z2_dim();
    if (vertex < 0 || vertex >= dm.dims().N) {
        throw StructuralError("lmi_block: vertex index out of range");
    }
    if (S.rows() != n || S.cols() != n) {
        throw StructuralError("lmi_block: S must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (Y.rows() != n || Y.cols() != q) {
        throw StructuralError("lmi_block: Y must be " + std::to_string(n) + "x" + std::to_string(q));
    }
    const Matrix& Abar = dm.A_bar[vertex];
    const Matrix& C2 = dm.C2;

    const Index size = 4 * n + q;
    Matrix F = Matrix::Zero(size, size);
    Matrix coupling(n, n + q);
    coupling << S - Y * C2, -Y;

    F.block(0, 0, n, n) = S;
    F.block(0, n, n, n) = Abar.transpose() * (S - C2.transpose() * Y.transpose());
    F.block(0, 3 * n + q, n, n) = Matrix::Identity(n, n);
    F.block(n, n, n, n) = S;
    F.block(n, 2 * n, n, n + q) = coupling;
    F.block(2 * n, 2 * n, n + q, n + q) = eta * Matrix::Identity(n + q, n + q);
    F.block(3 * n + q, 3 * n + q, n, n) = eta * Matrix::Identity(n, n);

    F.triangularView<Eigen::StrictlyLower>() = F.transpose().triangularView<Eigen::StrictlyLower>();
    return F;
}

LmiCheck verify_lmi(const DecoupledModel& dm, const Matrix& S, const Matrix& Y, double eta, double margin) {
    LmiCheck out;
    out.min_block_eig = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < dm.dims().N; ++i) {
        out.min_block_eig = std::min(out.min_block_eig, linalg::min_eigenvalue(lmi_block(dm, i, S, Y, eta)));
    }
    out.ok = out.min_block_eig >= margin;
    return out;
}

SynthesisCertificate synthesize_hinf(const DecoupledModel& dm, const SynthesisOptions& options) {
    precheck(dm, options);
    const Index n = dm.dims().n;
    const sdp::Problem problem = build_problem(dm, options.margin, true, 0.0);
    const Vector x0 = pack(Matrix::Identity(n, n), Matrix::Zero(n, dm.z2_dim()), true, 1.0);

    const sdp::Result result = sdp::minimize(problem, x0, options.solver);
    if (result.status != sdp::Status::optimal) {
        const std::string status = sdp::to_string(result.status);
        throw InfeasibleError("no eta-bounded H-infinity observer found (solver status: " + status + ")",
                              status);
    }
    SynthesisCertificate cert = make_certificate(dm, unpack(dm, result.x, true, 0.0), options, "optimal");
    if (!conditioning_ok(cert, options)) {
        throw NumericalError("synthesized S is ill-conditioned (cond = " + std::to_string(cert.cond_S) + ")");
    }
    return cert;
}

SynthesisCertificate synthesize_convergent(const DecoupledModel& dm, const SynthesisOptions& options) {
    precheck(dm, options);
    if (!(options.eta_lo > 0.0) || options.eta_hi < options.eta_lo) {
        throw StructuralError("convergent synthesis needs 0 < eta_lo <= eta_hi");
    }
    const Index n = dm.dims().n;
    const Vector x0 = pack(Matrix::Identity(n, n), Matrix::Zero(n, dm.z2_dim()), false, 0.0);
    double best_theta_seen = std::numeric_limits<double>::infinity();

    auto attempt = [&](double eta) -> std::optional<SynthesisCertificate> {
        const sdp::Problem problem = build_problem(dm, options.margin, false, eta);
        const sdp::Result r = sdp::minimize(problem, x0, options.solver);
        if (r.status != sdp::Status::optimal && r.status != sdp::Status::iteration_limit) {
            return std::nullopt;
        }
        SynthesisCertificate cert = make_certificate(dm, unpack(dm, r.x, false, eta), options, "feasible");
        if (!conditioning_ok(cert, options) || cert.min_block_eig < cert.margin_abs) {
            return std::nullopt;
        }
        const double theta = error_constants(dm, cert.L_tilde).theta;
        best_theta_seen = std::min(best_theta_seen, theta);
        if (!(theta < 1.0)) {
            return std::nullopt;
        }
        return cert;
    };

    double hi = options.eta_hi;
    std::optional<SynthesisCertificate> accepted = attempt(hi);
    for (int e = 0; !accepted && e < options.max_bracket_expansions; ++e) {
        hi *= 10.0;
        accepted = attempt(hi);
    }
    if (!accepted) {
        std::ostringstream os;
        os << "convergence not certifiable: no eta in [" << options.eta_lo << ", " << hi
           << "] yields a feasible gain with max_i ||A_e[i]|| < 1";
        if (std::isfinite(best_theta_seen)) {
            os << " (smallest theta seen: " << best_theta_seen << ")";
        }
        throw ConvergenceError(os.str());
    }
    if (options.eta_lo == hi) {
        return *accepted;
    }
    if (auto at_lo = attempt(options.eta_lo)) {
        return *at_lo;
    }
    double lo = options.eta_lo;
    for (int it = 0; it < options.max_bisection && hi / lo - 1.0 > options.bisection_rel_tol; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (auto c = attempt(mid)) {
            hi = mid;
            accepted = std::move(c);
        } else {
            lo = mid;
        }
    }
    return *accepted;
}

ErrorConstants error_constants(const DecoupledModel& dm, const Matrix& L_tilde) {
    const Dimensions& d = dm.dims();
    if (L_tilde.rows() != d.n || L_tilde.cols() != dm.z2_dim()) {
        throw StructuralError("L_tilde must be " + std::to_string(d.n) + "x" + std::to_string(dm.z2_dim()));
    }
    const LpvModel& model = *dm.model;
    const Matrix I = Matrix::Identity(d.n, d.n);

    ErrorConstants c;
    c.Psi = I - L_tilde * dm.C2;
    c.Phi = dm.Phi;
    const Matrix PsiPhi = c.Psi * c.Phi;
    c.input_state_gain = dm.V1 * dm.M1 * dm.C1;
    c.input_dynamic_gain = dm.V2 * dm.M2 * dm.C2;

    for (Index i = 0; i < d.N; ++i) {
        c.A_e.push_back(PsiPhi * dm.A_hat[i]);
        c.theta = std::max(c.theta, linalg::spectral_norm(c.A_e.back()));
        c.beta = std::max(c.beta, linalg::spectral_norm(c.input_state_gain + c.input_dynamic_gain * dm.A_hat[i]));
        c.beta_closed_loop =
            std::max(c.beta_closed_loop, linalg::spectral_norm(c.input_state_gain + c.input_dynamic_gain * c.A_e.back()));
    }

    const Matrix previous_noise_gain = PsiPhi * dm.G1 * dm.M1 * dm.T1;
    const Matrix current_noise_gain = (c.Psi * dm.G2 * dm.M2 + L_tilde) * dm.T2;
    c.Gamma = -(previous_noise_gain + current_noise_gain);
    c.R = dm.V2 * dm.M2 * dm.C2 * dm.G1 * dm.M1 * dm.T1 - dm.V1 * dm.M1 * dm.T1;

    const double norm_PsiPhi = linalg::spectral_norm(PsiPhi);
    c.eta_bar = norm_PsiPhi * model.eta_w +
                (linalg::spectral_norm(previous_noise_gain) + linalg::spectral_norm(current_noise_gain)) * model.eta_v;
    c.eta_bar_merged = linalg::spectral_norm(c.Gamma) * model.eta_v + norm_PsiPhi * model.eta_w;

    c.norm_V2M2C2 = linalg::spectral_norm(c.input_dynamic_gain);
    c.norm_V2M2T2 = linalg::spectral_norm(dm.V2 * dm.M2 * dm.T2);
    c.norm_R = linalg::spectral_norm(c.R);
    c.input_noise = c.norm_V2M2C2 * model.eta_w + (c.norm_R + c.norm_V2M2T2) * model.eta_v;
    return c;
}

}  // namespace setobs
