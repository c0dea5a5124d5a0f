#include "setobs/detect.hpp"

#include "setobs/linalg.hpp"

#include <cmath>
#include <sstream>

namespace setobs {
namespace {

using ComplexMatrix = Eigen::MatrixXcd;

bool pbh_full_rank(const Matrix& A, const Matrix& C, std::complex<double> mu) {
    const Index n = A.rows();
    ComplexMatrix pencil(n + C.rows(), n);
    pencil.topRows(n) = mu * ComplexMatrix::Identity(n, n) - A.cast<std::complex<double>>();
    pencil.bottomRows(C.rows()) = C.cast<std::complex<double>>();
    return linalg::numerical_rank(pencil, kPbhRankTol) == n;
}

bool rosenbrock_full_rank(const LpvModel& model, Index vertex, std::complex<double> z) {
    const Index n = model.dims.n;
    const Index p = model.dims.p;
    const Index l = model.dims.l;
    ComplexMatrix R(n + l, n + p);
    R.topLeftCorner(n, n) = z * ComplexMatrix::Identity(n, n) - model.A[vertex].cast<std::complex<double>>();
    R.topRightCorner(n, p) = -model.G.cast<std::complex<double>>();
    R.bottomLeftCorner(l, n) = model.C.cast<std::complex<double>>();
    R.bottomRightCorner(l, p) = model.H.cast<std::complex<double>>();
    return linalg::numerical_rank(R, kPbhRankTol) == n + p;
}

std::string format_complex(std::complex<double> z) {
    std::ostringstream os;
    os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
    return os.str();
}

}  // namespace

bool pair_detectability(const Matrix& A, const Matrix& C, double tol) {
    if (A.rows() != A.cols() || C.cols() != A.cols()) {
        throw StructuralError("pair_detectability: inconsistent dimensions");
    }
    for (const auto& mu : linalg::eigenvalues(A)) {
        if (std::abs(mu) >= 1.0 - tol && !pbh_full_rank(A, C, mu)) {
            return false;
        }
    }
    return true;
}

VertexDetectability strong_detectability(const DecoupledModel& dm, Index vertex, double tol) {
    const LpvModel& model = *dm.model;
    if (vertex < 0 || vertex >= model.dims.N) {
        throw StructuralError("vertex index out of range");
    }
    VertexDetectability out;
    out.rank_condition_ok = dm.rank_condition_ok();

    const Matrix& Abar = dm.A_bar[vertex];
    bool detectable = true;
    for (const auto& mu : linalg::eigenvalues(Abar)) {
        const double mag = std::abs(mu);
        const bool observable = pbh_full_rank(Abar, dm.C2, mu);
        if (!observable) {
            out.invariant_zeros.push_back(mu);
        }
        if (mag < 1.0 - tol) {
            continue;
        }
        if (std::abs(mag - 1.0) <= tol) {
            out.warnings.push_back("vertex " + std::to_string(vertex) + ": eigenvalue " +
                                   format_complex(mu) + " of A_bar lies on the stability boundary");
        }
        if (!observable) {
            detectable = false;
        }
        // The Rosenbrock matrix only has full normal rank when the rank
        // condition holds, so the cross-check is meaningful only then.
        if (out.rank_condition_ok && rosenbrock_full_rank(model, vertex, mu) != observable) {
            out.inconclusive = true;
            out.warnings.push_back("vertex " + std::to_string(vertex) +
                                   ": PBH and Rosenbrock rank disagree at " + format_complex(mu));
        }
    }
    out.pair_detectable = detectable;
    out.strong_detectable = out.rank_condition_ok && detectable && !out.inconclusive;
    return out;
}

DetectabilityReport existence_report(const DecoupledModel& dm, double tol) {
    DetectabilityReport report;
    report.rank_condition_ok = dm.rank_condition_ok();
    report.h_rank = dm.p_H;
    report.h_retained_margin = dm.retained_margin();
    report.h_discarded_margin = dm.discarded_margin();
    if (report.h_retained_margin < kMarginalRankRatio || report.h_discarded_margin * kMarginalRankRatio > 1.0) {
        std::ostringstream os;
        os << "rank(H) = " << dm.p_H << " is numerically marginal (retained margin " << report.h_retained_margin
           << ", discarded margin " << report.h_discarded_margin << ")";
        report.warnings.push_back(os.str());
    }
    if (!report.rank_condition_ok) {
        std::ostringstream os;
        os << "rank(C2 G2) = " << dm.rank_C2G2 << " but p - p_H = " << dm.d2_dim();
        report.warnings.push_back(os.str());
    }
    bool all_strong = true;
    for (Index i = 0; i < dm.dims().N; ++i) {
        VertexDetectability v = strong_detectability(dm, i, tol);
        report.per_vertex_strong_detectable.push_back(v.strong_detectable);
        report.per_vertex_pair_detectable.push_back(v.pair_detectable);
        report.per_vertex_inconclusive.push_back(v.inconclusive);
        report.invariant_zeros.push_back(std::move(v.invariant_zeros));
        for (auto& w : v.warnings) {
            report.warnings.push_back(std::move(w));
        }
        all_strong = all_strong && v.strong_detectable;
    }
    report.overall_necessary_ok = report.rank_condition_ok && all_strong;
    return report;
}

}  // namespace setobs
