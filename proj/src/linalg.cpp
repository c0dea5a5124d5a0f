#include "setobs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace setobs::linalg {
namespace {

constexpr double kSignTol = 1e-12;

// Sign that makes the first entry with |x| > kSignTol positive.
double leading_sign(const Eigen::Ref<const Vector>& v) {
    const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
    for (Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > kSignTol * scale) {
            return v(i) > 0.0 ? 1.0 : -1.0;
        }
    }
    return 1.0;
}

template <typename MatrixType>
Index rank_from_singular(const MatrixType& M, double rank_tol) {
    if (M.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<MatrixType> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) {
        return 0;
    }
    const double threshold = rank_tol * s(0);
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i) {
        if (s(i) > threshold) {
            ++r;
        }
    }
    return r;
}

}  // namespace

Svd full_svd(const Matrix& M) {
    const Index rows = M.rows();
    const Index cols = M.cols();
    Svd out;
    if (rows == 0 || cols == 0) {
        out.U = Matrix::Identity(rows, rows);
        out.V = Matrix::Identity(cols, cols);
        out.singular = Vector::Zero(0);
        return out;
    }
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.U = svd.matrixU();
    out.V = svd.matrixV();
    out.singular = svd.singularValues();

    const Index k = std::min(rows, cols);
    for (Index j = 0; j < k; ++j) {
        const double s = leading_sign(out.U.col(j));
        out.U.col(j) *= s;
        out.V.col(j) *= s;
    }
    for (Index j = k; j < rows; ++j) {
        out.U.col(j) *= leading_sign(out.U.col(j));
    }
    for (Index j = k; j < cols; ++j) {
        out.V.col(j) *= leading_sign(out.V.col(j));
    }
    return out;
}

Index numerical_rank(const Matrix& M, double rank_tol) {
    return rank_from_singular(M, rank_tol);
}

Index numerical_rank(const Eigen::MatrixXcd& M, double rank_tol) {
    return rank_from_singular(M, rank_tol);
}

Matrix pinv(const Matrix& M, double rank_tol) {
    if (M.size() == 0) {
        return Matrix::Zero(M.cols(), M.rows());
    }
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double threshold = rank_tol * s(0);
    Vector inv = Vector::Zero(s.size());
    for (Index i = 0; i < s.size(); ++i) {
        if (s(i) > threshold && s(i) > 0.0) {
            inv(i) = 1.0 / s(i);
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double spectral_norm(const Matrix& M) {
    if (M.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

double spectral_radius(const Matrix& M) {
    if (M.size() == 0) {
        return 0.0;
    }
    double rho = 0.0;
    for (const auto& mu : eigenvalues(M)) {
        rho = std::max(rho, std::abs(mu));
    }
    return rho;
}

double min_eigenvalue(const Matrix& M) {
    if (M.size() == 0) {
        return std::numeric_limits<double>::infinity();
    }
    const Matrix sym = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericalError("symmetric eigenvalue solver failed");
    }
    return es.eigenvalues()(0);
}

double condition_number(const Matrix& M) {
    if (M.size() == 0) {
        return 1.0;
    }
    Eigen::JacobiSVD<Matrix> svd(M);
    const Vector& s = svd.singularValues();
    const double smallest = s(s.size() - 1);
    if (smallest == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return s(0) / smallest;
}

bool all_finite(const Matrix& M) {
    return M.allFinite();
}

std::vector<std::complex<double>> eigenvalues(const Matrix& A) {
    if (A.size() == 0) {
        return {};
    }
    Eigen::EigenSolver<Matrix> es(A, false);
    if (es.info() != Eigen::Success) {
        throw NumericalError("eigenvalue solver failed to converge");
    }
    const auto& ev = es.eigenvalues();
    std::vector<std::complex<double>> out(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (std::abs(a) != std::abs(b)) {
            return std::abs(a) > std::abs(b);
        }
        if (a.real() != b.real()) {
            return a.real() > b.real();
        }
        return a.imag() > b.imag();
    });
    return out;
}

}  // namespace setobs::linalg
