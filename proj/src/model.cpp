#include "setobs/model.hpp"

#include "setobs/linalg.hpp"

#include <cmath>
#include <sstream>

namespace setobs {
namespace {

void require_shape(const Matrix& M, Index rows, Index cols, const std::string& name) {
    if (M.rows() != rows || M.cols() != cols) {
        std::ostringstream os;
        os << "matrix " << name << " has shape " << M.rows() << "x" << M.cols()
           << ", expected " << rows << "x" << cols;
        throw StructuralError(os.str());
    }
}

void require_vertices(const std::vector<Matrix>& Ms, const Dimensions& d, Index rows, Index cols,
                      const std::string& name) {
    if (static_cast<Index>(Ms.size()) != d.N) {
        std::ostringstream os;
        os << name << " has " << Ms.size() << " vertex matrices, expected N = " << d.N;
        throw StructuralError(os.str());
    }
    for (std::size_t i = 0; i < Ms.size(); ++i) {
        require_shape(Ms[i], rows, cols, name + "[" + std::to_string(i) + "]");
    }
}

std::string dims_text(Index a, const char* op, Index b) {
    std::ostringstream os;
    os << a << ' ' << op << ' ' << b;
    return os.str();
}

}  // namespace

bool ValidationReport::accepted() const {
    for (const auto& c : checks) {
        if (!c.passed) {
            return false;
        }
    }
    return true;
}

ValidationReport validate_model(const LpvModel& model, double rank_tol) {
    const Dimensions& d = model.dims;
    if (d.N < 1) {
        throw StructuralError("model must have at least one vertex (N >= 1)");
    }
    if (d.n < 0 || d.m < 0 || d.p < 0 || d.l < 0) {
        throw StructuralError("dimensions must be nonnegative");
    }
    require_vertices(model.A, d, d.n, d.n, "A");
    require_vertices(model.B, d, d.n, d.m, "B");
    require_vertices(model.D, d, d.l, d.m, "D");
    require_shape(model.C, d.l, d.n, "C");
    require_shape(model.G, d.n, d.p, "G");
    require_shape(model.H, d.l, d.p, "H");
    if (model.x0_hat.size() != d.n) {
        throw StructuralError("vector x0_hat has length " + std::to_string(model.x0_hat.size()) +
                              ", expected " + std::to_string(d.n));
    }

    ValidationReport report;
    auto add = [&](std::string name, bool ok, std::string detail) {
        report.checks.push_back({std::move(name), ok, std::move(detail)});
    };

    add("n >= l", d.n >= d.l, dims_text(d.n, ">=", d.l));
    add("l >= 1", d.l >= 1, dims_text(d.l, ">=", 1));
    add("l >= p", d.l >= d.p, dims_text(d.l, ">=", d.p));

    Matrix stacked(d.n + d.l, d.p);
    stacked << model.G, model.H;
    const Index r = linalg::numerical_rank(stacked, rank_tol);
    if (stacked.size() > 0) {
        report.stacked_singular_values = Eigen::JacobiSVD<Matrix>(stacked).singularValues();
    }
    add("rank [G; H] = p", r == d.p, "rank " + std::to_string(r) + ", p = " + std::to_string(d.p));

    add("eta_w >= 0", std::isfinite(model.eta_w) && model.eta_w >= 0.0, std::to_string(model.eta_w));
    add("eta_v >= 0", std::isfinite(model.eta_v) && model.eta_v >= 0.0, std::to_string(model.eta_v));
    add("delta0_x >= 0", std::isfinite(model.delta0_x) && model.delta0_x >= 0.0,
        std::to_string(model.delta0_x));

    bool finite = model.C.allFinite() && model.G.allFinite() && model.H.allFinite() &&
                  model.x0_hat.allFinite();
    for (Index i = 0; i < d.N; ++i) {
        finite = finite && model.A[i].allFinite() && model.B[i].allFinite() && model.D[i].allFinite();
    }
    add("finite entries", finite, finite ? "ok" : "NaN or Inf present");
    return report;
}

WeightVector WeightVector::from(const Vector& lambda, double tol) {
    if (lambda.size() == 0) {
        throw InvalidWeightsError("weight vector is empty");
    }
    if (!lambda.allFinite()) {
        throw InvalidWeightsError("weight vector has non-finite entries");
    }
    if (lambda.minCoeff() < -tol || lambda.maxCoeff() > 1.0 + tol) {
        throw InvalidWeightsError("weights must lie in [0, 1]");
    }
    Vector clamped = lambda.cwiseMax(0.0).cwiseMin(1.0);
    const double sum = clamped.sum();
    if (std::abs(sum - 1.0) > tol) {
        std::ostringstream os;
        os.precision(17);
        os << "weights sum to " << sum << ", not 1 within " << tol;
        throw InvalidWeightsError(os.str());
    }
    return WeightVector(clamped / sum);
}

WeightVector WeightVector::vertex(Index N, Index j) {
    if (j < 0 || j >= N) {
        throw InvalidWeightsError("vertex index out of range");
    }
    Vector e = Vector::Zero(N);
    e(j) = 1.0;
    return WeightVector(std::move(e));
}

Matrix blend(const std::vector<Matrix>& vertices, const WeightVector& lambda) {
    if (static_cast<Index>(vertices.size()) != lambda.size()) {
        throw InvalidWeightsError("weight vector length " + std::to_string(lambda.size()) +
                                  " does not match vertex count " + std::to_string(vertices.size()));
    }
    Matrix out = Matrix::Zero(vertices.front().rows(), vertices.front().cols());
    for (Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] != 0.0) {
            out += lambda[i] * vertices[i];
        }
    }
    return out;
}

BlendedMatrices evaluate_at(const LpvModel& model, const WeightVector& lambda) {
    return {blend(model.A, lambda), blend(model.B, lambda), blend(model.D, lambda)};
}

}  // namespace setobs
