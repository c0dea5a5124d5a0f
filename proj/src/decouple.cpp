#include "setobs/decouple.hpp"

#include "setobs/linalg.hpp"

#include <limits>
#include <sstream>

namespace setobs {

double DecoupledModel::retained_margin() const {
    if (p_H == 0) {
        return std::numeric_limits<double>::infinity();
    }
    return h_singular_values(p_H - 1) / (rank_tol * h_singular_values(0));
}

double DecoupledModel::discarded_margin() const {
    if (p_H == 0 || p_H >= h_singular_values.size()) {
        return 0.0;
    }
    return h_singular_values(p_H) / (rank_tol * h_singular_values(0));
}

DecoupledModel decouple(const LpvModel& model, double rank_tol, DecoupleMode mode) {
    return decouple(std::make_shared<const LpvModel>(model), rank_tol, mode);
}

DecoupledModel decouple(std::shared_ptr<const LpvModel> model, double rank_tol, DecoupleMode mode) {
    const Dimensions& d = model->dims;
    DecoupledModel dm;
    dm.model = model;
    dm.rank_tol = rank_tol;

    const linalg::Svd svd = linalg::full_svd(model->H);
    dm.h_singular_values = svd.singular;
    dm.p_H = linalg::numerical_rank(model->H, rank_tol);
    const Index pH = dm.p_H;

    if (pH == 0) {
        dm.U2 = Matrix::Identity(d.l, d.l);
        dm.V2 = Matrix::Identity(d.p, d.p);
        dm.U1 = Matrix::Zero(d.l, 0);
        dm.V1 = Matrix::Zero(d.p, 0);
    } else {
        dm.U1 = svd.U.leftCols(pH);
        dm.U2 = svd.U.rightCols(d.l - pH);
        dm.V1 = svd.V.leftCols(pH);
        dm.V2 = svd.V.rightCols(d.p - pH);
    }
    dm.Sigma = svd.singular.head(pH).asDiagonal();
    dm.M1 = svd.singular.head(pH).cwiseInverse().asDiagonal();

    dm.T1 = dm.U1.transpose();
    dm.T2 = dm.U2.transpose();
    dm.G1 = model->G * dm.V1;
    dm.G2 = model->G * dm.V2;
    dm.H1 = model->H * dm.V1;
    dm.C1 = dm.T1 * model->C;
    dm.C2 = dm.T2 * model->C;
    for (Index i = 0; i < d.N; ++i) {
        dm.D1.push_back(dm.T1 * model->D[i]);
        dm.D2.push_back(dm.T2 * model->D[i]);
    }

    const Matrix C2G2 = dm.C2 * dm.G2;
    dm.rank_C2G2 = linalg::numerical_rank(C2G2, rank_tol);
    if (mode == DecoupleMode::strict && !dm.rank_condition_ok()) {
        std::ostringstream os;
        os << "boundedness precondition violated: rank(C2 G2) = " << dm.rank_C2G2
           << " but p - p_H = " << dm.d2_dim()
           << "; input and state estimation errors cannot be bounded";
        throw BoundednessError(os.str());
    }
    dm.M2 = linalg::pinv(C2G2, rank_tol);
    dm.Phi = Matrix::Identity(d.n, d.n) - dm.G2 * dm.M2 * dm.C2;

    const Matrix feedthrough_correction = dm.G1 * dm.M1 * dm.C1;
    for (Index i = 0; i < d.N; ++i) {
        dm.A_hat.push_back(model->A[i] - feedthrough_correction);
        dm.A_bar.push_back(dm.Phi * dm.A_hat.back());
    }
    return dm;
}

OutputSplit split_output(const DecoupledModel& dm, const Vector& y) {
    if (y.size() != dm.dims().l) {
        throw StructuralError("measurement has length " + std::to_string(y.size()) + ", expected " +
                              std::to_string(dm.dims().l));
    }
    return {dm.T1 * y, dm.T2 * y};
}

InputSplit split_unknown_input(const DecoupledModel& dm, const Vector& d) {
    if (d.size() != dm.dims().p) {
        throw StructuralError("unknown input has length " + std::to_string(d.size()) + ", expected " +
                              std::to_string(dm.dims().p));
    }
    return {dm.V1.transpose() * d, dm.V2.transpose() * d};
}

Vector recombine_unknown_input(const DecoupledModel& dm, const Vector& d1, const Vector& d2) {
    if (d1.size() != dm.p_H || d2.size() != dm.d2_dim()) {
        throw StructuralError("unknown input components have the wrong length");
    }
    return dm.V1 * d1 + dm.V2 * d2;
}

}  // namespace setobs
