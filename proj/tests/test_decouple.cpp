#include "doctest.h"
#include "fixtures.hpp"
#include "setobs/linalg.hpp"

using namespace setobs;

namespace {

void check_identities(const DecoupledModel& dm, const Matrix& L_tilde) {
    const Dimensions& d = dm.dims();
    const double tol = 1e-10;
    Matrix T(d.l, d.l);
    T << dm.U1.transpose(), dm.U2.transpose();
    CHECK((T * T.transpose() - Matrix::Identity(d.l, d.l)).norm() < tol);
    if (dm.p_H > 0) {
        CHECK((dm.M1 * dm.Sigma - Matrix::Identity(dm.p_H, dm.p_H)).norm() < tol);
    }
    if (dm.d2_dim() > 0) {
        CHECK((dm.M2 * dm.C2 * dm.G2 - Matrix::Identity(dm.d2_dim(), dm.d2_dim())).norm() < tol * (1.0 + dm.M2.norm()));
    }
    CHECK((dm.Phi * dm.G2).norm() < tol * (1.0 + dm.M2.norm()));
    const Matrix L = L_tilde * dm.U2.transpose();
    CHECK((L * dm.U1).norm() < tol * (1.0 + L.norm()));
    for (Index i = 0; i < d.N; ++i) {
        CHECK((dm.A_bar[i] - dm.Phi * dm.A_hat[i]).norm() < tol);
        CHECK((dm.A_hat[i] - (dm.model->A[i] - dm.G1 * dm.M1 * dm.C1)).norm() < tol);
    }
}

}  // namespace

TEST_CASE("example decoupling") {
    const DecoupledModel dm = decouple(reference_example().model);
    CHECK(dm.p_H == 1);
    // H = [1; 2] [1.1, 2] has the single singular value ||[1; 2]|| ||[1.1, 2]|| = sqrt(5 * 5.21).
    CHECK(dm.Sigma(0, 0) == doctest::Approx(std::sqrt(26.05)).epsilon(1e-14));
    CHECK(dm.rank_condition_ok());
    // The sign convention fixes the first entry of each left singular vector positive.
    CHECK(dm.U1(0, 0) > 0.0);
    CHECK(dm.U2(0, 0) > 0.0);
    check_identities(dm, Matrix::Constant(2, 1, 0.3));
}

TEST_CASE("output transform preserves norms") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const LpvModel model = fixtures::random_model(rng);
        const DecoupledModel dm = decouple(model, kDefaultRankTol, DecoupleMode::lenient);
        const Vector y = fixtures::random_matrix(rng, model.dims.l, 1);
        const OutputSplit z = split_output(dm, y);
        CHECK(std::hypot(z.z1.norm(), z.z2.norm()) == doctest::Approx(y.norm()).epsilon(1e-13));
        const Vector d = fixtures::random_matrix(rng, model.dims.p, 1);
        const InputSplit s = split_unknown_input(dm, d);
        CHECK((recombine_unknown_input(dm, s.d1, s.d2) - d).norm() < 1e-12 * (1.0 + d.norm()));
    }
}

TEST_CASE("gain identities hold on random models") {
    std::mt19937_64 rng(22);
    int checked = 0;
    while (checked < 50) {
        const LpvModel model = fixtures::random_model(rng);
        const DecoupledModel dm = decouple(model, kDefaultRankTol, DecoupleMode::lenient);
        if (!dm.rank_condition_ok()) {
            continue;
        }
        check_identities(dm, fixtures::random_matrix(rng, model.dims.n, dm.z2_dim()));
        ++checked;
    }
}

TEST_CASE("H = 0 keeps the whole output and input in the second channel") {
    LpvModel m = reference_example().model;
    m.H.setZero();
    m.G << 1.0, 0.0, 0.0, 1.0;
    const DecoupledModel dm = decouple(m);
    CHECK(dm.p_H == 0);
    CHECK(dm.U2.isApprox(Matrix::Identity(2, 2)));
    CHECK(dm.V2.isApprox(Matrix::Identity(2, 2)));
    CHECK(dm.M1.size() == 0);
}

TEST_CASE("rank(C2 G2) deficiency") {
    LpvModel m;
    m.dims = {1, 2, 0, 1, 1};
    m.A = {Matrix::Identity(2, 2) * 0.5};
    m.B = {Matrix::Zero(2, 0)};
    m.D = {Matrix::Zero(1, 0)};
    m.C = (Matrix(1, 2) << 1.0, 0.0).finished();
    m.G = (Matrix(2, 1) << 0.0, 1.0).finished();  // C G = 0
    m.H = Matrix::Zero(1, 1);
    m.x0_hat = Vector::Zero(2);
    CHECK_THROWS_AS(decouple(m), BoundednessError);
    const DecoupledModel lenient = decouple(m, kDefaultRankTol, DecoupleMode::lenient);
    CHECK_FALSE(lenient.rank_condition_ok());
    CHECK(lenient.rank_C2G2 == 0);
}
