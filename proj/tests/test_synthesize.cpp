#include "doctest.h"
#include "fixtures.hpp"
#include "setobs/linalg.hpp"

using namespace setobs;

namespace {

// Optimal value on the example computed separately with an interior-point
// conic solver (Clarabel through cvxpy) from the same block definition.
constexpr double kExampleEtaOracle = 15.389790794;

// Smallest eta at which verify_lmi passes for fixed (S, Y), by bisection;
// infinity when none up to 1e8.
double smallest_eta(const DecoupledModel& dm, const Matrix& S, const Matrix& Y) {
    double hi = 1e8;
    if (!verify_lmi(dm, S, Y, hi, 0.0).ok) {
        return std::numeric_limits<double>::infinity();
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-10 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (verify_lmi(dm, S, Y, mid, 0.0).ok ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

TEST_CASE("lmi_block structure") {
    const DecoupledModel dm = decouple(reference_example().model);
    const Index n = 2, q = dm.z2_dim();
    Matrix S(2, 2);
    S << 2.0, 0.3, 0.3, 1.0;
    const Matrix Y = (Matrix(2, 1) << 0.4, -0.2).finished();
    const Matrix F = lmi_block(dm, 1, S, Y, 3.0);
    CHECK(F.rows() == 4 * n + q);
    CHECK((F - F.transpose()).norm() == 0.0);
    CHECK((F.block(0, 0, n, n) - S).norm() == 0.0);
    CHECK((F.block(n, 0, n, n) - (S - Y * dm.C2) * dm.A_bar[1]).norm() < 1e-15);
    CHECK((F.block(0, 3 * n + q, n, n) - Matrix::Identity(n, n)).norm() == 0.0);
    CHECK(F(2 * n, 2 * n) == 3.0);
    CHECK(F.block(0, 2 * n, n, n + q).norm() == 0.0);
    CHECK_THROWS_AS(lmi_block(dm, 2, S, Y, 1.0), StructuralError);
    CHECK_THROWS_AS(lmi_block(dm, 0, S, Matrix::Zero(2, 2), 1.0), StructuralError);
}

TEST_CASE("optimal synthesis on the example") {
    const auto p = fixtures::example_setup();
    const SynthesisCertificate& c = p.cert;
    CHECK(c.solver_status == "optimal");
    CHECK(c.eta == doctest::Approx(kExampleEtaOracle).epsilon(1e-6));
    CHECK(verify_lmi(*p.dm, c.S, c.Y, c.eta, c.margin_abs).ok);
    CHECK(c.min_block_eig >= c.margin_abs);
    CHECK((c.S * c.L_tilde - c.Y).norm() < 1e-12);
    CHECK(linalg::min_eigenvalue(c.S) > 0.0);
    CHECK(c.cond_S < 1e12);

    // A slightly smaller eta is not certified by the returned pair.
    CHECK_FALSE(verify_lmi(*p.dm, c.S, c.Y, c.eta * (1.0 - 1e-4), 0.0).ok);
}

TEST_CASE("no fixed (S, Y) certifies a smaller eta than the optimum") {
    const auto p = fixtures::example_setup();
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const Matrix R = fixtures::random_matrix(rng, 2, 2);
        const Matrix S = R * R.transpose() + 0.1 * Matrix::Identity(2, 2);
        const Matrix Y = fixtures::random_matrix(rng, 2, 1);
        CHECK(smallest_eta(*p.dm, S, Y) >= p.cert.eta * (1.0 - 1e-6));
    }
    CHECK(smallest_eta(*p.dm, p.cert.S, p.cert.Y) <= p.cert.eta);
}

TEST_CASE("theta on the example does not depend on the gain") {
    // C2 Phi = 0 here, so A_e[i] = Phi A_hat[i] for every L_tilde.
    const DecoupledModel dm = decouple(reference_example().model);
    CHECK((dm.C2 * dm.Phi).norm() < 1e-14);
    std::mt19937_64 rng(42);
    const double theta0 = error_constants(dm, Matrix::Zero(2, 1)).theta;
    CHECK(theta0 > 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix L = fixtures::random_matrix(rng, 2, 1, 3.0);
        CHECK(error_constants(dm, L).theta == doctest::Approx(theta0).epsilon(1e-12));
    }
}

TEST_CASE("convergent synthesis") {
    SUBCASE("example: every gain has theta > 1") {
        const DecoupledModel dm = decouple(reference_example().model);
        CHECK_THROWS_AS(synthesize_convergent(dm), ConvergenceError);
    }
    SUBCASE("fixture with a contracting design") {
        const DecoupledModel dm = decouple(io::load_model(fixtures::data_path("convergent_model.json")));
        const SynthesisCertificate c = synthesize_convergent(dm);
        CHECK(error_constants(dm, c.L_tilde).theta < 1.0);
        CHECK(verify_lmi(dm, c.S, c.Y, c.eta, c.margin_abs).ok);
        const SynthesisCertificate opt = synthesize_hinf(dm);
        CHECK(c.eta >= opt.eta * (1.0 - 1e-6));
    }
}

TEST_CASE("necessary condition failure") {
    const DecoupledModel dm = decouple(io::load_model(fixtures::data_path("nondetectable_model.json")));
    try {
        synthesize_hinf(dm);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK(e.status() == "not_strongly_detectable");
    }
    SynthesisOptions forced;
    forced.force = true;
    try {
        synthesize_hinf(dm, forced);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK(e.status() == "infeasible");
    }
}

TEST_CASE("error constants") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 30; ++trial) {
        const auto inst = fixtures::random_instance(rng, 4, 3, 2);
        const DecoupledModel& dm = *inst.dm;
        const ErrorConstants& c = inst.ctx.constants;
        const Matrix& L = inst.cert.L_tilde;

        CHECK((c.Psi - (Matrix::Identity(dm.dims().n, dm.dims().n) - L * dm.C2)).norm() < 1e-14);
        double theta = 0.0;
        for (Index i = 0; i < dm.dims().N; ++i) {
            theta = std::max(theta, linalg::spectral_norm(c.Psi * dm.Phi * dm.A_hat[i]));
        }
        CHECK(c.theta == doctest::Approx(theta).epsilon(1e-12));
        CHECK(c.eta_bar >= c.eta_bar_merged * (1.0 - 1e-12));
        if (dm.p_H == 0) {
            CHECK(c.eta_bar == doctest::Approx(c.eta_bar_merged).epsilon(1e-12));
        }
        // Convexity of the norm: any interior weight is bounded by the worst vertex.
        const WeightVector w = WeightVector::from(sample_simplex(rng, dm.dims().N));
        const double tv = linalg::spectral_norm(c.input_state_gain + c.input_dynamic_gain * blend(dm.A_hat, w));
        CHECK(tv <= c.beta * (1.0 + 1e-12));
    }
}
