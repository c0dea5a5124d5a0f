#include "setobs/observer.hpp"

#include "setobs/linalg.hpp"

#include <cmath>

namespace setobs {
namespace {

constexpr double kUnitThetaBand = 1e-12;

void require_finite(const Vector& v, const char* name) {
    if (!linalg::all_finite(v)) {
        throw NumericalError(std::string("non-finite ") + name);
    }
}

void require_size(const Vector& v, Index size, const char* name) {
    if (v.size() != size) {
        throw StructuralError(std::string(name) + " must have length " + std::to_string(size) + ", got " +
                              std::to_string(v.size()));
    }
}

void require_weights(const WeightVector& lambda, Index N) {
    if (lambda.size() != N) {
        throw InvalidWeightsError("weight vector must have " + std::to_string(N) + " entries");
    }
}

// z1 - C1 x - D1(lambda) u
Vector d1_estimate(const DecoupledModel& dm, const Vector& z1, const Vector& x, const Vector& u,
                   const WeightVector& lambda) {
    return dm.M1 * (z1 - dm.C1 * x - blend(dm.D1, lambda) * u);
}

}  // namespace

RadiusMode parse_radius_mode(const std::string& text) {
    if (text == "worst_case") {
        return RadiusMode::worst_case;
    }
    if (text == "time_varying") {
        return RadiusMode::time_varying;
    }
    throw StructuralError("unknown radius mode '" + text + "' (expected worst_case or time_varying)");
}

std::string to_string(RadiusMode mode) {
    return mode == RadiusMode::worst_case ? "worst_case" : "time_varying";
}

ObserverContext make_context(std::shared_ptr<const DecoupledModel> dm, const Matrix& L_tilde, RadiusMode mode) {
    ObserverContext ctx;
    ctx.constants = error_constants(*dm, L_tilde);
    ctx.dm = std::move(dm);
    ctx.L_tilde = L_tilde;
    ctx.mode = mode;
    return ctx;
}

ObserverState observer_init(const ObserverContext& ctx, const Vector& x0_hat, double delta0_x, const Vector& y0,
                            const Vector& u0, const WeightVector& lambda0) {
    const DecoupledModel& dm = *ctx.dm;
    const Dimensions& d = dm.dims();
    require_size(x0_hat, d.n, "x0_hat");
    require_size(y0, d.l, "y0");
    require_size(u0, d.m, "u0");
    require_weights(lambda0, d.N);
    require_finite(y0, "measurement y0");
    if (!(delta0_x >= 0.0) || !std::isfinite(delta0_x)) {
        throw StructuralError("delta0_x must be finite and nonnegative");
    }
    ObserverState s;
    s.k = 0;
    s.x_hat = x0_hat;
    s.d1_hat = d1_estimate(dm, split_output(dm, y0).z1, x0_hat, u0, lambda0);
    s.delta_x = delta0_x;
    return s;
}

StepResult observer_step(const ObserverContext& ctx, const ObserverState& state, const Vector& u_prev,
                         const Vector& u_k, const Vector& y_k, const WeightVector& lambda_prev,
                         const WeightVector& lambda_k) {
    const DecoupledModel& dm = *ctx.dm;
    const LpvModel& model = *dm.model;
    const Dimensions& d = dm.dims();
    require_size(u_prev, d.m, "u_prev");
    require_size(u_k, d.m, "u_k");
    require_size(y_k, d.l, "y_k");
    require_weights(lambda_prev, d.N);
    require_weights(lambda_k, d.N);
    require_finite(y_k, "measurement y_k");
    require_finite(u_k, "known input u_k");

    const OutputSplit z = split_output(dm, y_k);
    const Matrix D2k = blend(dm.D2, lambda_k);

    StepResult r;
    r.x_pred = blend(model.A, lambda_prev) * state.x_hat + blend(model.B, lambda_prev) * u_prev + dm.G1 * state.d1_hat;
    r.d2_hat = dm.M2 * (z.z2 - dm.C2 * r.x_pred - D2k * u_k);
    r.d.center = recombine_unknown_input(dm, state.d1_hat, r.d2_hat);
    r.d.radius = input_radius(state.delta_x, ctx.constants, dm, ctx.mode, &lambda_prev);
    r.x_star = r.x_pred + dm.G2 * r.d2_hat;

    r.state.k = state.k + 1;
    r.state.x_hat = r.x_star + ctx.L_tilde * (z.z2 - dm.C2 * r.x_star - D2k * u_k);
    r.state.delta_x = ctx.constants.theta * state.delta_x + ctx.constants.eta_bar;
    r.state.d1_hat = d1_estimate(dm, z.z1, r.state.x_hat, u_k, lambda_k);

    r.x.center = r.state.x_hat;
    r.x.radius = r.state.delta_x;
    return r;
}

double state_radius(Index k, double delta0, double theta, double eta_bar) {
    const double kk = static_cast<double>(k);
    if (std::abs(1.0 - theta) < kUnitThetaBand) {
        return delta0 + eta_bar * kk;
    }
    const double tk = std::pow(theta, kk);
    return delta0 * tk + eta_bar * (1.0 - tk) / (1.0 - theta);
}

double input_radius(double delta_x_prev, const ErrorConstants& constants, const DecoupledModel& dm, RadiusMode mode,
                    const WeightVector* lambda_prev) {
    double gain = constants.beta;
    if (mode == RadiusMode::time_varying) {
        if (lambda_prev == nullptr) {
            throw StructuralError("time_varying input radius needs the previous weights");
        }
        gain = linalg::spectral_norm(constants.input_state_gain +
                                     constants.input_dynamic_gain * blend(dm.A_hat, *lambda_prev));
    }
    return gain * delta_x_prev + constants.input_noise;
}

SteadyStateRadii steady_state_radii(const ErrorConstants& constants) {
    if (!(constants.theta < 1.0)) {
        throw ConvergenceError("radii do not converge: steady state needs theta < 1, got theta = " +
                               std::to_string(constants.theta));
    }
    SteadyStateRadii r;
    r.delta_x = constants.eta_bar / (1.0 - constants.theta);
    r.delta_d = constants.beta * r.delta_x + constants.input_noise;
    return r;
}

}  // namespace setobs
