#pragma once

#include "setobs/synthesize.hpp"

#include <memory>

namespace setobs {

enum class RadiusMode {
    worst_case,    ///< beta maximised over vertices
    time_varying,  ///< ||V1 M1 C1 + V2 M2 C2 A_hat(lambda_{k-1})||
};

RadiusMode parse_radius_mode(const std::string& text);
std::string to_string(RadiusMode mode);

struct SetEstimate {
    Vector center;
    double radius = 0.0;
};

/// Filter state after the measurement update at time k.
struct ObserverState {
    Index k = 0;
    Vector x_hat;     ///< x_hat_{k|k}
    Vector d1_hat;    ///< d_hat_{1,k}, length p_H
    double delta_x = 0.0;
};

/// Everything a step reads; shared read-only across concurrent runs.
struct ObserverContext {
    std::shared_ptr<const DecoupledModel> dm;
    Matrix L_tilde;
    ErrorConstants constants;
    RadiusMode mode = RadiusMode::worst_case;
};

/// Intermediate quantities of one step, in evaluation order.
struct StepResult {
    ObserverState state;
    Vector x_pred;     ///< x_hat_{k|k-1}
    Vector d2_hat;     ///< d_hat_{2,k-1}
    SetEstimate d;     ///< d_{k-1}
    Vector x_star;     ///< x_hat*_{k|k}
    SetEstimate x;     ///< x_k
};

ObserverContext make_context(std::shared_ptr<const DecoupledModel> dm, const Matrix& L_tilde,
                             RadiusMode mode = RadiusMode::worst_case);

ObserverState observer_init(const ObserverContext& ctx, const Vector& x0_hat, double delta0_x, const Vector& y0,
                            const Vector& u0, const WeightVector& lambda0);

StepResult observer_step(const ObserverContext& ctx, const ObserverState& state, const Vector& u_prev,
                         const Vector& u_k, const Vector& y_k, const WeightVector& lambda_prev,
                         const WeightVector& lambda_k);

/// delta0 theta^k + eta_bar sum_{j=1..k} theta^{j-1}; linear in k when |1 - theta| < 1e-12.
double state_radius(Index k, double delta0, double theta, double eta_bar);

/// Input radius for d_{k-1}. lambda_prev is only read in time_varying mode.
double input_radius(double delta_x_prev, const ErrorConstants& constants, const DecoupledModel& dm,
                    RadiusMode mode, const WeightVector* lambda_prev = nullptr);

struct SteadyStateRadii {
    double delta_x = 0.0;
    double delta_d = 0.0;
};

/// Throws ConvergenceError when theta >= 1.
SteadyStateRadii steady_state_radii(const ErrorConstants& constants);

}  // namespace setobs
