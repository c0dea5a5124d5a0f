#pragma once

#include "setobs/observer.hpp"

#include <cstdint>
#include <optional>
#include <random>

namespace setobs {

/// Scalar waveform over k = 0..K.
struct Signal {
    enum class Kind { constant, piecewise, sinusoid, square, ramp, samples };
    Kind kind = Kind::constant;
    double value = 0.0;                            ///< constant; offset for sinusoid/square
    std::vector<std::pair<Index, double>> segments;  ///< piecewise: (start k, value), sorted by start
    double amplitude = 0.0;                        ///< sinusoid, square
    double period = 1.0;                           ///< sinusoid, square (steps)
    double phase = 0.0;                            ///< sinusoid (radians); square (steps)
    double start = 0.0;                            ///< ramp value at k = 0
    double end = 0.0;                              ///< ramp value at k = K
    std::vector<double> samples;                   ///< samples; held at the last value past the end

    double at(Index k, Index K) const;

    static Signal make_constant(double v);
    static Signal make_sinusoid(double amplitude, double period, double phase = 0.0, double offset = 0.0);
    static Signal make_square(double amplitude, double period, double offset = 0.0);
    static Signal make_ramp(double start, double end);
};

std::string to_string(Signal::Kind kind);
Signal::Kind parse_signal_kind(const std::string& text);

enum class WeightMode { random_simplex, fixed_vertex, explicit_sequence };
enum class NoiseMode { uniform_ball, zero, worst_case_vertex };

std::string to_string(WeightMode mode);
std::string to_string(NoiseMode mode);
WeightMode parse_weight_mode(const std::string& text);
NoiseMode parse_noise_mode(const std::string& text);

struct Scenario {
    Index K = 200;
    WeightMode weight_mode = WeightMode::random_simplex;
    Index fixed_vertex = 0;              ///< zero-based
    std::vector<Vector> weights;         ///< explicit_sequence: K + 1 entries (k = 0..K)
    std::vector<Signal> unknown_input;   ///< p channels; empty means d = 0
    std::vector<Signal> known_input;     ///< m channels; empty means u = 0
    NoiseMode noise_mode = NoiseMode::uniform_ball;
    std::uint64_t seed = 42;
    std::optional<Vector> x0_true;       ///< drawn uniformly in the delta0_x ball when absent
};

/// Plant realisation for k = 0..K. w[k][i], v[k][i] are vertex noises.
struct GroundTruth {
    std::vector<Vector> x, y, u, d;
    std::vector<WeightVector> lambda;
    std::vector<std::vector<Vector>> w, v;
    Index K() const { return static_cast<Index>(x.size()) - 1; }
};

/// One row per k = 1..K. The input columns refer to d_{k-1}.
struct TraceRow {
    Index k = 0;
    Vector x_true, x_hat;
    double delta_x = 0.0, err_x = 0.0;
    Vector d_true, d_hat;  ///< d_{k-1} and its estimate
    double delta_d = 0.0, err_d = 0.0;
    Vector lambda;         ///< lambda_k
};

struct SimulationTrace {
    Vector x0_true, x0_hat;
    double delta0_x = 0.0;
    std::vector<TraceRow> rows;
};

/// Samples uniform in the closed ball of the given radius; norms never exceed it.
Vector sample_ball(std::mt19937_64& rng, Index dim, double radius);
/// Samples on the sphere of the given radius (clipped to stay within it).
Vector sample_sphere(std::mt19937_64& rng, Index dim, double radius);
/// Dirichlet(1, ..., 1).
Vector sample_simplex(std::mt19937_64& rng, Index N);

GroundTruth simulate_plant(const LpvModel& model, const Scenario& scenario);

SimulationTrace run_observer(const ObserverContext& ctx, const GroundTruth& truth);

/// Per-step products and bounds of the closed-form error expansion.
struct OracleIntermediates {
    std::vector<Matrix> A_e;      ///< A_e[k] = Psi Phi A_hat(lambda_{k-1}), k = 1..K (index 0 unused)
    std::vector<Vector> w_bar;    ///< sum_i lambda_{i,k} w_k^i
    std::vector<Vector> v_bar;    ///< sum_i lambda_{i,k} v_k^i
    std::vector<Vector> t_bar;    ///< t_bar[k] drives x_tilde_{k+1}
    std::vector<double> B_e_norm;           ///< ||B_{e,k}||
    std::vector<double> forced_norm;        ///< ||sum_i C^i_{e,k} t_bar_{k-i}||
    std::vector<double> max_C_e_excess;     ///< max_i ||C^i_{e,k}|| - theta^{i-1}
};

struct OracleErrors {
    std::vector<Vector> x_tilde;  ///< k = 0..K
    std::vector<Vector> d_tilde;  ///< d_tilde[k] is the error of d_{k-1}, k = 1..K (index 0 unused)
    OracleIntermediates intermediates;
};

/// Closed-form errors from the initial error and the noise realisation only.
OracleErrors oracle_errors(const ObserverContext& ctx, const GroundTruth& truth, const Vector& x0_hat);

struct Violation {
    Index trial = 0;
    std::uint64_t seed = 0;
    Index k = 0;
    char kind = 'x';  ///< 'x' state, 'd' input
    double error = 0.0;
    double radius = 0.0;
};

struct CampaignOptions {
    Index trials = 1000;
    std::uint64_t seed = 42;
    unsigned threads = 0;       ///< 0 selects hardware concurrency
    double theta_scale = 1.0;   ///< < 1 corrupts theta (negative control)
    std::size_t max_reported = 20;
};

struct CampaignReport {
    Index trials = 0;
    Index steps_checked = 0;
    Index violation_count = 0;
    std::vector<Violation> violations;  ///< first max_reported, ordered by (trial, k)
    double max_ratio_x = 0.0;
    double mean_ratio_x = 0.0;
    double p95_ratio_x = 0.0;
    double max_ratio_d = 0.0;
    double mean_ratio_d = 0.0;
    std::optional<double> delta_x_inf;
    double max_steady_state_gap = 0.0;  ///< max over trials of |delta_x_K - delta_x_inf|, when defined
    bool passed() const { return violation_count == 0; }
};

/// Containment tolerance for a radius: 1e-10 (1 + radius).
double containment_slack(double radius);

/// Seed for trial `index` of a campaign, independent of thread scheduling.
std::uint64_t trial_seed(std::uint64_t master, Index index);

CampaignReport containment_campaign(const LpvModel& model, const ObserverContext& ctx,
                                    const std::vector<Scenario>& scenarios, const CampaignOptions& options);

struct ReferenceExample {
    LpvModel model;
    Scenario scenario;
};

/// Two-vertex, two-state attack example with default attack waveforms
/// (square wave on d1, ramp on d2) and random simplex weights.
ReferenceExample reference_example();

}  // namespace setobs
