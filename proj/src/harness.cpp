#include "setobs/harness.hpp"

#include "setobs/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace setobs {
namespace {

// Shrinks v by ulps until ||v|| <= radius.
void clip_to_radius(Vector& v, double radius) {
    while (v.norm() > radius) {
        v *= std::nextafter(1.0, 0.0);
    }
}

Vector unit_direction(std::mt19937_64& rng, Index dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(dim);
    double norm = 0.0;
    while (norm == 0.0) {
        for (Index i = 0; i < dim; ++i) {
            v(i) = normal(rng);
        }
        norm = v.norm();
    }
    return v / norm;
}

Vector signal_vector(const std::vector<Signal>& spec, Index dim, Index k, Index K, const char* name) {
    if (spec.empty()) {
        return Vector::Zero(dim);
    }
    if (static_cast<Index>(spec.size()) != dim) {
        throw StructuralError(std::string(name) + " needs " + std::to_string(dim) + " channels, got " +
                              std::to_string(spec.size()));
    }
    Vector out(dim);
    for (Index i = 0; i < dim; ++i) {
        out(i) = spec[static_cast<std::size_t>(i)].at(k, K);
    }
    return out;
}

WeightVector draw_weights(const Scenario& s, Index N, Index k, std::mt19937_64& rng) {
    switch (s.weight_mode) {
    case WeightMode::random_simplex:
        return WeightVector::from(sample_simplex(rng, N), 1e-12);
    case WeightMode::fixed_vertex:
        if (s.fixed_vertex < 0 || s.fixed_vertex >= N) {
            throw StructuralError("fixed_vertex out of range");
        }
        return WeightVector::vertex(N, s.fixed_vertex);
    case WeightMode::explicit_sequence:
        if (static_cast<Index>(s.weights.size()) != s.K + 1) {
            throw StructuralError("explicit weights need K + 1 = " + std::to_string(s.K + 1) + " entries");
        }
        return WeightVector::from(s.weights[static_cast<std::size_t>(k)]);
    }
    throw StructuralError("unknown weight mode");
}

Vector draw_noise(NoiseMode mode, std::mt19937_64& rng, Index dim, double bound) {
    switch (mode) {
    case NoiseMode::uniform_ball:
        return sample_ball(rng, dim, bound);
    case NoiseMode::zero:
        return Vector::Zero(dim);
    case NoiseMode::worst_case_vertex:
        return sample_sphere(rng, dim, bound);
    }
    throw StructuralError("unknown noise mode");
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        return 0.0;
    }
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size()))) - 1;
    const auto pos = std::min(idx, values.size() - 1);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(pos), values.end());
    return values[pos];
}

}  // namespace

double Signal::at(Index k, Index K) const {
    const double t = static_cast<double>(k);
    switch (kind) {
    case Kind::constant:
        return value;
    case Kind::piecewise: {
        double out = 0.0;
        for (const auto& [from, v] : segments) {
            if (k >= from) {
                out = v;
            }
        }
        return out;
    }
    case Kind::sinusoid:
        return value + amplitude * std::sin(2.0 * std::numbers::pi * t / period + phase);
    case Kind::square: {
        const double cycle = std::fmod(t + phase, period);
        return value + (cycle < 0.5 * period ? amplitude : -amplitude);
    }
    case Kind::ramp:
        return K <= 0 ? start : start + (end - start) * t / static_cast<double>(K);
    case Kind::samples:
        if (samples.empty()) {
            return 0.0;
        }
        return samples[std::min(static_cast<std::size_t>(k), samples.size() - 1)];
    }
    return 0.0;
}

Signal Signal::make_constant(double v) {
    Signal s;
    s.value = v;
    return s;
}

Signal Signal::make_sinusoid(double amplitude, double period, double phase, double offset) {
    Signal s;
    s.kind = Kind::sinusoid;
    s.amplitude = amplitude;
    s.period = period;
    s.phase = phase;
    s.value = offset;
    return s;
}

Signal Signal::make_square(double amplitude, double period, double offset) {
    Signal s;
    s.kind = Kind::square;
    s.amplitude = amplitude;
    s.period = period;
    s.value = offset;
    return s;
}

Signal Signal::make_ramp(double start, double end) {
    Signal s;
    s.kind = Kind::ramp;
    s.start = start;
    s.end = end;
    return s;
}

std::string to_string(Signal::Kind kind) {
    switch (kind) {
    case Signal::Kind::constant: return "constant";
    case Signal::Kind::piecewise: return "piecewise";
    case Signal::Kind::sinusoid: return "sinusoid";
    case Signal::Kind::square: return "square";
    case Signal::Kind::ramp: return "ramp";
    case Signal::Kind::samples: return "samples";
    }
    return "constant";
}

Signal::Kind parse_signal_kind(const std::string& text) {
    for (auto k : {Signal::Kind::constant, Signal::Kind::piecewise, Signal::Kind::sinusoid, Signal::Kind::square,
                   Signal::Kind::ramp, Signal::Kind::samples}) {
        if (to_string(k) == text) {
            return k;
        }
    }
    throw StructuralError("unknown signal kind '" + text + "'");
}

std::string to_string(WeightMode mode) {
    switch (mode) {
    case WeightMode::random_simplex: return "random_simplex";
    case WeightMode::fixed_vertex: return "fixed_vertex";
    case WeightMode::explicit_sequence: return "explicit";
    }
    return "random_simplex";
}

std::string to_string(NoiseMode mode) {
    switch (mode) {
    case NoiseMode::uniform_ball: return "uniform_ball";
    case NoiseMode::zero: return "zero";
    case NoiseMode::worst_case_vertex: return "worst_case_vertex";
    }
    return "uniform_ball";
}

WeightMode parse_weight_mode(const std::string& text) {
    for (auto m : {WeightMode::random_simplex, WeightMode::fixed_vertex, WeightMode::explicit_sequence}) {
        if (to_string(m) == text) {
            return m;
        }
    }
    throw StructuralError("unknown weight mode '" + text + "'");
}

NoiseMode parse_noise_mode(const std::string& text) {
    for (auto m : {NoiseMode::uniform_ball, NoiseMode::zero, NoiseMode::worst_case_vertex}) {
        if (to_string(m) == text) {
            return m;
        }
    }
    throw StructuralError("unknown noise mode '" + text + "'");
}

Vector sample_ball(std::mt19937_64& rng, Index dim, double radius) {
    if (dim == 0) {
        return Vector(0);
    }
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double r = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(dim));
    Vector v = r * unit_direction(rng, dim);
    clip_to_radius(v, radius);
    return v;
}

Vector sample_sphere(std::mt19937_64& rng, Index dim, double radius) {
    if (dim == 0) {
        return Vector(0);
    }
    Vector v = radius * unit_direction(rng, dim);
    clip_to_radius(v, radius);
    return v;
}

Vector sample_simplex(std::mt19937_64& rng, Index N) {
    std::exponential_distribution<double> expo(1.0);
    Vector g(N);
    for (Index i = 0; i < N; ++i) {
        g(i) = expo(rng);
    }
    const double total = g.sum();
    if (!(total > 0.0)) {
        return Vector::Constant(N, 1.0 / static_cast<double>(N));
    }
    return g / total;
}

GroundTruth simulate_plant(const LpvModel& model, const Scenario& s) {
    const Dimensions& dims = model.dims;
    if (s.K < 1) {
        throw StructuralError("scenario horizon K must be >= 1");
    }
    std::mt19937_64 rng(s.seed);

    GroundTruth g;
    const auto steps = static_cast<std::size_t>(s.K + 1);
    g.x.reserve(steps);

    Vector x;
    if (s.x0_true) {
        x = *s.x0_true;
        if (x.size() != dims.n) {
            throw StructuralError("x0_true must have length " + std::to_string(dims.n));
        }
        if ((x - model.x0_hat).norm() > model.delta0_x) {
            throw StructuralError("x0_true lies outside the delta0_x ball around x0_hat");
        }
    } else {
        x = model.x0_hat + sample_ball(rng, dims.n, model.delta0_x);
    }

    for (Index k = 0; k <= s.K; ++k) {
        const WeightVector lambda = draw_weights(s, dims.N, k, rng);
        std::vector<Vector> wk, vk;
        for (Index i = 0; i < dims.N; ++i) {
            wk.push_back(draw_noise(s.noise_mode, rng, dims.n, model.eta_w));
            vk.push_back(draw_noise(s.noise_mode, rng, dims.l, model.eta_v));
        }
        const Vector u = signal_vector(s.known_input, dims.m, k, s.K, "known_input");
        const Vector d = signal_vector(s.unknown_input, dims.p, k, s.K, "unknown_input");

        Vector y = model.C * x + model.H * d;
        for (Index i = 0; i < dims.N; ++i) {
            y += lambda[i] * (model.D[i] * u + vk[i]);
        }
        g.x.push_back(x);
        g.y.push_back(y);
        g.u.push_back(u);
        g.d.push_back(d);

        Vector next = model.G * d;
        for (Index i = 0; i < dims.N; ++i) {
            next += lambda[i] * (model.A[i] * x + model.B[i] * u + wk[i]);
        }
        g.lambda.push_back(lambda);
        g.w.push_back(std::move(wk));
        g.v.push_back(std::move(vk));
        x = std::move(next);
    }
    return g;
}

SimulationTrace run_observer(const ObserverContext& ctx, const GroundTruth& truth) {
    const LpvModel& model = *ctx.dm->model;
    SimulationTrace trace;
    trace.x0_true = truth.x.front();
    trace.x0_hat = model.x0_hat;
    trace.delta0_x = model.delta0_x;

    ObserverState state =
        observer_init(ctx, model.x0_hat, model.delta0_x, truth.y[0], truth.u[0], truth.lambda[0]);
    const Index K = truth.K();
    trace.rows.reserve(static_cast<std::size_t>(K));
    for (Index k = 1; k <= K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        StepResult r = observer_step(ctx, state, truth.u[ku - 1], truth.u[ku], truth.y[ku], truth.lambda[ku - 1],
                                     truth.lambda[ku]);
        TraceRow row;
        row.k = k;
        row.x_true = truth.x[ku];
        row.x_hat = r.x.center;
        row.delta_x = r.x.radius;
        row.err_x = (row.x_true - row.x_hat).norm();
        row.d_true = truth.d[ku - 1];
        row.d_hat = r.d.center;
        row.delta_d = r.d.radius;
        row.err_d = (row.d_true - row.d_hat).norm();
        row.lambda = truth.lambda[ku].values();
        trace.rows.push_back(std::move(row));
        state = std::move(r.state);
    }
    return trace;
}

OracleErrors oracle_errors(const ObserverContext& ctx, const GroundTruth& truth, const Vector& x0_hat) {
    const DecoupledModel& dm = *ctx.dm;
    const Dimensions& dims = dm.dims();
    const ErrorConstants& c = ctx.constants;
    const Index K = truth.K();
    const Index n = dims.n;
    const auto steps = static_cast<std::size_t>(K + 1);

    OracleErrors out;
    OracleIntermediates& im = out.intermediates;
    for (std::size_t k = 0; k < steps; ++k) {
        Vector wb = Vector::Zero(n);
        Vector vb = Vector::Zero(dims.l);
        for (Index i = 0; i < dims.N; ++i) {
            wb += truth.lambda[k][i] * truth.w[k][static_cast<std::size_t>(i)];
            vb += truth.lambda[k][i] * truth.v[k][static_cast<std::size_t>(i)];
        }
        im.w_bar.push_back(std::move(wb));
        im.v_bar.push_back(std::move(vb));
    }

    const Matrix PsiPhi = c.Psi * c.Phi;
    const Matrix previous_noise_gain = PsiPhi * dm.G1 * dm.M1 * dm.T1;
    const Matrix current_noise_gain = (c.Psi * dm.G2 * dm.M2 + ctx.L_tilde) * dm.T2;
    im.A_e.assign(steps, Matrix());
    im.t_bar.assign(steps, Vector());
    for (std::size_t k = 1; k < steps; ++k) {
        im.A_e[k] = blend(c.A_e, truth.lambda[k - 1]);
        im.t_bar[k - 1] = PsiPhi * im.w_bar[k - 1] - previous_noise_gain * im.v_bar[k - 1] -
                          current_noise_gain * im.v_bar[k];
    }

    // x_tilde_k = B_{e,k} x_tilde_0 + sum_{i=1..k} C^i_{e,k} t_bar_{k-i}, with
    // B_{e,k} = A_e[k] ... A_e[1] and C^i_{e,k} = A_e[k] ... A_e[k-i+2].
    // Every product is rebuilt from scratch so no state is shared across k.
    const Vector x_tilde0 = truth.x.front() - x0_hat;
    out.x_tilde.push_back(x_tilde0);
    im.B_e_norm.push_back(1.0);
    im.forced_norm.push_back(0.0);
    im.max_C_e_excess.push_back(0.0);
    for (Index k = 1; k <= K; ++k) {
        Matrix C_e = Matrix::Identity(n, n);
        Vector forced = Vector::Zero(n);
        double excess = -std::numeric_limits<double>::infinity();
        for (Index i = 1; i <= k; ++i) {
            if (i >= 2) {
                C_e = C_e * im.A_e[static_cast<std::size_t>(k - i + 2)];
            }
            excess = std::max(excess, linalg::spectral_norm(C_e) - std::pow(c.theta, static_cast<double>(i - 1)));
            forced += C_e * im.t_bar[static_cast<std::size_t>(k - i)];
        }
        const Matrix B_e = C_e * im.A_e[1];
        out.x_tilde.push_back(B_e * x_tilde0 + forced);
        im.B_e_norm.push_back(linalg::spectral_norm(B_e));
        im.forced_norm.push_back(forced.norm());
        im.max_C_e_excess.push_back(excess);
    }

    out.d_tilde.assign(steps, Vector());
    for (std::size_t k = 1; k < steps; ++k) {
        const Matrix gain = c.input_state_gain + c.input_dynamic_gain * blend(dm.A_hat, truth.lambda[k - 1]);
        out.d_tilde[k] = -gain * out.x_tilde[k - 1] + c.R * im.v_bar[k - 1] - c.input_dynamic_gain * im.w_bar[k - 1] -
                         dm.V2 * dm.M2 * dm.T2 * im.v_bar[k];
    }
    return out;
}

double containment_slack(double radius) { return 1e-10 * (1.0 + radius); }

std::uint64_t trial_seed(std::uint64_t master, Index index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

CampaignReport containment_campaign(const LpvModel& model, const ObserverContext& ctx,
                                    const std::vector<Scenario>& scenarios, const CampaignOptions& options) {
    if (options.trials < 1) {
        throw StructuralError("campaign needs at least one trial");
    }
    if (scenarios.empty()) {
        throw StructuralError("campaign needs at least one scenario");
    }
    ObserverContext run_ctx = ctx;
    run_ctx.constants.theta *= options.theta_scale;

    struct TrialResult {
        std::vector<Violation> violations;
        std::vector<double> ratio_x;
        double max_ratio_d = 0.0;
        double sum_ratio_d = 0.0;
        double final_delta_x = 0.0;
        Index steps = 0;
    };
    const auto trials = static_cast<std::size_t>(options.trials);
    std::vector<TrialResult> results(trials);

    auto run_trial = [&](std::size_t t) {
        Scenario s = scenarios[t % scenarios.size()];
        s.seed = trial_seed(options.seed, static_cast<Index>(t));
        const GroundTruth truth = simulate_plant(model, s);
        const SimulationTrace trace = run_observer(run_ctx, truth);
        TrialResult& res = results[t];
        res.ratio_x.reserve(trace.rows.size());
        for (const TraceRow& row : trace.rows) {
            if (row.err_x > row.delta_x + containment_slack(row.delta_x)) {
                res.violations.push_back({static_cast<Index>(t), s.seed, row.k, 'x', row.err_x, row.delta_x});
            }
            if (row.err_d > row.delta_d + containment_slack(row.delta_d)) {
                res.violations.push_back({static_cast<Index>(t), s.seed, row.k, 'd', row.err_d, row.delta_d});
            }
            res.ratio_x.push_back(row.delta_x > 0.0 ? row.err_x / row.delta_x : 0.0);
            const double rd = row.delta_d > 0.0 ? row.err_d / row.delta_d : 0.0;
            res.max_ratio_d = std::max(res.max_ratio_d, rd);
            res.sum_ratio_d += rd;
        }
        res.steps = static_cast<Index>(trace.rows.size());
        res.final_delta_x = trace.rows.back().delta_x;
    };

    unsigned workers = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(trials));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t t = next++; t < trials; t = next++) {
                    run_trial(t);
                }
            } catch (...) {
                errors[w] = std::current_exception();
                next = trials;
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    CampaignReport report;
    report.trials = options.trials;
    if (run_ctx.constants.theta < 1.0) {
        report.delta_x_inf = steady_state_radii(run_ctx.constants).delta_x;
    }
    std::vector<double> all_ratio_x;
    double sum_ratio_d = 0.0;
    for (const TrialResult& r : results) {
        report.steps_checked += r.steps;
        report.violation_count += static_cast<Index>(r.violations.size());
        for (const Violation& v : r.violations) {
            if (report.violations.size() < options.max_reported) {
                report.violations.push_back(v);
            }
        }
        all_ratio_x.insert(all_ratio_x.end(), r.ratio_x.begin(), r.ratio_x.end());
        report.max_ratio_d = std::max(report.max_ratio_d, r.max_ratio_d);
        sum_ratio_d += r.sum_ratio_d;
        if (report.delta_x_inf) {
            report.max_steady_state_gap =
                std::max(report.max_steady_state_gap, std::abs(r.final_delta_x - *report.delta_x_inf));
        }
    }
    if (!all_ratio_x.empty()) {
        report.max_ratio_x = *std::max_element(all_ratio_x.begin(), all_ratio_x.end());
        double sum = 0.0;
        for (double r : all_ratio_x) {
            sum += r;
        }
        report.mean_ratio_x = sum / static_cast<double>(all_ratio_x.size());
        report.mean_ratio_d = sum_ratio_d / static_cast<double>(all_ratio_x.size());
        report.p95_ratio_x = quantile(std::move(all_ratio_x), 0.95);
    }
    return report;
}

ReferenceExample reference_example() {
    ReferenceExample ex;
    LpvModel& m = ex.model;
    m.dims = Dimensions{2, 2, 2, 2, 2};
    Matrix A1(2, 2), A2(2, 2), C(2, 2), G(2, 2), H(2, 2);
    A1 << 0.9, 0.5, -0.3, 1.0;
    A2 << 0.85, 0.55, -0.35, 1.0;
    C << 1.0, 0.2, 1.1, 1.9;
    G << -0.02, 0.04, 0.01, -0.05;
    H << 1.1, 2.0, 2.2, 4.0;
    m.A = {A1, A2};
    m.B = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
    m.C = C;
    m.D = {Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
    m.G = G;
    m.H = H;
    m.eta_w = 0.02;
    m.eta_v = 1e-4;
    m.x0_hat = Vector::Zero(2);
    m.delta0_x = 0.5;

    Scenario& s = ex.scenario;
    s.K = 200;
    s.weight_mode = WeightMode::random_simplex;
    s.noise_mode = NoiseMode::uniform_ball;
    s.unknown_input = {Signal::make_square(1.0, 20.0), Signal::make_ramp(0.0, 2.0)};
    s.seed = 42;
    return ex;
}

}  // namespace setobs
