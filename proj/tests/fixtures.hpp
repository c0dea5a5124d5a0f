#pragma once

#include "setobs/harness.hpp"
#include "setobs/io.hpp"

#include <filesystem>
#include <random>

namespace fixtures {

using setobs::Index;
using setobs::Matrix;
using setobs::Vector;

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(SETOBS_DATA_DIR) / name;
}

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Matrix M(rows, cols);
    for (Index i = 0; i < M.size(); ++i) {
        M.data()[i] = normal(rng);
    }
    return M;
}

inline Index uniform_index(std::mt19937_64& rng, Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Constituent matrices with spectral norm in [0.4, 1.1]; H has a random rank.
inline setobs::LpvModel random_model(std::mt19937_64& rng, Index max_n = 5, Index max_N = 4, Index max_p = 2) {
    setobs::LpvModel m;
    auto& d = m.dims;
    d.N = uniform_index(rng, 1, max_N);
    d.n = uniform_index(rng, 2, max_n);
    d.l = uniform_index(rng, 1, d.n);
    d.p = uniform_index(rng, 0, std::min(max_p, d.l));
    d.m = uniform_index(rng, 0, 2);
    const Index rank_H = uniform_index(rng, 0, d.p);
    for (Index i = 0; i < d.N; ++i) {
        Matrix A = random_matrix(rng, d.n, d.n);
        A *= uniform_real(rng, 0.4, 1.1) / A.jacobiSvd().singularValues()(0);
        m.A.push_back(A);
        m.B.push_back(random_matrix(rng, d.n, d.m));
        m.D.push_back(random_matrix(rng, d.l, d.m, 0.3));
    }
    m.C = random_matrix(rng, d.l, d.n);
    m.G = random_matrix(rng, d.n, d.p, 0.5);
    m.H = random_matrix(rng, d.l, rank_H) * random_matrix(rng, rank_H, d.p);
    m.eta_w = uniform_real(rng, 0.001, 0.05);
    m.eta_v = uniform_real(rng, 0.0001, 0.01);
    m.x0_hat = random_matrix(rng, d.n, 1);
    m.delta0_x = uniform_real(rng, 0.1, 1.0);
    return m;
}

struct Instance {
    std::shared_ptr<const setobs::LpvModel> model;
    std::shared_ptr<const setobs::DecoupledModel> dm;
    setobs::SynthesisCertificate cert;
    setobs::ObserverContext ctx;
};

/// Redraws until the model decouples, is strongly detectable and admits an
/// H-infinity gain with well-conditioned S.
inline Instance random_instance(std::mt19937_64& rng, Index max_n = 5, Index max_N = 4, Index max_p = 2) {
    for (;;) {
        auto model = std::make_shared<const setobs::LpvModel>(random_model(rng, max_n, max_N, max_p));
        try {
            if (!setobs::validate_model(*model).accepted()) {
                continue;
            }
            auto dm = std::make_shared<const setobs::DecoupledModel>(setobs::decouple(model));
            setobs::SynthesisOptions opts;
            opts.max_condition = 1e6;
            const auto cert = setobs::synthesize_hinf(*dm, opts);
            return Instance{model, dm, cert, setobs::make_context(dm, cert.L_tilde)};
        } catch (const setobs::Error&) {
            continue;
        }
    }
}

/// Random scenario over the given model: simplex weights, ball noise and
/// sinusoidal attack inputs of amplitude up to 5.
inline setobs::Scenario random_scenario(std::mt19937_64& rng, const setobs::LpvModel& model, Index K) {
    setobs::Scenario s;
    s.K = K;
    s.seed = rng();
    for (Index j = 0; j < model.dims.p; ++j) {
        s.unknown_input.push_back(setobs::Signal::make_sinusoid(uniform_real(rng, 0.5, 5.0),
                                                                uniform_real(rng, 5.0, 40.0),
                                                                uniform_real(rng, 0.0, 6.0)));
    }
    for (Index j = 0; j < model.dims.m; ++j) {
        s.known_input.push_back(setobs::Signal::make_square(uniform_real(rng, 0.0, 1.0), 10.0));
    }
    return s;
}

struct ExampleSetup {
    setobs::ReferenceExample example;
    std::shared_ptr<const setobs::LpvModel> model;
    std::shared_ptr<const setobs::DecoupledModel> dm;
    setobs::SynthesisCertificate cert;
};

inline ExampleSetup example_setup() {
    ExampleSetup p;
    p.example = setobs::reference_example();
    p.model = std::make_shared<const setobs::LpvModel>(p.example.model);
    p.dm = std::make_shared<const setobs::DecoupledModel>(setobs::decouple(p.model));
    p.cert = setobs::synthesize_hinf(*p.dm);
    return p;
}

}  // namespace fixtures
