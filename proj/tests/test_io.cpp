#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"

#include <sstream>

using namespace setobs;

namespace {

bool same_model(const LpvModel& a, const LpvModel& b) {
    bool ok = a.dims.N == b.dims.N && a.dims.n == b.dims.n && a.dims.m == b.dims.m && a.dims.p == b.dims.p &&
              a.dims.l == b.dims.l && a.C == b.C && a.G == b.G && a.H == b.H && a.eta_w == b.eta_w &&
              a.eta_v == b.eta_v && a.x0_hat == b.x0_hat && a.delta0_x == b.delta0_x;
    for (std::size_t i = 0; ok && i < a.A.size(); ++i) {
        ok = a.A[i] == b.A[i] && a.B[i] == b.B[i] && a.D[i] == b.D[i];
    }
    return ok;
}

}  // namespace

TEST_CASE("model config round trip") {
    const LpvModel example = reference_example().model;
    CHECK(same_model(io::load_model(fixtures::data_path("example_model.json")), example));
    CHECK(same_model(io::parse_model(io::dump_model(example)), example));

    std::mt19937_64 rng(71);
    for (int i = 0; i < 20; ++i) {
        const LpvModel m = fixtures::random_model(rng);
        CHECK(same_model(io::parse_model(io::dump_model(m)), m));
    }
}

TEST_CASE("flat row-major matrices are accepted") {
    std::string text = io::dump_model(reference_example().model);
    const auto pos = text.find("\"C\"");
    const auto end = text.find("\"D\"");
    text.replace(pos, end - pos, "\"C\": [1.0, 0.2, 1.1, 1.9],\n  ");
    CHECK(io::parse_model(text).C(1, 1) == 1.9);
}

TEST_CASE("config diagnostics name the field") {
    auto error_of = [](const std::string& text) {
        try {
            io::parse_model(text, "m.json");
        } catch (const io::ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    std::string text = io::dump_model(reference_example().model);
    nlohmann::json no_h = nlohmann::json::parse(text);
    no_h.erase("H");
    CHECK(error_of(no_h.dump()).find("`H`") != std::string::npos);

    std::string bad_schema = text;
    bad_schema.replace(bad_schema.find("setobs.model/1"), 14, "setobs.model/9");
    CHECK(error_of(bad_schema).find("`schema`") != std::string::npos);

    const std::string truncated = text.substr(0, text.size() / 2);
    CHECK(error_of(truncated).find("line") != std::string::npos);

    std::string wrong_shape = text;
    wrong_shape.replace(wrong_shape.find("\"x0_hat\": ["), 11, "\"x0_hat\": [1.0, ");
    CHECK(error_of(wrong_shape).find("`x0_hat`") != std::string::npos);
}

TEST_CASE("scenario round trip") {
    Scenario s = reference_example().scenario;
    s.known_input = {Signal::make_sinusoid(1.0, 7.0, 0.5, 0.1), Signal::make_constant(2.0)};
    s.x0_true = (Vector(2) << 0.1, 0.2).finished();
    const Scenario back = io::parse_scenario(io::dump_scenario(s));
    CHECK(back.K == s.K);
    CHECK(back.seed == s.seed);
    CHECK(back.weight_mode == s.weight_mode);
    CHECK(back.noise_mode == s.noise_mode);
    REQUIRE(back.unknown_input.size() == 2);
    for (Index k = 0; k <= s.K; k += 7) {
        CHECK(back.unknown_input[0].at(k, s.K) == s.unknown_input[0].at(k, s.K));
        CHECK(back.unknown_input[1].at(k, s.K) == s.unknown_input[1].at(k, s.K));
        CHECK(back.known_input[0].at(k, s.K) == s.known_input[0].at(k, s.K));
    }
    CHECK(*back.x0_true == *s.x0_true);

    const Scenario file = io::load_scenario(fixtures::data_path("example_scenario.json"));
    CHECK(file.K == 200);
    CHECK(file.unknown_input[0].kind == Signal::Kind::square);
    CHECK(io::load_scenario(fixtures::data_path("zero_noise_scenario.json")).noise_mode == NoiseMode::zero);
}

TEST_CASE("gains round trip passes verify_lmi") {
    const auto p = fixtures::example_setup();
    const ErrorConstants e = error_constants(*p.dm, p.cert.L_tilde);
    const io::GainsFile g = io::parse_gains(io::dump_gains(p.cert, e, "optimal"));
    CHECK(g.certificate.eta == p.cert.eta);
    CHECK(g.certificate.S == p.cert.S);
    CHECK(g.certificate.Y == p.cert.Y);
    CHECK(g.certificate.L_tilde == p.cert.L_tilde);
    CHECK(g.theta == e.theta);
    CHECK(g.beta == e.beta);
    CHECK(g.eta_bar == e.eta_bar);
    CHECK(g.certificate.solver_status == "optimal");
    CHECK(verify_lmi(*p.dm, g.certificate.S, g.certificate.Y, g.certificate.eta, g.certificate.margin_abs).ok);
}

TEST_CASE("trace CSV layout") {
    const auto p = fixtures::example_setup();
    const ObserverContext ctx = make_context(p.dm, p.cert.L_tilde);
    Scenario s = p.example.scenario;
    s.K = 3;
    const SimulationTrace t = run_observer(ctx, simulate_plant(*p.model, s));
    std::ostringstream out;
    io::write_trace_csv(out, t, p.model->dims);
    std::istringstream in(out.str());
    std::string header, line;
    std::getline(in, header);
    CHECK(header ==
          "k,x_true_1,x_true_2,x_hat_1,x_hat_2,delta_x,err_x,d_true_1,d_true_2,d_hat_1,d_hat_2,delta_d,err_d,"
          "lambda_1,lambda_2");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 14);
    }
    CHECK(rows == 3);
    // 17 significant digits reproduce every double exactly.
    std::istringstream first(out.str().substr(out.str().find('\n') + 1));
    std::string cell;
    std::getline(first, cell, ',');
    std::getline(first, cell, ',');
    CHECK(std::stod(cell) == t.rows[0].x_true(0));
}
