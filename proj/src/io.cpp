#include "setobs/io.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace setobs::io {
namespace {

using nlohmann::json;

class Reader {
public:
    Reader(const json& root, std::string origin) : root_(root), origin_(std::move(origin)) {}

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw ConfigError(origin_ + ": field `" + field + "`: " + what);
    }

    const json& require(const std::string& field) const {
        if (!root_.is_object() || !root_.contains(field)) {
            fail(field, "missing");
        }
        return root_.at(field);
    }

    bool has(const std::string& field) const { return root_.is_object() && root_.contains(field); }

    double number(const std::string& field) const { return number_of(require(field), field); }

    double number_of(const json& v, const std::string& field) const {
        if (!v.is_number()) {
            fail(field, "expected a number");
        }
        return v.get<double>();
    }

    Index integer(const std::string& field) const {
        const json& v = require(field);
        if (!v.is_number_integer()) {
            fail(field, "expected an integer");
        }
        return v.get<Index>();
    }

    std::string text(const std::string& field) const {
        const json& v = require(field);
        if (!v.is_string()) {
            fail(field, "expected a string");
        }
        return v.get<std::string>();
    }

    Vector vector(const json& v, Index size, const std::string& field) const {
        if (!v.is_array()) {
            fail(field, "expected an array");
        }
        if (size >= 0 && static_cast<Index>(v.size()) != size) {
            fail(field, "expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
        }
        Vector out(static_cast<Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) {
            out(static_cast<Index>(i)) = number_of(v[i], field);
        }
        return out;
    }

    Vector vector(const std::string& field, Index size) const { return vector(require(field), size, field); }

    // Accepts a list of rows or a flat row-major list.
    Matrix matrix(const json& v, Index rows, Index cols, const std::string& field) const {
        if (!v.is_array()) {
            fail(field, "expected an array");
        }
        Matrix out(rows, cols);
        const bool nested = !v.empty() && v[0].is_array();
        if (nested || (v.empty() && rows > 0 && cols == 0)) {
            if (static_cast<Index>(v.size()) != rows) {
                fail(field, "expected " + std::to_string(rows) + " rows, got " + std::to_string(v.size()));
            }
            for (Index r = 0; r < rows; ++r) {
                const Vector row = vector(v[static_cast<std::size_t>(r)], cols, field);
                out.row(r) = row.transpose();
            }
            return out;
        }
        if (static_cast<Index>(v.size()) != rows * cols) {
            fail(field, "expected " + std::to_string(rows) + "x" + std::to_string(cols) + " = " +
                            std::to_string(rows * cols) + " entries, got " + std::to_string(v.size()));
        }
        for (Index r = 0; r < rows; ++r) {
            for (Index c = 0; c < cols; ++c) {
                out(r, c) = number_of(v[static_cast<std::size_t>(r * cols + c)], field);
            }
        }
        return out;
    }

    Matrix matrix(const std::string& field, Index rows, Index cols) const {
        return matrix(require(field), rows, cols, field);
    }

    std::vector<Matrix> matrices(const std::string& field, Index count, Index rows, Index cols) const {
        const json& v = require(field);
        if (!v.is_array() || static_cast<Index>(v.size()) != count) {
            fail(field, "expected a list of " + std::to_string(count) + " matrices");
        }
        std::vector<Matrix> out;
        for (Index i = 0; i < count; ++i) {
            out.push_back(matrix(v[static_cast<std::size_t>(i)], rows, cols,
                                 field + "[" + std::to_string(i) + "]"));
        }
        return out;
    }

    void check_schema(const std::string& expected) const {
        const std::string got = text("schema");
        if (got != expected) {
            fail("schema", "expected '" + expected + "', got '" + got + "'");
        }
    }

private:
    const json& root_;
    std::string origin_;
};

json parse_json(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

json to_json(const Matrix& M) {
    json rows = json::array();
    for (Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < M.cols(); ++c) {
            row.push_back(M(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json to_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

json to_json(const std::vector<Matrix>& ms) {
    json out = json::array();
    for (const Matrix& m : ms) {
        out.push_back(to_json(m));
    }
    return out;
}

Signal parse_signal(const json& v, const std::string& field, const std::string& origin,
                    const std::filesystem::path& base_dir) {
    Reader r(v, origin);
    Signal s;
    s.kind = [&] {
        try {
            return parse_signal_kind(r.text("kind"));
        } catch (const ConfigError&) {
            throw;
        } catch (const StructuralError& e) {
            r.fail(field + ".kind", e.what());
        }
    }();
    auto opt = [&](const char* name, double fallback) { return r.has(name) ? r.number(name) : fallback; };
    switch (s.kind) {
    case Signal::Kind::constant:
        s.value = r.number("value");
        break;
    case Signal::Kind::piecewise: {
        const json& segs = r.require("segments");
        if (!segs.is_array() || segs.empty()) {
            r.fail(field + ".segments", "expected a non-empty list of [start, value] pairs");
        }
        for (const json& seg : segs) {
            if (!seg.is_array() || seg.size() != 2 || !seg[0].is_number_integer() || !seg[1].is_number()) {
                r.fail(field + ".segments", "expected [start, value] pairs");
            }
            s.segments.emplace_back(seg[0].get<Index>(), seg[1].get<double>());
        }
        break;
    }
    case Signal::Kind::sinusoid:
    case Signal::Kind::square:
        s.amplitude = r.number("amplitude");
        s.period = r.number("period");
        s.phase = opt("phase", 0.0);
        s.value = opt("offset", 0.0);
        if (!(s.period > 0.0)) {
            r.fail(field + ".period", "must be positive");
        }
        break;
    case Signal::Kind::ramp:
        s.start = r.number("start");
        s.end = r.number("end");
        break;
    case Signal::Kind::samples:
        if (r.has("values")) {
            const Vector vals = r.vector("values", -1);
            s.samples.assign(vals.data(), vals.data() + vals.size());
        } else {
            std::filesystem::path file = r.text("file");
            if (file.is_relative()) {
                file = base_dir / file;
            }
            std::istringstream in(read_file(file));
            double x = 0.0;
            while (in >> x) {
                s.samples.push_back(x);
            }
            if (!in.eof()) {
                r.fail(field + ".file", "non-numeric entry in " + file.string());
            }
        }
        if (s.samples.empty()) {
            r.fail(field, "samples signal has no values");
        }
        break;
    }
    return s;
}

json signal_to_json(const Signal& s) {
    json j;
    j["kind"] = to_string(s.kind);
    switch (s.kind) {
    case Signal::Kind::constant:
        j["value"] = s.value;
        break;
    case Signal::Kind::piecewise:
        j["segments"] = json::array();
        for (const auto& [start, value] : s.segments) {
            j["segments"].push_back({start, value});
        }
        break;
    case Signal::Kind::sinusoid:
    case Signal::Kind::square:
        j["amplitude"] = s.amplitude;
        j["period"] = s.period;
        j["phase"] = s.phase;
        j["offset"] = s.value;
        break;
    case Signal::Kind::ramp:
        j["start"] = s.start;
        j["end"] = s.end;
        break;
    case Signal::Kind::samples:
        j["values"] = s.samples;
        break;
    }
    return j;
}

std::vector<Signal> parse_signals(const Reader& r, const json& root, const char* field, Index channels,
                                  const std::string& origin, const std::filesystem::path& base_dir) {
    std::vector<Signal> out;
    if (!root.contains(field)) {
        return out;
    }
    const json& list = root.at(field);
    if (!list.is_array()) {
        r.fail(field, "expected a list of per-channel signals");
    }
    if (channels >= 0 && !list.empty() && static_cast<Index>(list.size()) != channels) {
        r.fail(field, "expected " + std::to_string(channels) + " channels");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
        out.push_back(parse_signal(list[i], std::string(field) + "[" + std::to_string(i) + "]", origin, base_dir));
    }
    return out;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << contents;
}

LpvModel parse_model(const std::string& text, const std::string& origin) {
    const json root = parse_json(text, origin);
    const Reader r(root, origin);
    r.check_schema(kModelSchema);

    LpvModel m;
    m.dims.N = r.integer("N");
    m.dims.n = r.integer("n");
    m.dims.m = r.integer("m");
    m.dims.p = r.integer("p");
    m.dims.l = r.integer("l");
    const Dimensions& d = m.dims;
    for (auto [name, v] : {std::pair{"N", d.N}, {"n", d.n}, {"m", d.m}, {"p", d.p}, {"l", d.l}}) {
        if (v < 0) {
            r.fail(name, "must be nonnegative");
        }
    }
    if (d.N < 1) {
        r.fail("N", "need at least one vertex");
    }
    m.A = r.matrices("A", d.N, d.n, d.n);
    m.B = r.matrices("B", d.N, d.n, d.m);
    m.C = r.matrix("C", d.l, d.n);
    m.D = r.matrices("D", d.N, d.l, d.m);
    m.G = r.matrix("G", d.n, d.p);
    m.H = r.matrix("H", d.l, d.p);
    m.eta_w = r.number("eta_w");
    m.eta_v = r.number("eta_v");
    m.x0_hat = r.vector("x0_hat", d.n);
    m.delta0_x = r.number("delta0_x");
    return m;
}

LpvModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path), path.string()); }

std::string dump_model(const LpvModel& m) {
    json j;
    j["schema"] = kModelSchema;
    j["N"] = m.dims.N;
    j["n"] = m.dims.n;
    j["m"] = m.dims.m;
    j["p"] = m.dims.p;
    j["l"] = m.dims.l;
    j["A"] = to_json(m.A);
    j["B"] = to_json(m.B);
    j["C"] = to_json(m.C);
    j["D"] = to_json(m.D);
    j["G"] = to_json(m.G);
    j["H"] = to_json(m.H);
    j["eta_w"] = m.eta_w;
    j["eta_v"] = m.eta_v;
    j["x0_hat"] = to_json(m.x0_hat);
    j["delta0_x"] = m.delta0_x;
    return j.dump(2) + "\n";
}

Scenario parse_scenario(const std::string& text, const std::string& origin, const std::filesystem::path& base_dir) {
    const json root = parse_json(text, origin);
    const Reader r(root, origin);
    r.check_schema(kScenarioSchema);

    Scenario s;
    s.K = r.integer("K");
    if (s.K < 1) {
        r.fail("K", "horizon must be >= 1");
    }
    if (r.has("weights")) {
        const json& w = root.at("weights");
        const Reader wr(w, origin);
        try {
            s.weight_mode = parse_weight_mode(wr.text("mode"));
        } catch (const ConfigError&) {
            throw;
        } catch (const StructuralError& e) {
            r.fail("weights.mode", e.what());
        }
        if (s.weight_mode == WeightMode::fixed_vertex) {
            s.fixed_vertex = wr.integer("vertex");
        } else if (s.weight_mode == WeightMode::explicit_sequence) {
            const json& seq = wr.require("sequence");
            if (!seq.is_array()) {
                r.fail("weights.sequence", "expected a list of weight vectors");
            }
            for (const json& v : seq) {
                s.weights.push_back(r.vector(v, -1, "weights.sequence"));
            }
        }
    }
    if (r.has("noise")) {
        try {
            s.noise_mode = parse_noise_mode(r.text("noise"));
        } catch (const ConfigError&) {
            throw;
        } catch (const StructuralError& e) {
            r.fail("noise", e.what());
        }
    }
    s.unknown_input = parse_signals(r, root, "unknown_input", -1, origin, base_dir);
    s.known_input = parse_signals(r, root, "known_input", -1, origin, base_dir);
    if (r.has("seed")) {
        const json& v = root.at("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            r.fail("seed", "expected a nonnegative integer");
        }
        s.seed = v.get<std::uint64_t>();
    }
    if (r.has("x0_true")) {
        s.x0_true = r.vector("x0_true", -1);
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    return parse_scenario(read_file(path), path.string(), path.parent_path());
}

bool scenario_has_seed(const std::string& text) {
    const json root = json::parse(text, nullptr, false);
    return root.is_object() && root.contains("seed");
}

std::string dump_scenario(const Scenario& s) {
    json j;
    j["schema"] = kScenarioSchema;
    j["K"] = s.K;
    json w;
    w["mode"] = to_string(s.weight_mode);
    if (s.weight_mode == WeightMode::fixed_vertex) {
        w["vertex"] = s.fixed_vertex;
    } else if (s.weight_mode == WeightMode::explicit_sequence) {
        w["sequence"] = json::array();
        for (const Vector& v : s.weights) {
            w["sequence"].push_back(to_json(v));
        }
    }
    j["weights"] = w;
    j["noise"] = to_string(s.noise_mode);
    j["unknown_input"] = json::array();
    for (const Signal& sig : s.unknown_input) {
        j["unknown_input"].push_back(signal_to_json(sig));
    }
    j["known_input"] = json::array();
    for (const Signal& sig : s.known_input) {
        j["known_input"].push_back(signal_to_json(sig));
    }
    j["seed"] = s.seed;
    if (s.x0_true) {
        j["x0_true"] = to_json(*s.x0_true);
    }
    return j.dump(2) + "\n";
}

GainsFile parse_gains(const std::string& text, const std::string& origin) {
    const json root = parse_json(text, origin);
    const Reader r(root, origin);
    r.check_schema(kGainsSchema);

    GainsFile g;
    SynthesisCertificate& c = g.certificate;
    c.eta = r.number("eta");
    const json& S = r.require("S");
    if (!S.is_array()) {
        r.fail("S", "expected a square matrix");
    }
    const auto n = static_cast<Index>(S.size());
    c.S = r.matrix("S", n, n);
    const json& Y = r.require("Y");
    const Index q = (Y.is_array() && !Y.empty() && Y[0].is_array()) ? static_cast<Index>(Y[0].size()) : 0;
    c.Y = r.matrix("Y", n, q);
    c.L_tilde = r.matrix("L_tilde", n, q);
    c.margin = r.number("margin");
    c.solver_status = r.text("solver_status");
    g.theta = r.number("theta");
    g.beta = r.number("beta");
    g.eta_bar = r.number("eta_bar");
    c.margin_abs = r.has("margin_abs") ? r.number("margin_abs") : c.margin * c.S.trace();
    c.min_block_eig = r.has("min_block_eig") ? r.number("min_block_eig") : 0.0;
    c.cond_S = r.has("cond_S") ? r.number("cond_S") : 0.0;
    g.mode = r.has("mode") ? r.text("mode") : "optimal";
    return g;
}

GainsFile load_gains(const std::filesystem::path& path) { return parse_gains(read_file(path), path.string()); }

std::string dump_gains(const SynthesisCertificate& c, const ErrorConstants& e, const std::string& mode) {
    json j;
    j["schema"] = kGainsSchema;
    j["mode"] = mode;
    j["eta"] = c.eta;
    j["S"] = to_json(c.S);
    j["Y"] = to_json(c.Y);
    j["L_tilde"] = to_json(c.L_tilde);
    j["margin"] = c.margin;
    j["margin_abs"] = c.margin_abs;
    j["min_block_eig"] = c.min_block_eig;
    j["cond_S"] = c.cond_S;
    j["solver_status"] = c.solver_status;
    j["warnings"] = c.warnings;
    j["theta"] = e.theta;
    j["beta"] = e.beta;
    j["eta_bar"] = e.eta_bar;
    j["beta_closed_loop"] = e.beta_closed_loop;
    j["eta_bar_merged"] = e.eta_bar_merged;
    j["input_noise"] = e.input_noise;
    return j.dump(2) + "\n";
}

std::string dump_detectability(const DetectabilityReport& report, const ValidationReport& validation) {
    json j;
    j["schema"] = "setobs.check/1";
    j["overall_necessary_ok"] = report.overall_necessary_ok;
    j["rank_condition_ok"] = report.rank_condition_ok;
    j["per_vertex_strong_detectable"] = report.per_vertex_strong_detectable;
    j["per_vertex_pair_detectable"] = report.per_vertex_pair_detectable;
    j["per_vertex_inconclusive"] = report.per_vertex_inconclusive;
    json zeros = json::array();
    for (const auto& vz : report.invariant_zeros) {
        json list = json::array();
        for (const auto& z : vz) {
            list.push_back({z.real(), z.imag()});
        }
        zeros.push_back(std::move(list));
    }
    j["invariant_zeros"] = zeros;
    const auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    j["h_rank"] = report.h_rank;
    j["h_rank_margin"] = {{"retained", finite_or_null(report.h_retained_margin)},
                          {"discarded", report.h_discarded_margin}};
    j["warnings"] = report.warnings;
    json checks = json::array();
    for (const auto& c : validation.checks) {
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    j["model_checks"] = checks;
    return j.dump(2) + "\n";
}

std::string dump_campaign(const CampaignReport& r) {
    json j;
    j["schema"] = "setobs.campaign/1";
    j["trials"] = r.trials;
    j["steps_checked"] = r.steps_checked;
    j["violation_count"] = r.violation_count;
    json viol = json::array();
    for (const Violation& v : r.violations) {
        viol.push_back({{"trial", v.trial},
                        {"seed", v.seed},
                        {"k", v.k},
                        {"kind", std::string(1, v.kind)},
                        {"error", v.error},
                        {"radius", v.radius}});
    }
    j["violations"] = viol;
    j["tightness_x"] = {{"max", r.max_ratio_x}, {"mean", r.mean_ratio_x}, {"p95", r.p95_ratio_x}};
    j["tightness_d"] = {{"max", r.max_ratio_d}, {"mean", r.mean_ratio_d}};
    if (r.delta_x_inf) {
        j["delta_x_inf"] = *r.delta_x_inf;
        j["max_steady_state_gap"] = r.max_steady_state_gap;
    } else {
        j["delta_x_inf"] = nullptr;
    }
    return j.dump(2) + "\n";
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace, const Dimensions& dims) {
    out << "k";
    auto names = [&](const char* prefix, Index count) {
        for (Index i = 1; i <= count; ++i) {
            out << ',' << prefix << '_' << i;
        }
    };
    names("x_true", dims.n);
    names("x_hat", dims.n);
    out << ",delta_x,err_x";
    names("d_true", dims.p);
    names("d_hat", dims.p);
    out << ",delta_d,err_d";
    names("lambda", dims.N);
    out << '\n';

    const auto saved_flags = out.flags();
    const auto saved_precision = out.precision();
    out << std::setprecision(17);
    auto values = [&](const Vector& v) {
        for (Index i = 0; i < v.size(); ++i) {
            out << ',' << v(i);
        }
    };
    for (const TraceRow& row : trace.rows) {
        out << row.k;
        values(row.x_true);
        values(row.x_hat);
        out << ',' << row.delta_x << ',' << row.err_x;
        values(row.d_true);
        values(row.d_hat);
        out << ',' << row.delta_d << ',' << row.err_d;
        values(row.lambda);
        out << '\n';
    }
    out.flags(saved_flags);
    out.precision(saved_precision);
}

}  // namespace setobs::io
