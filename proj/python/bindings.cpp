#include "setobs/cli.hpp"
#include "setobs/detect.hpp"
#include "setobs/harness.hpp"
#include "setobs/io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace setobs;

namespace {

std::shared_ptr<const DecoupledModel> decoupled(const LpvModel& model) {
    return std::make_shared<const DecoupledModel>(decouple(std::make_shared<const LpvModel>(model)));
}

// Rows of a trace stacked into (K, dim) arrays.
Matrix stack(const SimulationTrace& trace, Vector TraceRow::*field) {
    const Index rows = static_cast<Index>(trace.rows.size());
    const Index cols = rows == 0 ? 0 : (trace.rows.front().*field).size();
    Matrix out(rows, cols);
    for (Index k = 0; k < rows; ++k) {
        out.row(k) = (trace.rows[static_cast<std::size_t>(k)].*field).transpose();
    }
    return out;
}

Vector column(const SimulationTrace& trace, double TraceRow::*field) {
    Vector out(static_cast<Index>(trace.rows.size()));
    for (std::size_t k = 0; k < trace.rows.size(); ++k) {
        out(static_cast<Index>(k)) = trace.rows[k].*field;
    }
    return out;
}

py::dict constants_dict(const ErrorConstants& c) {
    py::dict d;
    d["theta"] = c.theta;
    d["beta"] = c.beta;
    d["beta_closed_loop"] = c.beta_closed_loop;
    d["eta_bar"] = c.eta_bar;
    d["eta_bar_merged"] = c.eta_bar_merged;
    d["Psi"] = c.Psi;
    d["Phi"] = c.Phi;
    d["R"] = c.R;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Set-membership observer for polytopic LPV systems with unknown inputs";

    // Translators run newest first, so the base class is registered before its subclasses.
    const auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<StructuralError>(m, "StructuralError", base);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", base);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base);

    py::class_<LpvModel>(m, "Model")
        .def_static("from_json", [](const std::string& text) { return io::parse_model(text); }, py::arg("text"))
        .def_static("load", [](const std::string& path) { return io::load_model(path); }, py::arg("path"))
        .def("to_json", [](const LpvModel& model) { return io::dump_model(model); })
        .def_property_readonly("n", [](const LpvModel& model) { return model.dims.n; })
        .def_property_readonly("l", [](const LpvModel& model) { return model.dims.l; })
        .def_property_readonly("p", [](const LpvModel& model) { return model.dims.p; })
        .def_property_readonly("m", [](const LpvModel& model) { return model.dims.m; })
        .def_property_readonly("N", [](const LpvModel& model) { return model.dims.N; })
        .def_readonly("A", &LpvModel::A)
        .def_readonly("B", &LpvModel::B)
        .def_readonly("D", &LpvModel::D)
        .def_readonly("C", &LpvModel::C)
        .def_readonly("G", &LpvModel::G)
        .def_readonly("H", &LpvModel::H)
        .def_readonly("eta_w", &LpvModel::eta_w)
        .def_readonly("eta_v", &LpvModel::eta_v)
        .def_readonly("x0_hat", &LpvModel::x0_hat)
        .def_readonly("delta0_x", &LpvModel::delta0_x);

    py::class_<Scenario>(m, "Scenario")
        .def_static("from_json", [](const std::string& text) { return io::parse_scenario(text); }, py::arg("text"))
        .def_static("load", [](const std::string& path) { return io::load_scenario(path); }, py::arg("path"))
        .def("to_json", [](const Scenario& s) { return io::dump_scenario(s); })
        .def_readwrite("K", &Scenario::K)
        .def_readwrite("seed", &Scenario::seed);

    m.def("reference_example", [] {
        const ReferenceExample ex = reference_example();
        return py::make_tuple(ex.model, ex.scenario);
    }, "Model and scenario of the two-vertex reference example.");

    m.def("check", [](const LpvModel& model) {
        const DetectabilityReport r = existence_report(*decoupled(model));
        py::dict d;
        d["strong_detectable"] = r.per_vertex_strong_detectable;
        d["rank_condition_ok"] = r.rank_condition_ok;
        d["pair_detectable"] = r.per_vertex_pair_detectable;
        d["inconclusive"] = r.per_vertex_inconclusive;
        d["necessary_ok"] = r.overall_necessary_ok;
        d["warnings"] = r.warnings;
        return d;
    }, py::arg("model"), "Per-vertex existence conditions.");

    m.def("synthesize", [](const LpvModel& model, const std::string& mode, bool force) {
        auto dm = decoupled(model);
        SynthesisOptions opts;
        opts.force = force;
        const SynthesisCertificate cert = mode == "convergent" ? synthesize_convergent(*dm, opts)
                                          : mode == "optimal"  ? synthesize_hinf(*dm, opts)
                                                               : throw std::invalid_argument("mode must be optimal or convergent");
        py::dict d = constants_dict(error_constants(*dm, cert.L_tilde));
        d["eta"] = cert.eta;
        d["L_tilde"] = cert.L_tilde;
        d["S"] = cert.S;
        d["Y"] = cert.Y;
        d["min_block_eig"] = cert.min_block_eig;
        return d;
    }, py::arg("model"), py::arg("mode") = "optimal", py::arg("force") = false,
       "Observer gain from the LMI synthesis; returns the certificate and error constants.");

    m.def("verify_lmi", [](const LpvModel& model, const Matrix& S, const Matrix& Y, double eta, double margin) {
        const LmiCheck c = verify_lmi(*decoupled(model), S, Y, eta, margin);
        return py::make_tuple(c.ok, c.min_block_eig);
    }, py::arg("model"), py::arg("S"), py::arg("Y"), py::arg("eta"), py::arg("margin") = 0.0);

    m.def("simulate", [](const LpvModel& model, const Scenario& scenario, const Matrix& L_tilde,
                         const std::string& radius_mode) {
        auto dm = decoupled(model);
        const ObserverContext ctx = make_context(dm, L_tilde, parse_radius_mode(radius_mode));
        const SimulationTrace t = run_observer(ctx, simulate_plant(model, scenario));
        py::dict d;
        d["x_true"] = stack(t, &TraceRow::x_true);
        d["x_hat"] = stack(t, &TraceRow::x_hat);
        d["d_true"] = stack(t, &TraceRow::d_true);
        d["d_hat"] = stack(t, &TraceRow::d_hat);
        d["delta_x"] = column(t, &TraceRow::delta_x);
        d["delta_d"] = column(t, &TraceRow::delta_d);
        d["err_x"] = column(t, &TraceRow::err_x);
        d["err_d"] = column(t, &TraceRow::err_d);
        return d;
    }, py::arg("model"), py::arg("scenario"), py::arg("L_tilde"), py::arg("radius_mode") = "worst_case",
       "Simulates plant and observer; arrays are indexed by k = 1..K.");

    m.def("campaign", [](const LpvModel& model, const Scenario& scenario, const Matrix& L_tilde, Index trials,
                         std::uint64_t seed, const std::string& radius_mode) {
        auto dm = decoupled(model);
        const ObserverContext ctx = make_context(dm, L_tilde, parse_radius_mode(radius_mode));
        CampaignOptions opts;
        opts.trials = trials;
        opts.seed = seed;
        std::string report;
        {
            py::gil_scoped_release release;
            report = io::dump_campaign(containment_campaign(model, ctx, {scenario}, opts));
        }
        return py::module_::import("json").attr("loads")(report);
    }, py::arg("model"), py::arg("scenario"), py::arg("L_tilde"), py::arg("trials") = 1000, py::arg("seed") = 42,
       py::arg("radius_mode") = "worst_case", "Monte-Carlo containment check; returns the campaign report.");

    m.def("run_cli", [](std::vector<std::string> args) {
        args.insert(args.begin(), "setobs");
        std::vector<const char*> argv;
        for (const std::string& a : args) {
            argv.push_back(a.c_str());
        }
        std::ostringstream out, err;
        const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");
}
