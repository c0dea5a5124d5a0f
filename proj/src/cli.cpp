#include "setobs/cli.hpp"

#include "setobs/io.hpp"
#include "setobs/linalg.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace setobs::cli {
namespace {

namespace fs = std::filesystem;

struct RunConfig {
    std::string model_path;
    std::string scenario_path;
    std::string gains_path;
    std::string output_dir = ".";
    std::optional<std::uint64_t> seed;
    std::string radius_mode = "worst_case";
    std::string synthesis_mode = "optimal";
    Index trials = 1000;
    bool force = false;
    double margin = 1e-8;
    bool negative_control = false;
    unsigned threads = 0;
};

class UsageError : public Error {
public:
    using Error::Error;
};

/// Thrown after a completed run whose estimates escaped their radii.
class ContainmentFailure : public Error {
public:
    using Error::Error;
};

struct Loaded {
    std::shared_ptr<const LpvModel> model;
    std::shared_ptr<const DecoupledModel> dm;
};

Loaded load_and_decouple(const RunConfig& cfg, DecoupleMode mode = DecoupleMode::strict) {
    auto model = std::make_shared<const LpvModel>(io::load_model(cfg.model_path));
    const ValidationReport v = validate_model(*model);
    if (!v.accepted()) {
        std::string failed;
        for (const auto& c : v.checks) {
            if (!c.passed) {
                failed += (failed.empty() ? "" : "; ") + c.name + (c.detail.empty() ? "" : " (" + c.detail + ")");
            }
        }
        throw StructuralError("model rejected: " + failed);
    }
    auto dm = std::make_shared<const DecoupledModel>(decouple(model, kDefaultRankTol, mode));
    return {model, dm};
}

std::string format_vector(const Matrix& M) {
    std::ostringstream os;
    os << std::setprecision(6) << '[';
    for (Index i = 0; i < M.size(); ++i) {
        os << (i ? ", " : "") << M.data()[i];
    }
    os << ']';
    return os.str();
}

Scenario resolve_scenario(const RunConfig& cfg) {
    const fs::path path = cfg.scenario_path;
    const std::string text = io::read_file(path);
    Scenario s = io::parse_scenario(text, path.string(), path.parent_path());
    if (cfg.seed) {
        s.seed = *cfg.seed;
    } else if (!io::scenario_has_seed(text)) {
        throw UsageError("a seed is required: pass --seed or set `seed` in the scenario");
    }
    return s;
}

ObserverContext load_context(const RunConfig& cfg, const Loaded& loaded, std::ostream& out) {
    const io::GainsFile gains = io::load_gains(cfg.gains_path);
    const SynthesisCertificate& c = gains.certificate;
    const Dimensions& d = loaded.dm->dims();
    if (c.S.rows() != d.n || c.L_tilde.rows() != d.n || c.L_tilde.cols() != loaded.dm->z2_dim()) {
        throw StructuralError("gains do not match the model dimensions");
    }
    const LmiCheck check = verify_lmi(*loaded.dm, c.S, c.Y, c.eta, 0.0);
    if (!check.ok) {
        throw StructuralError("gains do not certify this model (min block eigenvalue " +
                              std::to_string(check.min_block_eig) + ")");
    }
    if ((c.S * c.L_tilde - c.Y).norm() > 1e-8 * (1.0 + c.Y.norm())) {
        throw StructuralError("gains file is inconsistent: L_tilde != S^-1 Y");
    }
    ObserverContext ctx = make_context(loaded.dm, c.L_tilde, parse_radius_mode(cfg.radius_mode));
    out << "gains: eta = " << c.eta << ", theta = " << ctx.constants.theta << ", mode = " << cfg.radius_mode << "\n";
    return ctx;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
    const Loaded loaded = load_and_decouple(cfg, DecoupleMode::lenient);
    const ValidationReport validation = validate_model(*loaded.model);
    const DetectabilityReport report = existence_report(*loaded.dm);

    out << "rank(C2 G2) = p - p_H: " << (report.rank_condition_ok ? "yes" : "no") << "\n";
    out << "strongly detectable:";
    for (std::size_t i = 0; i < report.per_vertex_strong_detectable.size(); ++i) {
        out << (i ? "," : "") << " vertex " << i + 1 << ' '
            << (report.per_vertex_strong_detectable[i] ? "✓" : "✗");
        if (report.per_vertex_inconclusive[i]) {
            out << " (inconclusive)";
        }
    }
    out << "\n";
    for (const auto& w : report.warnings) {
        out << "warning: " << w << "\n";
    }
    out << "necessary condition: " << (report.overall_necessary_ok ? "satisfied" : "violated") << "\n";
    const fs::path path = fs::path(cfg.output_dir) / "check.json";
    io::write_file(path, io::dump_detectability(report, validation));
    out << "report: " << path.string() << "\n";
    return report.overall_necessary_ok ? kExitOk : kExitInfeasible;
}

int cmd_synthesize(const RunConfig& cfg, std::ostream& out) {
    const Loaded loaded = load_and_decouple(cfg);
    SynthesisOptions opts;
    opts.force = cfg.force;
    opts.margin = cfg.margin;

    SynthesisCertificate cert;
    if (cfg.synthesis_mode == "optimal") {
        cert = synthesize_hinf(*loaded.dm, opts);
    } else if (cfg.synthesis_mode == "convergent") {
        cert = synthesize_convergent(*loaded.dm, opts);
    } else {
        throw UsageError("unknown --mode '" + cfg.synthesis_mode + "'");
    }
    const ErrorConstants e = error_constants(*loaded.dm, cert.L_tilde);

    out << std::setprecision(10);
    out << "status: " << cert.solver_status << "\n";
    out << "eta* = " << cert.eta << "\n";
    out << "L_tilde = " << format_vector(cert.L_tilde) << "\n";
    out << "theta = " << e.theta << "\n";
    out << "beta = " << e.beta << "\n";
    out << "eta_bar = " << e.eta_bar << "\n";
    if (e.theta < 1.0) {
        const SteadyStateRadii ss = steady_state_radii(e);
        out << "steady state: delta_x = " << ss.delta_x << ", delta_d = " << ss.delta_d << "\n";
    } else {
        out << "steady state: radii do not converge (theta >= 1)\n";
    }
    for (const auto& w : cert.warnings) {
        out << "warning: " << w << "\n";
    }
    const fs::path path = cfg.gains_path.empty() ? fs::path(cfg.output_dir) / "gains.json" : fs::path(cfg.gains_path);
    io::write_file(path, io::dump_gains(cert, e, cfg.synthesis_mode));
    out << "gains: " << path.string() << "\n";
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const Loaded loaded = load_and_decouple(cfg);
    const Scenario scenario = resolve_scenario(cfg);
    const ObserverContext ctx = load_context(cfg, loaded, out);

    const GroundTruth truth = simulate_plant(*loaded.model, scenario);
    const SimulationTrace trace = run_observer(ctx, truth);

    std::ostringstream csv;
    io::write_trace_csv(csv, trace, loaded.model->dims);
    const fs::path trace_path = fs::path(cfg.output_dir) / "trace.csv";
    io::write_file(trace_path, csv.str());

    Index violations = 0;
    double max_ratio = 0.0;
    for (const TraceRow& row : trace.rows) {
        violations += row.err_x > row.delta_x + containment_slack(row.delta_x);
        violations += row.err_d > row.delta_d + containment_slack(row.delta_d);
        if (row.delta_x > 0.0) {
            max_ratio = std::max(max_ratio, row.err_x / row.delta_x);
        }
    }
    const TraceRow& last = trace.rows.back();
    std::ostringstream summary;
    summary << std::setprecision(17) << "{\n"
            << "  \"schema\": \"setobs.simulation/1\",\n"
            << "  \"seed\": " << scenario.seed << ",\n"
            << "  \"K\": " << scenario.K << ",\n"
            << "  \"radius_mode\": \"" << cfg.radius_mode << "\",\n"
            << "  \"violations\": " << violations << ",\n"
            << "  \"max_tightness_x\": " << max_ratio << ",\n"
            << "  \"final_delta_x\": " << last.delta_x << ",\n"
            << "  \"final_delta_d\": " << last.delta_d << "\n"
            << "}\n";
    io::write_file(fs::path(cfg.output_dir) / "summary.json", summary.str());

    out << "trace: " << trace_path.string() << "\n";
    out << "steps: " << trace.rows.size() << ", violations: " << violations << ", max ||x_err||/delta_x: " << max_ratio
        << "\n";
    out << "final radii: delta_x = " << last.delta_x << ", delta_d = " << last.delta_d << "\n";
    if (violations > 0) {
        throw ContainmentFailure("containment violated at " + std::to_string(violations) + " step(s)");
    }
    return kExitOk;
}

int cmd_campaign(const RunConfig& cfg, std::ostream& out) {
    if (cfg.trials < 1) {
        throw UsageError("--trials must be >= 1");
    }
    const Loaded loaded = load_and_decouple(cfg);
    const Scenario scenario = resolve_scenario(cfg);
    const ObserverContext ctx = load_context(cfg, loaded, out);

    CampaignOptions opts;
    opts.trials = cfg.trials;
    opts.seed = scenario.seed;
    opts.threads = cfg.threads;
    opts.theta_scale = cfg.negative_control ? 0.5 : 1.0;
    const CampaignReport report = containment_campaign(*loaded.model, ctx, {scenario}, opts);

    const fs::path path = fs::path(cfg.output_dir) / "campaign.json";
    io::write_file(path, io::dump_campaign(report));
    out << "trials: " << report.trials << ", steps checked: " << report.steps_checked
        << ", violations: " << report.violation_count << "\n";
    out << "tightness x: max " << report.max_ratio_x << ", mean " << report.mean_ratio_x << ", p95 "
        << report.p95_ratio_x << "\n";
    if (report.delta_x_inf) {
        out << "steady-state gap: " << report.max_steady_state_gap << "\n";
    }
    out << "report: " << path.string() << "\n";
    if (!report.passed()) {
        std::ostringstream os;
        os << report.violation_count << " containment violation(s); first:";
        for (std::size_t i = 0; i < std::min<std::size_t>(report.violations.size(), 5); ++i) {
            const Violation& v = report.violations[i];
            os << " [trial " << v.trial << ", seed " << v.seed << ", k " << v.k << ", " << v.kind << "]";
        }
        throw ContainmentFailure(os.str());
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"set-valued input and state observers for polytopic LPV systems", "setobs"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::uint64_t seed = 0;

    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--model", cfg.model_path, "model config")->required()->check(CLI::ExistingFile);
    };
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", cfg.output_dir, "output directory"); };
    auto add_run = [&](CLI::App* sub) {
        add_model(sub);
        sub->add_option("--scenario", cfg.scenario_path, "scenario config")->required()->check(CLI::ExistingFile);
        sub->add_option("--gains", cfg.gains_path, "gains file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "random seed (overrides the scenario)");
        sub->add_option("--radius-mode", cfg.radius_mode, "input radius mode")
            ->check(CLI::IsMember({"worst_case", "time_varying"}));
        add_out(sub);
    };

    CLI::App* check = app.add_subcommand("check", "strong detectability and model validation");
    add_model(check);
    add_out(check);

    CLI::App* synth = app.add_subcommand("synthesize", "observer gain synthesis");
    add_model(synth);
    synth->add_option("--mode", cfg.synthesis_mode, "optimal or convergent")
        ->check(CLI::IsMember({"optimal", "convergent"}));
    synth->add_flag("--force", cfg.force, "skip the strong-detectability pre-check");
    synth->add_option("--margin", cfg.margin, "LMI strictness margin relative to trace(S)")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--gains", cfg.gains_path, "gains output path (default <out>/gains.json)");
    add_out(synth);

    CLI::App* sim = app.add_subcommand("simulate", "simulate the plant and run the observer");
    add_run(sim);

    CLI::App* camp = app.add_subcommand("campaign", "Monte-Carlo containment campaign");
    add_run(camp);
    camp->add_option("--trials", cfg.trials, "number of trials");
    camp->add_flag("--negative-control", cfg.negative_control, "halve theta to check violation detection");
    camp->add_option("--threads", cfg.threads, "worker threads (0: hardware concurrency)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (sim->count("--seed") > 0 || camp->count("--seed") > 0) {
            cfg.seed = seed;
        }
        if (check->parsed()) {
            return cmd_check(cfg, out);
        }
        if (synth->parsed()) {
            return cmd_synthesize(cfg, out);
        }
        if (sim->parsed()) {
            return cmd_simulate(cfg, out);
        }
        return cmd_campaign(cfg, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ContainmentFailure& e) {
        err << "containment violation: " << e.what() << "\n";
        return kExitViolation;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << " [status: " << e.status() << "]\n";
        return kExitInfeasible;
    } catch (const ConvergenceError& e) {
        err << "convergent synthesis failed: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const io::ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInfeasible;
    }
}

}  // namespace setobs::cli
