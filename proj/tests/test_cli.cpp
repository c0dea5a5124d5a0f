#include "doctest.h"
#include "fixtures.hpp"
#include "setobs/cli.hpp"

#include <sstream>

using namespace setobs;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "setobs");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("setobs_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string data(const char* name) { return fixtures::data_path(name).string(); }

std::vector<std::vector<double>> read_csv(const fs::path& path) {
    std::istringstream in(io::read_file(path));
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            row.push_back(std::stod(cell));
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("check") {
    const fs::path dir = scratch("check");
    const Run ok = run({"check", "--model", data("example_model.json"), "--out", dir.string()});
    CHECK(ok.code == cli::kExitOk);
    CHECK(ok.out.find("vertex 1 ✓, vertex 2 ✓") != std::string::npos);
    CHECK(fs::exists(dir / "check.json"));

    CHECK(run({"check", "--model", data("nondetectable_model.json"), "--out", dir.string()}).code ==
          cli::kExitInfeasible);

    const fs::path broken = dir / "no_h.json";
    std::string text = io::read_file(data("example_model.json"));
    const auto pos = text.find("\"H\"");
    text.erase(pos, text.find("\"eta_w\"") - pos);
    io::write_file(broken, text);
    const Run missing = run({"check", "--model", broken.string(), "--out", dir.string()});
    CHECK(missing.code == cli::kExitInfeasible);
    CHECK(missing.err.find("`H`") != std::string::npos);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run({"check"}).code == cli::kExitUsage);
    CHECK(run({"synthesize", "--model", data("example_model.json"), "--mode", "fastest"}).code == cli::kExitUsage);
    CHECK(run({"check", "--model", "/nonexistent/model.json"}).code == cli::kExitUsage);
}

TEST_CASE("synthesize, simulate and campaign") {
    const fs::path dir = scratch("pipeline");
    const std::string gains = (dir / "gains.json").string();
    const Run syn = run({"synthesize", "--model", data("example_model.json"), "--gains", gains});
    REQUIRE(syn.code == cli::kExitOk);
    CHECK(syn.out.find("eta* = 15.38979") != std::string::npos);

    const io::GainsFile g = io::load_gains(gains);
    const DecoupledModel dm = decouple(io::load_model(data("example_model.json")));
    CHECK(verify_lmi(dm, g.certificate.S, g.certificate.Y, g.certificate.eta, g.certificate.margin_abs).ok);

    auto simulate = [&](const fs::path& out, const std::string& mode, const std::string& scenario) {
        return run({"simulate", "--model", data("example_model.json"), "--scenario", scenario, "--gains", gains,
                    "--seed", "42", "--radius-mode", mode, "--out", out.string()});
    };
    REQUIRE(simulate(dir / "a", "worst_case", data("example_scenario.json")).code == cli::kExitOk);
    REQUIRE(simulate(dir / "b", "worst_case", data("example_scenario.json")).code == cli::kExitOk);
    CHECK(io::read_file(dir / "a" / "trace.csv") == io::read_file(dir / "b" / "trace.csv"));

    REQUIRE(simulate(dir / "tv", "time_varying", data("example_scenario.json")).code == cli::kExitOk);
    const auto worst = read_csv(dir / "a" / "trace.csv");
    const auto tv = read_csv(dir / "tv" / "trace.csv");
    REQUIRE(worst.size() == 200);
    for (std::size_t k = 0; k < worst.size(); ++k) {
        CHECK(tv[k][11] <= worst[k][11]);  // delta_d column
    }

    REQUIRE(simulate(dir / "zero", "worst_case", data("zero_noise_scenario.json")).code == cli::kExitOk);
    for (const auto& row : read_csv(dir / "zero" / "trace.csv")) {
        CHECK(row[6] <= 1e-10);   // err_x
        CHECK(row[12] <= 1e-10);  // err_d
    }

    const std::vector<std::string> base = {"campaign", "--model", data("example_model.json"), "--scenario",
                                           data("example_scenario.json"), "--gains", gains, "--out",
                                           (dir / "camp").string()};
    auto with = [&](std::vector<std::string> extra) {
        std::vector<std::string> args = base;
        args.insert(args.end(), extra.begin(), extra.end());
        return run(args);
    };
    CHECK(with({"--trials", "20"}).code == cli::kExitOk);
    CHECK(with({"--trials", "0"}).code == cli::kExitUsage);
    const Run neg = with({"--trials", "5", "--negative-control"});
    CHECK(neg.code == cli::kExitViolation);
    CHECK(neg.err.find("seed") != std::string::npos);
}

TEST_CASE("synthesis failures exit 2") {
    const fs::path dir = scratch("failures");
    const Run refused = run({"synthesize", "--model", data("nondetectable_model.json"), "--out", dir.string()});
    CHECK(refused.code == cli::kExitInfeasible);
    const Run forced =
        run({"synthesize", "--model", data("nondetectable_model.json"), "--force", "--out", dir.string()});
    CHECK(forced.code == cli::kExitInfeasible);
    CHECK(forced.err.find("status: infeasible") != std::string::npos);
    const Run convergent =
        run({"synthesize", "--model", data("example_model.json"), "--mode", "convergent", "--out", dir.string()});
    CHECK(convergent.code == cli::kExitInfeasible);
    CHECK(convergent.err.find("convergent synthesis failed") != std::string::npos);
}

TEST_CASE("convergent pipeline reports steady-state radii") {
    const fs::path dir = scratch("convergent");
    const Run syn = run({"synthesize", "--model", data("convergent_model.json"), "--mode", "convergent", "--out",
                         dir.string()});
    REQUIRE(syn.code == cli::kExitOk);
    CHECK(syn.out.find("steady state: delta_x") != std::string::npos);
    CHECK(run({"campaign", "--model", data("convergent_model.json"), "--scenario", data("convergent_scenario.json"),
               "--gains", (dir / "gains.json").string(), "--trials", "20", "--out", dir.string()})
              .code == cli::kExitOk);
}

TEST_CASE("gains for another model are rejected") {
    const fs::path dir = scratch("mismatch");
    REQUIRE(run({"synthesize", "--model", data("convergent_model.json"), "--out", dir.string()}).code == 0);
    CHECK(run({"simulate", "--model", data("example_model.json"), "--scenario", data("example_scenario.json"), "--gains",
               (dir / "gains.json").string(), "--out", dir.string()})
              .code == cli::kExitInfeasible);
}
