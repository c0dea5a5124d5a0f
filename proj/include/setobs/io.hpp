#pragma once

#include "setobs/detect.hpp"
#include "setobs/harness.hpp"

#include <filesystem>
#include <iosfwd>

namespace setobs::io {

inline constexpr const char* kModelSchema = "setobs.model/1";
inline constexpr const char* kScenarioSchema = "setobs.scenario/1";
inline constexpr const char* kGainsSchema = "setobs.gains/1";

/// Malformed or inconsistent configuration; the message names the file and field.
class ConfigError : public StructuralError {
public:
    using StructuralError::StructuralError;
};

/// Gains file contents: the certificate plus the error constants it implies.
struct GainsFile {
    SynthesisCertificate certificate;
    std::string mode;  ///< optimal | convergent
    double theta = 0.0;
    double beta = 0.0;
    double eta_bar = 0.0;
};

LpvModel parse_model(const std::string& text, const std::string& origin = "model");
LpvModel load_model(const std::filesystem::path& path);
std::string dump_model(const LpvModel& model);

/// Relative `samples.file` entries resolve against base_dir.
Scenario parse_scenario(const std::string& text, const std::string& origin = "scenario",
                        const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);
std::string dump_scenario(const Scenario& scenario);
/// True when the scenario text carries an explicit seed.
bool scenario_has_seed(const std::string& text);

GainsFile parse_gains(const std::string& text, const std::string& origin = "gains");
GainsFile load_gains(const std::filesystem::path& path);
std::string dump_gains(const SynthesisCertificate& cert, const ErrorConstants& constants, const std::string& mode);

std::string dump_detectability(const DetectabilityReport& report, const ValidationReport& validation);
std::string dump_campaign(const CampaignReport& report);

/// Header: k, x_true_1..n, x_hat_1..n, delta_x, err_x, d_true_1..p, d_hat_1..p,
/// delta_d, err_d, lambda_1..N; values at 17 significant digits.
void write_trace_csv(std::ostream& out, const SimulationTrace& trace, const Dimensions& dims);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace setobs::io
