#pragma once

#include <iosfwd>

namespace setobs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 2;  ///< infeasible, structural or config failure
inline constexpr int kExitViolation = 3;   ///< containment violated
inline constexpr int kExitUsage = 64;

/// Commands: check, synthesize, simulate, campaign.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace setobs::cli
