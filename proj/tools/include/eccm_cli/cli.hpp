#pragma once

// Config loading, result serialization and subcommand dispatch for the
// `eccm` command-line tool.

#include "eccm/pap.hpp"
#include "eccm/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eccm::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitStructure = 2;

/// Bad config: syntax errors carry "line L, column C", validation errors a
/// JSON pointer to the offending value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SimulationConfig parse_config(std::string_view text);
SimulationConfig load_config(const std::filesystem::path& path);

StrategyClass parse_mode(std::string_view mode);

nlohmann::json structure_json(const StructureReport& report);
nlohmann::json solution_json(const PapOutcome& outcome, const JammingChannel& channel,
                             CovarianceSummary sigma, StrategyClass mode);

/// Checks a document produced by solution_json. Returns one message per
/// problem; empty when valid.
std::vector<std::string> validate_solution_json(const nlohmann::json& doc);

inline constexpr std::string_view kTraceHeader =
    "t,n,lambda_max,snr_bar,j_star,radar_utility,jammer_utility,kkt_residual";

void write_trace_csv(const SimulationTrace& trace, std::ostream& out);
void write_mismatch_csv(const MismatchTrace& trace, std::ostream& out);
void write_compare_csv(const ComparisonTrace& trace, std::ostream& out);

/// Full command line, e.g. {"eccm", "check", "--config", "x.json"}.
/// Results go to `out` (or to --out files), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eccm::cli
