#include "eccm_cli/cli.hpp"

#include "logging.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>

namespace eccm::cli {

namespace {

using nlohmann::json;

constexpr int kCrossCheckTrajectories = 2000;
constexpr int kCrossCheckHorizon = 200;

void configure_logging() {
  const char* env = std::getenv("ECCM_LOG_LEVEL");
  const std::string level = env != nullptr ? env : "warn";
  auto lg = logger();
  if (level == "error") {
    lg->set_level(spdlog::level::err);
  } else if (level == "warn" || level.empty()) {
    lg->set_level(spdlog::level::warn);
  } else if (level == "info") {
    lg->set_level(spdlog::level::info);
  } else if (level == "debug") {
    lg->set_level(spdlog::level::debug);
  } else {
    lg->set_level(spdlog::level::warn);
    lg->warn("ECCM_LOG_LEVEL='{}' not recognized; using warn", level);
  }
}

// Writes through `emit` to the --out file, or to `out` when none was given.
void write_output(const std::string& path, std::ostream& out,
                  const std::function<void(std::ostream&)>& emit) {
  if (path.empty()) {
    emit(out);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  emit(file);
  file.flush();
  if (!file) throw std::runtime_error(fmt::format("failed writing '{}'", path));
  logger()->info("wrote {}", path);
}

int cmd_check(const SimulationConfig& config, std::optional<std::uint64_t> seed,
              const std::string& out_path, std::ostream& out) {
  const StructureReport report = check_structure(config.channel);
  json doc = structure_json(report);
  if (seed) {
    const TrackingModel& model = config.targets.front().model;
    const double snr = 1.0;
    const AreSolution are = solve_are(model, snr, config.are_options);
    const MonteCarloEstimate mc = monte_carlo_covariance(
        model, snr, kCrossCheckTrajectories, kCrossCheckHorizon, *seed, config.are_options);
    doc["covariance_cross_check"] = {
        {"snr_bar", snr},
        {"seed", *seed},
        {"trajectories", mc.trajectories},
        {"horizon", mc.horizon},
        {"are_lambda_max", are.lambda_max.value()},
        {"recursion_lambda_max", mc.recursion_lambda_max},
        {"monte_carlo_lambda_max", mc.empirical_lambda_max},
        {"relative_error",
         std::abs(mc.empirical_lambda_max - are.lambda_max.value()) / are.lambda_max.value()}};
  }
  write_output(out_path, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  if (!report.tp2.holds) logger()->warn("channel is not TP2");
  if (!report.tail.holds) logger()->warn("tail probabilities are not convex in the jamming level");
  return report.tp2.holds && report.tail.holds ? kExitOk : kExitStructure;
}

int cmd_solve(const SimulationConfig& config, std::optional<double> sigma_arg,
              const std::string& mode_arg, const std::string& out_path, std::ostream& out) {
  const StrategyClass mode = parse_mode(mode_arg);
  const CovarianceSummary sigma(sigma_arg.value_or(config.initial_sigma));
  std::optional<JammingChannel> belief;
  if (config.mismatch && config.mismatch->scenario == 2) belief = config.mismatch->jammer_belief;
  const PapOutcome outcome = solve_all_levels(config.channel, config.params, sigma, mode, belief,
                                              config.barrier_options);
  for (const auto& level : outcome.levels) {
    if (!level.solution) logger()->info("level {} cannot be incentivized", level.level);
  }
  const json doc = solution_json(outcome, config.channel, sigma, mode);
  write_output(out_path, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();

  CLI::App app{"Radar pulse-power contracts against a strategic jammer"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::vector<std::string> config_paths;
  std::string out_path;
  std::optional<double> sigma;
  std::string mode = "full";
  std::optional<std::uint64_t> seed;

  auto* check = app.add_subcommand("check", "Check the channel's structural conditions");
  auto* solve = app.add_subcommand("solve", "Solve the contract problem at one covariance level");
  auto* simulate = app.add_subcommand("simulate", "Run the closed-loop simulation");
  auto* mismatch = app.add_subcommand("mismatch", "Simulate with the jammer's channel estimate");
  auto* compare = app.add_subcommand("compare", "Run two configs and report the utility gap");

  for (auto* sub : {check, solve, simulate, mismatch}) {
    sub->add_option("--config", config_paths, "Config file (JSON)")->required()->expected(1);
    sub->add_option("--out", out_path, "Output file (default: standard output)");
  }
  compare->add_option("--config", config_paths, "Two config files (JSON), baseline first")
      ->required()
      ->expected(2);
  compare->add_option("--out", out_path, "Output file (default: standard output)");
  check->add_option("--seed", seed, "Also cross-check the covariance by Monte-Carlo");
  solve->add_option("--sigma", sigma, "Covariance summary (default: initial_sigma)")
      ->check(CLI::PositiveNumber);
  solve->add_option("--mode", mode, "Strategy class")
      ->check(CLI::IsMember({"full", "relaxed", "affine"}));

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*compare) {
      const SimulationConfig first = load_config(config_paths.at(0));
      const SimulationConfig second = load_config(config_paths.at(1));
      const ComparisonTrace trace = compare_jamming(first, second);
      write_output(out_path, out, [&](std::ostream& os) { write_compare_csv(trace, os); });
      return kExitOk;
    }
    const SimulationConfig config = load_config(config_paths.at(0));
    if (*check) return cmd_check(config, seed, out_path, out);
    if (*solve) return cmd_solve(config, sigma, mode, out_path, out);
    if (*simulate) {
      const SimulationTrace trace = run_simulation(config);
      write_output(out_path, out, [&](std::ostream& os) { write_trace_csv(trace, os); });
      return kExitOk;
    }
    if (*mismatch) {
      if (!config.mismatch) {
        throw ConfigError("/channel: mismatch needs P_hat or Delta in the channel section");
      }
      const MismatchTrace trace = run_mismatch(config);
      write_output(out_path, out, [&](std::ostream& os) { write_mismatch_csv(trace, os); });
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace eccm::cli
