#include "eccm/sim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace eccm {

namespace {

TrackingModel scaled(const TrackingModel& model, double scale) {
  return std::visit(
      [scale](const auto& m) -> TrackingModel { return m.with_process_noise(scale * m.q()); },
      model);
}

Eigen::Index block_dim(const TrackingModel& model) {
  return std::visit([](const auto& m) { return m.state_dim(); }, model);
}

struct Stage {
  PapSolution pap;
  double snr_bar;
};

Stage solve_stage(CovarianceSummary sigma, const SimulationConfig& config,
                  const std::optional<JammingChannel>& belief) {
  PapSolution sol = solve_pap(config.channel, config.params, sigma, config.strategy_mode, belief,
                              config.barrier_options);
  const double snr = expected_snr(sol.pi_star, sol.j_star, config.channel);
  return Stage{std::move(sol), snr};
}

CovarianceSummary summarize(const SimulationConfig& config, double snr, double maneuver_scale,
                            std::vector<AreSolution>* out) {
  std::vector<CovarianceSummary> summaries;
  std::vector<double> weights;
  for (const auto& target : config.targets) {
    AreSolution are = solve_are(scaled(target.model, maneuver_scale), snr, config.are_options);
    summaries.push_back(are.lambda_max);
    weights.push_back(target.weight);
    if (out != nullptr) out->push_back(std::move(are));
  }
  if (summaries.size() == 1) return summaries.front();
  return weighted_covariance(summaries, weights);
}

TraceRecord make_record(int t, int n, CovarianceSummary sigma, const Stage& stage) {
  TraceRecord r;
  r.t = t;
  r.n = n;
  r.lambda_max = sigma.value();
  r.snr_bar = stage.snr_bar;
  r.j_star = stage.pap.j_star;
  r.pi_star = stage.pap.pi_star.pi;
  r.radar_utility = stage.pap.radar_value;
  r.jammer_utility = stage.pap.jammer_value;
  r.kkt_residual = stage.pap.kkt_residual;
  return r;
}

std::optional<JammingChannel> driving_belief(const SimulationConfig& config) {
  if (config.mismatch && config.mismatch->scenario == 2) return config.mismatch->jammer_belief;
  return std::nullopt;
}

}  // namespace

SimulationConfig::SimulationConfig(TrackingModel model, JammingChannel channel_in,
                                   UtilityParams params_in)
    : targets{WeightedTarget{std::move(model), 1.0}},
      channel(std::move(channel_in)),
      params(params_in) {}

SimulationConfig::SimulationConfig(std::vector<WeightedTarget> targets_in,
                                   JammingChannel channel_in, UtilityParams params_in)
    : targets(std::move(targets_in)), channel(std::move(channel_in)), params(params_in) {}

void SimulationConfig::validate() const {
  if (slow_horizon < 1 || intermediate_per_slow < 1) {
    throw std::invalid_argument("simulation horizons must be at least 1");
  }
  if (!(initial_sigma > 0.0) || !std::isfinite(initial_sigma)) {
    throw std::invalid_argument("initial_sigma must be positive and finite");
  }
  if (strategy_mode == StrategyClass::Relaxed) {
    throw std::invalid_argument("the simulation runs in full or affine mode");
  }
  if (targets.empty()) throw std::invalid_argument("at least one target is required");
  double total = 0.0;
  for (const auto& target : targets) {
    if (!(target.weight >= 0.0) || !std::isfinite(target.weight)) {
      throw std::invalid_argument("target weights must be nonnegative");
    }
    total += target.weight;
  }
  if (targets.size() > 1 && std::abs(total - 1.0) > kProbabilityTolerance) {
    throw std::invalid_argument("target weights must sum to one");
  }
  const Eigen::Index dim = block_dim(targets.front().model);
  for (const auto& target : targets) {
    if (block_dim(target.model) != dim) {
      throw std::invalid_argument("all targets must share the state dimension");
    }
  }
  if (mismatch) {
    if (mismatch->scenario != 1 && mismatch->scenario != 2) {
      throw std::invalid_argument("mismatch scenario must be 1 or 2");
    }
    if (mismatch->jammer_belief.grid().levels() != channel.grid().levels()) {
      throw std::invalid_argument("the jammer's channel estimate must use the same grid");
    }
  }
}

StepResult step(CovarianceSummary sigma, const SimulationConfig& config, double maneuver_scale) {
  config.validate();
  if (!(maneuver_scale > 0.0)) throw std::invalid_argument("maneuver scale must be positive");
  Stage stage = solve_stage(sigma, config, driving_belief(config));
  std::vector<AreSolution> are;
  const CovarianceSummary next = summarize(config, stage.snr_bar, maneuver_scale, &are);
  return StepResult{std::move(stage.pap), stage.snr_bar, std::move(are), next};
}

SimulationTrace run_simulation(const SimulationConfig& config) {
  config.validate();
  const auto belief = driving_belief(config);
  SimulationTrace trace;
  trace.records.reserve(
      static_cast<std::size_t>(config.slow_horizon * config.intermediate_per_slow));
  Stage prev = solve_stage(CovarianceSummary(config.initial_sigma), config, belief);
  for (int t = 1; t <= config.slow_horizon; ++t) {
    for (int n = 1; n <= config.intermediate_per_slow; ++n) {
      const CovarianceSummary sigma = summarize(config, prev.snr_bar, t, nullptr);
      Stage cur = solve_stage(sigma, config, belief);
      trace.records.push_back(make_record(t, n, sigma, cur));
      prev = std::move(cur);
    }
  }
  return trace;
}

MismatchTrace run_mismatch(const SimulationConfig& config) {
  config.validate();
  if (!config.mismatch) throw std::invalid_argument("run_mismatch needs a mismatch section");
  const JammingChannel& belief = config.mismatch->jammer_belief;
  const bool second_drives = config.mismatch->scenario == 2;

  MismatchTrace out;
  CovarianceSummary sigma(config.initial_sigma);
  Stage nominal = solve_stage(sigma, config, std::nullopt);
  Stage mismatched = solve_stage(sigma, config, belief);
  for (int t = 1; t <= config.slow_horizon; ++t) {
    for (int n = 1; n <= config.intermediate_per_slow; ++n) {
      const double snr = second_drives ? mismatched.snr_bar : nominal.snr_bar;
      sigma = summarize(config, snr, t, nullptr);
      nominal = solve_stage(sigma, config, std::nullopt);
      mismatched = solve_stage(sigma, config, belief);

      MismatchRecord rec;
      rec.nominal = make_record(t, n, sigma, nominal);
      rec.mismatched = make_record(t, n, sigma, mismatched);
      // Both radar utilities are already under the radar's channel; the
      // mismatched jammer utility is under the jammer's estimate.
      rec.radar_degradation = rec.mismatched.radar_utility - rec.nominal.radar_utility;
      rec.jammer_degradation = rec.nominal.jammer_utility - rec.mismatched.jammer_utility;
      out.driving.records.push_back(second_drives ? rec.mismatched : rec.nominal);
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

ComparisonTrace compare_jamming(const SimulationConfig& first, const SimulationConfig& second) {
  if (first.slow_horizon != second.slow_horizon ||
      first.intermediate_per_slow != second.intermediate_per_slow) {
    throw std::invalid_argument("compared configs must share their horizons");
  }
  ComparisonTrace out;
  out.first = run_simulation(first);
  out.second = run_simulation(second);
  out.utility_gap.reserve(out.first.records.size());
  for (std::size_t i = 0; i < out.first.records.size(); ++i) {
    out.utility_gap.push_back(out.second.records[i].radar_utility -
                              out.first.records[i].radar_utility);
  }
  return out;
}

}  // namespace eccm
