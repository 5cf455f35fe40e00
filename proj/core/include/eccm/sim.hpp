#pragma once

// Closed-loop radar/jammer simulation. On the intermediate timescale the
// contract problem and the tracking covariance feed each other (the PAP
// output sets the expected SNR, the ARE at that SNR sets the next covariance
// summary); on the slow timescale the target maneuvers, Q_t = t * Q0.

#include "eccm/model.hpp"
#include "eccm/optimizer.hpp"
#include "eccm/pap.hpp"
#include "eccm/riccati.hpp"

#include <optional>
#include <vector>

namespace eccm {

/// One tracked target and its weight in the covariance summary.
struct WeightedTarget {
  TrackingModel model;
  double weight = 1.0;
};

struct MismatchSpec {
  /// The jammer's estimate of the channel.
  JammingChannel jammer_belief;
  /// 1: the loop is driven by the solution computed with the radar's own
  /// channel on both sides. 2: by the solution whose incentive constraints use
  /// the jammer's estimate.
  int scenario = 1;
};

struct SimulationConfig {
  SimulationConfig(TrackingModel model, JammingChannel channel, UtilityParams params);
  SimulationConfig(std::vector<WeightedTarget> targets, JammingChannel channel,
                   UtilityParams params);

  std::vector<WeightedTarget> targets;
  JammingChannel channel;
  UtilityParams params;
  int slow_horizon = 4;
  int intermediate_per_slow = 8;
  double initial_sigma = 1.0;
  StrategyClass strategy_mode = StrategyClass::Full;
  std::optional<MismatchSpec> mismatch;
  AreOptions are_options;
  BarrierOptions barrier_options;

  /// Throws std::invalid_argument on bad horizons, weights or dimensions.
  void validate() const;
};

struct TraceRecord {
  int t = 0;  // slow index, 1-based
  int n = 0;  // intermediate index within the block, 1-based
  double lambda_max = 0.0;
  double snr_bar = 0.0;
  std::size_t j_star = 0;
  Eigen::VectorXd pi_star;
  double radar_utility = 0.0;
  double jammer_utility = 0.0;
  double kkt_residual = 0.0;
};

struct SimulationTrace {
  std::vector<TraceRecord> records;
};

struct StepResult {
  PapSolution pap;
  double snr_bar = 0.0;
  std::vector<AreSolution> are;  // one per target
  CovarianceSummary next_sigma;
};

/// Solves the PAP at `sigma`, evaluates the expected SNR of the winner and
/// solves each target's ARE at that SNR with Q scaled by `maneuver_scale`.
StepResult step(CovarianceSummary sigma, const SimulationConfig& config, double maneuver_scale);

/// Runs slow_horizon x intermediate_per_slow records. An initial contract is
/// solved at initial_sigma to obtain the first SNR; every record then holds
/// the covariance summary produced by the ARE at the previous SNR and the
/// contract solved at that summary. The summary is carried across blocks.
SimulationTrace run_simulation(const SimulationConfig& config);

struct MismatchRecord {
  TraceRecord nominal;     // objective and incentives under the radar's channel
  TraceRecord mismatched;  // incentives under the jammer's estimate
  double radar_degradation = 0.0;
  double jammer_degradation = 0.0;
};

struct MismatchTrace {
  std::vector<MismatchRecord> records;
  /// Records of the scenario that drives the loop.
  SimulationTrace driving;
};

/// Requires config.mismatch.
MismatchTrace run_mismatch(const SimulationConfig& config);

struct ComparisonTrace {
  SimulationTrace first;
  SimulationTrace second;
  /// second.radar_utility - first.radar_utility per record.
  std::vector<double> utility_gap;
};

/// Runs both configs; they must have the same horizons.
ComparisonTrace compare_jamming(const SimulationConfig& first, const SimulationConfig& second);

}  // namespace eccm
