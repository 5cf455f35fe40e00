#include "eccm/presets.hpp"
#include "eccm/sim.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace eccm;

namespace {

JammingChannel single_level(double j) {
  return JammingChannel(JammingGrid({j}), Eigen::MatrixXd::Ones(1, 1));
}

void expect_rel(double actual, double expected, double rel) {
  EXPECT_NEAR(actual, expected, rel * std::max(1.0, std::abs(expected)));
}

struct FrozenRecord {
  std::size_t index;
  double lambda, snr;
  std::size_t j;
  double radar, jammer;
};

// From a separate numpy implementation of the same loop (ARE by fixed-point
// iteration, contract by active-set enumeration).
void expect_trace(const SimulationTrace& trace, std::initializer_list<FrozenRecord> frozen) {
  for (const auto& f : frozen) {
    const TraceRecord& r = trace.records.at(f.index);
    expect_rel(r.lambda_max, f.lambda, 1e-7);
    expect_rel(r.snr_bar, f.snr, 1e-7);
    EXPECT_EQ(r.j_star, f.j);
    expect_rel(r.radar_utility, f.radar, 1e-7);
    expect_rel(r.jammer_utility, f.jammer, 1e-7);
  }
}

}  // namespace

TEST(Step, MemorylessSingleLevel) {
  // A = 0 and Q = 1: the covariance is the process noise whatever the SNR.
  const KinematicsModel m(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1),
                          Eigen::MatrixXd::Ones(1, 1), 1.0);
  const SimulationConfig config(m, single_level(1.0), UtilityParams(2.0, 1.0));
  const StepResult r = step(CovarianceSummary(1.0), config, 1.0);
  EXPECT_NEAR(r.pap.x_star.x(0), 0.0, 1e-10);
  EXPECT_NEAR(r.snr_bar, 1.0, 1e-10);
  EXPECT_DOUBLE_EQ(r.next_sigma.value(), 1.0);
  ASSERT_EQ(r.are.size(), 1u);
}

TEST(Step, ComposesContractAndRiccati) {
  for (const SimulationConfig& config : {presets::barrage_config(), presets::deception_config()}) {
    const StepResult r = step(CovarianceSummary(1.3), config, 2.0);
    const PapSolution pap = solve_pap(config.channel, config.params, CovarianceSummary(1.3));
    EXPECT_EQ(r.pap.x_star.x, pap.x_star.x);
    const double snr = expected_snr(pap.pi_star, pap.j_star, config.channel);
    EXPECT_EQ(r.snr_bar, snr);
    const TrackingModel& model = config.targets.front().model;
    const double lam = std::visit(
        [&](const auto& mm) {
          return solve_are(mm.with_process_noise(2.0 * mm.q()), snr).lambda_max.value();
        },
        model);
    EXPECT_EQ(r.next_sigma.value(), lam);
  }
}

TEST(Step, RejectsBadManeuverScale) {
  EXPECT_THROW(step(CovarianceSummary(1.0), presets::barrage_config(), 0.0),
               std::invalid_argument);
}

TEST(RunSimulation, BarrageTrace) {
  const SimulationTrace trace = run_simulation(presets::barrage_config());
  ASSERT_EQ(trace.records.size(), 32u);
  EXPECT_EQ(trace.records[0].t, 1);
  EXPECT_EQ(trace.records[0].n, 1);
  EXPECT_EQ(trace.records[31].t, 4);
  EXPECT_EQ(trace.records[31].n, 8);
  expect_trace(trace, {
                          {0, 1.686783781466232, 4.100985864084297, 0, 153.92515107199804,
                           -8375.139963149353},
                          {7, 1.5637006560746955, 3.9482537969998837, 0, 136.74359736298302,
                           -8790.962737066708},
                          {31, 4.382086816788494, 6.62006179668916, 0, 610.6404197993921,
                           -4321.98306180436},
                      });
  for (const auto& r : trace.records) EXPECT_LE(r.kkt_residual, 1e-6);
}

TEST(RunSimulation, DeceptionTrace) {
  expect_trace(run_simulation(presets::deception_config()),
               {
                   {0, 1.26896387022019, 3.556151743101033, 0, 97.66761725768497,
                    -10006.519597005145},
                   {7, 1.2419636027799401, 3.518061593154854, 0, 94.24945381153056,
                    -10137.16277777934},
                   {31, 4.135237969849074, 6.4300026365226435, 0, 564.117926516784,
                    -4509.018254391491},
               });
}

TEST(RunSimulation, AffineTrace) {
  SimulationConfig config = presets::barrage_config();
  config.strategy_mode = StrategyClass::Affine;
  expect_trace(run_simulation(config),
               {
                   {0, 1.7321628154643522, 3.8627625585813385, 1, 148.94653106999888,
                    -7854.806973290978},
                   {7, 1.596026489811835, 3.7075589401064946, 1, 130.68148937441234,
                    -8266.975225057853},
                   {31, 4.408858450220263, 6.17256032637026, 1, 586.5109187156322,
                    -4155.41721446164},
               });
}

TEST(RunSimulation, Deterministic) {
  const SimulationTrace a = run_simulation(presets::deception_config());
  const SimulationTrace b = run_simulation(presets::deception_config());
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].lambda_max, b.records[i].lambda_max);
    EXPECT_EQ(a.records[i].pi_star, b.records[i].pi_star);
    EXPECT_EQ(a.records[i].radar_utility, b.records[i].radar_utility);
  }
}

TEST(RunSimulation, BlocksSettle) {
  const SimulationTrace trace = run_simulation(presets::barrage_config());
  for (int t = 0; t < 4; ++t) {
    const auto& last = trace.records[static_cast<std::size_t>(8 * t + 7)];
    const auto& prev = trace.records[static_cast<std::size_t>(8 * t + 6)];
    EXPECT_LE(std::abs(last.snr_bar - prev.snr_bar), 1e-3 * last.snr_bar);
  }
  // Harder maneuvers need more power: the settled SNR grows across blocks.
  for (int t = 1; t < 4; ++t) {
    EXPECT_GT(trace.records[static_cast<std::size_t>(8 * t + 7)].snr_bar,
              trace.records[static_cast<std::size_t>(8 * t - 1)].snr_bar);
  }
}

TEST(RunSimulation, HorizonsShapeTheTrace) {
  SimulationConfig config = presets::barrage_config();
  config.slow_horizon = 2;
  config.intermediate_per_slow = 3;
  const SimulationTrace trace = run_simulation(config);
  ASSERT_EQ(trace.records.size(), 6u);
  EXPECT_EQ(trace.records[5].t, 2);
  EXPECT_EQ(trace.records[5].n, 3);
  // Shorter runs are prefixes of longer ones within the first block.
  const SimulationTrace full = run_simulation(presets::barrage_config());
  EXPECT_EQ(trace.records[2].lambda_max, full.records[2].lambda_max);
}

TEST(RunSimulation, MultiTargetWeighting) {
  const KinematicsModel m = presets::barrage_model();
  SimulationConfig config({WeightedTarget{m, 0.25}, WeightedTarget{m.with_process_noise(2.0 * m.q()), 0.75}},
                          presets::reference_channel(), presets::reference_params());
  config.slow_horizon = 1;
  config.intermediate_per_slow = 2;
  const StepResult r = step(CovarianceSummary(1.0), config, 1.0);
  ASSERT_EQ(r.are.size(), 2u);
  EXPECT_NEAR(r.next_sigma.value(),
              0.25 * r.are[0].lambda_max.value() + 0.75 * r.are[1].lambda_max.value(), 1e-12);
  EXPECT_EQ(run_simulation(config).records.size(), 2u);
}

TEST(SimulationConfig, Validation) {
  SimulationConfig config = presets::barrage_config();
  EXPECT_NO_THROW(config.validate());
  config.slow_horizon = 0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = presets::barrage_config();
  config.strategy_mode = StrategyClass::Relaxed;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = presets::barrage_config();
  config.initial_sigma = -1.0;
  EXPECT_THROW(config.validate(), std::invalid_argument);

  const KinematicsModel m = presets::barrage_model();
  SimulationConfig weights({WeightedTarget{m, 0.5}, WeightedTarget{m, 0.4}},
                           presets::reference_channel(), presets::reference_params());
  EXPECT_THROW(weights.validate(), std::invalid_argument);
  SimulationConfig dims({WeightedTarget{m, 0.5}, WeightedTarget{KinematicsModel::constant_velocity(1, 2), 0.5}},
                        presets::reference_channel(), presets::reference_params());
  EXPECT_THROW(dims.validate(), std::invalid_argument);

  config = presets::mismatch_config();
  config.mismatch->scenario = 3;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = presets::barrage_config();
  config.mismatch = MismatchSpec{single_level(1.0), 1};
  EXPECT_THROW(config.validate(), std::invalid_argument);
}

TEST(RunMismatch, ReferenceDegradations) {
  const MismatchTrace trace = run_mismatch(presets::mismatch_config());
  ASSERT_EQ(trace.records.size(), 32u);
  const std::tuple<std::size_t, double, double, double> frozen[] = {
      {0, 1.686783781466232, 18.81349452502576, 145.06371715881141},
      {7, 1.5637006560746955, 17.42974848522465, 156.1762663197478},
      {31, 4.382086816788494, 49.52192390678829, 58.09592639037146},
  };
  for (const auto& [i, lambda, radar, jammer] : frozen) {
    expect_rel(trace.records[i].nominal.lambda_max, lambda, 1e-7);
    expect_rel(trace.records[i].radar_degradation, radar, 1e-6);
    expect_rel(trace.records[i].jammer_degradation, jammer, 1e-6);
    EXPECT_EQ(trace.records[i].mismatched.j_star, 0u);
  }
  // Scenario 1 is driven by the nominal contract, so it replays the plain run.
  const SimulationTrace plain = run_simulation(presets::barrage_config());
  for (std::size_t i = 0; i < 32; ++i) {
    EXPECT_EQ(trace.driving.records[i].lambda_max, plain.records[i].lambda_max);
  }
}

TEST(RunMismatch, ExactBeliefHasNoDegradation) {
  SimulationConfig config = presets::barrage_config();
  config.mismatch = MismatchSpec{presets::reference_channel(), 2};
  const MismatchTrace trace = run_mismatch(config);
  const SimulationTrace plain = run_simulation(presets::barrage_config());
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    EXPECT_EQ(trace.records[i].radar_degradation, 0.0);
    EXPECT_EQ(trace.records[i].jammer_degradation, 0.0);
    EXPECT_EQ(trace.driving.records[i].radar_utility, plain.records[i].radar_utility);
  }
}

TEST(RunMismatch, TwoLevelDegradationsAgreeWithGrid) {
  Eigen::Matrix2d p, p_hat;
  p << 0.7, 0.3, 0.4, 0.6;
  p_hat << 0.6, 0.4, 0.45, 0.55;
  const double grid[] = {1.0, 2.0};
  const double c1 = 10.0, c2 = 5.0, sigma = 1.5;
  const JammingChannel channel(JammingGrid({1.0, 2.0}), p);
  const JammingChannel belief(JammingGrid({1.0, 2.0}), p_hat);
  const UtilityParams params(c1, c2);

  // Winner and utilities from the grid oracle; ties go to the lower level.
  struct Outcome {
    double radar, jammer;
  };
  auto oracle = [&](const Eigen::Matrix2d& ic) {
    Outcome best{-INFINITY, 0.0};
    for (std::size_t target = 0; target < 2; ++target) {
      const std::size_t other = 1 - target;
      oracle::TwoLevelProblem pr{{p(target, 0), p(target, 1)}, {p(other, 0), p(other, 1)},
                                 {grid[0], grid[1]}, target, c1, c2, sigma,
                                 std::array<double, 2>{ic(target, 0), ic(target, 1)},
                                 std::array<double, 2>{ic(other, 0), ic(other, 1)}};
      const oracle::GridResult g = oracle::grid_search_two_level(pr);
      if (!g.feasible || !(g.value > best.radar)) continue;
      double psi = -grid[target] * grid[target];
      for (int m = 0; m < 2; ++m) psi += c2 / sigma * ic(target, m) * (std::log(grid[m]) - g.x[m]);
      best = {g.value, psi};
    }
    return best;
  };
  const Outcome nominal = oracle(p);
  const Outcome mismatched = oracle(p_hat);

  const PapSolution nom = solve_pap(channel, params, CovarianceSummary(sigma));
  const PapSolution mm = solve_pap(channel, params, CovarianceSummary(sigma),
                                   StrategyClass::Full, belief);
  ASSERT_LE(nom.x_star.x.cwiseAbs().maxCoeff(), 5.0);
  ASSERT_LE(mm.x_star.x.cwiseAbs().maxCoeff(), 5.0);
  EXPECT_GT(std::abs(mismatched.jammer - nominal.jammer), 1e-3);  // the estimate matters
  EXPECT_NEAR(mm.radar_value - nom.radar_value, mismatched.radar - nominal.radar, 1e-4);
  EXPECT_NEAR(nom.jammer_value - mm.jammer_value, nominal.jammer - mismatched.jammer, 1e-4);
}

TEST(RunMismatch, RequiresMismatchSection) {
  EXPECT_THROW(run_mismatch(presets::barrage_config()), std::invalid_argument);
}

TEST(CompareJamming, IdenticalConfigsHaveNoGap) {
  const ComparisonTrace c = compare_jamming(presets::barrage_config(), presets::barrage_config());
  ASSERT_EQ(c.utility_gap.size(), 32u);
  for (double g : c.utility_gap) EXPECT_EQ(g, 0.0);
}

TEST(CompareJamming, DeceptionCostsTheRadar) {
  const ComparisonTrace c =
      compare_jamming(presets::barrage_config(), presets::deception_config());
  for (double g : c.utility_gap) EXPECT_LT(g, 0.0);
}

TEST(CompareJamming, AffineNeverBeatsFullAtTheSameSummary) {
  SimulationConfig affine = presets::barrage_config();
  affine.strategy_mode = StrategyClass::Affine;
  const SimulationTrace a = run_simulation(affine);
  for (const auto& r : a.records) {
    const PapSolution full = solve_pap(affine.channel, affine.params, CovarianceSummary(r.lambda_max));
    EXPECT_LE(r.radar_utility, full.radar_value + 1e-9);
  }
}

TEST(CompareJamming, HorizonsMustMatch) {
  SimulationConfig other = presets::barrage_config();
  other.slow_horizon = 3;
  EXPECT_THROW(compare_jamming(presets::barrage_config(), other), std::invalid_argument);
}
