#pragma once

// Shared domain types for the radar/jammer contract problem, plus the
// utility, SNR and best-response evaluators used by every other module.
//
// Indices into the jamming grid are zero-based throughout the library.

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace eccm {

/// Row-sum tolerance for stochastic matrices.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Finite set of jamming powers j_1 <= ... <= j_M in linear power units.
class JammingGrid {
 public:
  explicit JammingGrid(std::vector<double> levels);

  [[nodiscard]] std::size_t size() const { return levels_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return levels_[i]; }
  [[nodiscard]] const std::vector<double>& levels() const { return levels_; }
  [[nodiscard]] Eigen::VectorXd as_vector() const;
  [[nodiscard]] Eigen::VectorXd log_levels() const;

 private:
  std::vector<double> levels_;
};

/// Observation channel: probabilities()(m, n) = Prob(radar observes j_n | true power j_m).
class JammingChannel {
 public:
  /// Requires every entry in [0, 1] and every row summing to one within
  /// kProbabilityTolerance.
  JammingChannel(JammingGrid grid, Eigen::MatrixXd probabilities);

  /// Rescales each row to sum to one. Rows whose raw sum is off by more than
  /// `max_row_defect` are rejected; use this for matrices published with a
  /// few decimal digits.
  static JammingChannel normalized(JammingGrid grid, Eigen::MatrixXd raw,
                                   double max_row_defect);

  [[nodiscard]] const JammingGrid& grid() const { return grid_; }
  [[nodiscard]] const Eigen::MatrixXd& probabilities() const { return p_; }
  [[nodiscard]] std::size_t size() const { return grid_.size(); }
  [[nodiscard]] double prob(std::size_t true_level, std::size_t observed) const {
    return p_(static_cast<Eigen::Index>(true_level),
              static_cast<Eigen::Index>(observed));
  }

 private:
  JammingGrid grid_;
  Eigen::MatrixXd p_;
};

/// Reward weights: c1 scales the radar's log-SNR reward, c2 the jammer's.
class UtilityParams {
 public:
  UtilityParams(double c1, double c2);

  [[nodiscard]] double c1() const { return c1_; }
  [[nodiscard]] double c2() const { return c2_; }

 private:
  double c1_;
  double c2_;
};

/// Scalar summary (largest eigenvalue) of the steady-state tracking covariance.
class CovarianceSummary {
 public:
  explicit CovarianceSummary(double value);

  [[nodiscard]] double value() const { return value_; }

  friend bool operator==(const CovarianceSummary&, const CovarianceSummary&) = default;

 private:
  double value_;
};

/// x_m = log of the pulse power used when the radar observes j_m.
struct LogStrategy {
  Eigen::VectorXd x;

  explicit LogStrategy(Eigen::VectorXd values);
};

/// Pulse power per observed jamming level.
struct EccmStrategy {
  Eigen::VectorXd pi;

  explicit EccmStrategy(Eigen::VectorXd powers);
  static EccmStrategy from_log(const LogStrategy& log_strategy);
};

/// One contract problem: the radar's channel and utilities, the covariance
/// summary that scales the rewards, and the jamming level to incentivize.
///
/// `jammer_belief` is the jammer's model of the channel. When set, incentive
/// constraints and the jammer's utility are evaluated under it while the
/// radar's objective stays under `channel`.
class PapInstance {
 public:
  PapInstance(JammingChannel channel, UtilityParams params, CovarianceSummary sigma,
              std::size_t target_level,
              std::optional<JammingChannel> jammer_belief = std::nullopt);

  [[nodiscard]] const JammingChannel& channel() const { return channel_; }
  [[nodiscard]] const JammingChannel& incentive_channel() const {
    return jammer_belief_ ? *jammer_belief_ : channel_;
  }
  [[nodiscard]] bool has_jammer_belief() const { return jammer_belief_.has_value(); }
  [[nodiscard]] const UtilityParams& params() const { return params_; }
  [[nodiscard]] CovarianceSummary sigma() const { return sigma_; }
  [[nodiscard]] std::size_t target_level() const { return target_; }
  [[nodiscard]] std::size_t size() const { return channel_.size(); }

  [[nodiscard]] PapInstance with_target(std::size_t level) const;

 private:
  JammingChannel channel_;
  UtilityParams params_;
  CovarianceSummary sigma_;
  std::size_t target_;
  std::optional<JammingChannel> jammer_belief_;
};

/// Radar utility in log-strategy form:
///   sum_m P[j][m] * (c1 * sigma * (x_m - log j_m) - exp(2 x_m)).
double radar_utility(const LogStrategy& x, std::size_t level, const PapInstance& instance);

/// Jammer utility under the instance's incentive channel:
///   (c2 / sigma) * sum_m P[j][m] * (log j_m - x_m) - j^2.
double jammer_utility(const LogStrategy& x, std::size_t level, const PapInstance& instance);

/// Same, with an explicit channel.
double jammer_utility(const LogStrategy& x, std::size_t level, const JammingChannel& channel,
                      const UtilityParams& params, CovarianceSummary sigma);

/// All levels whose jammer utility is within `tolerance` of the maximum
/// (weak-inequality convention), in ascending order.
std::vector<std::size_t> jammer_best_response(const LogStrategy& x, const PapInstance& instance,
                                              double tolerance = 0.0);

/// Expected SNR: E[pi_R | J] / E[R | J].
double expected_snr(const EccmStrategy& pi, std::size_t level, const JammingChannel& channel);

/// Convex combination of per-target covariance summaries.
CovarianceSummary weighted_covariance(std::span<const CovarianceSummary> summaries,
                                      std::span<const double> weights);

}  // namespace eccm
