#include "eccm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace eccm {

namespace {

Eigen::Index as_index(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_level(std::size_t level, std::size_t size, const char* what) {
  if (level >= size) {
    throw std::invalid_argument(std::string(what) + ": level index " + std::to_string(level) +
                                " out of range for grid of size " + std::to_string(size));
  }
}

void require_strategy(const Eigen::VectorXd& x, std::size_t size, const char* what) {
  if (static_cast<std::size_t>(x.size()) != size) {
    throw std::invalid_argument(std::string(what) + ": strategy has " + std::to_string(x.size()) +
                                " entries, grid has " + std::to_string(size));
  }
}

void validate_stochastic(const Eigen::MatrixXd& p, std::size_t m) {
  if (static_cast<std::size_t>(p.rows()) != m || static_cast<std::size_t>(p.cols()) != m) {
    throw std::invalid_argument("channel matrix must be " + std::to_string(m) + "x" +
                                std::to_string(m));
  }
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      const double v = p(r, c);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw std::invalid_argument("channel entry (" + std::to_string(r) + "," +
                                    std::to_string(c) + ") outside [0,1]");
      }
    }
    const double sum = p.row(r).sum();
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
      throw std::invalid_argument("channel row " + std::to_string(r) + " sums to " +
                                  std::to_string(sum));
    }
  }
}

}  // namespace

JammingGrid::JammingGrid(std::vector<double> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw std::invalid_argument("jamming grid must be non-empty");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (!std::isfinite(levels_[i]) || levels_[i] <= 0.0) {
      throw std::invalid_argument("jamming levels must be finite and positive");
    }
    if (i > 0 && levels_[i] < levels_[i - 1]) {
      throw std::invalid_argument("jamming levels must be non-decreasing");
    }
  }
}

Eigen::VectorXd JammingGrid::as_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(levels_.data(), as_index(levels_.size()));
}

Eigen::VectorXd JammingGrid::log_levels() const { return as_vector().array().log(); }

JammingChannel::JammingChannel(JammingGrid grid, Eigen::MatrixXd probabilities)
    : grid_(std::move(grid)), p_(std::move(probabilities)) {
  validate_stochastic(p_, grid_.size());
}

JammingChannel JammingChannel::normalized(JammingGrid grid, Eigen::MatrixXd raw,
                                          double max_row_defect) {
  for (Eigen::Index r = 0; r < raw.rows(); ++r) {
    if ((raw.row(r).array() < 0.0).any()) {
      throw std::invalid_argument("channel row " + std::to_string(r) + " has a negative entry");
    }
    const double sum = raw.row(r).sum();
    if (!(std::abs(sum - 1.0) <= max_row_defect)) {
      throw std::invalid_argument("channel row " + std::to_string(r) + " sums to " +
                                  std::to_string(sum) + ", too far from 1 to renormalize");
    }
    raw.row(r) /= sum;
  }
  return JammingChannel(std::move(grid), std::move(raw));
}

UtilityParams::UtilityParams(double c1, double c2) : c1_(c1), c2_(c2) {
  if (!(c1 > 0.0) || !(c2 > 0.0) || !std::isfinite(c1) || !std::isfinite(c2)) {
    throw std::invalid_argument("utility weights c1, c2 must be positive and finite");
  }
}

CovarianceSummary::CovarianceSummary(double value) : value_(value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("covariance summary must be positive and finite");
  }
}

LogStrategy::LogStrategy(Eigen::VectorXd values) : x(std::move(values)) {
  if (!x.allFinite()) throw std::invalid_argument("log strategy must be finite");
}

EccmStrategy::EccmStrategy(Eigen::VectorXd powers) : pi(std::move(powers)) {
  if (!pi.allFinite() || (pi.array() <= 0.0).any()) {
    throw std::invalid_argument("pulse powers must be positive and finite");
  }
}

EccmStrategy EccmStrategy::from_log(const LogStrategy& log_strategy) {
  return EccmStrategy(log_strategy.x.array().exp().matrix());
}

PapInstance::PapInstance(JammingChannel channel, UtilityParams params, CovarianceSummary sigma,
                         std::size_t target_level, std::optional<JammingChannel> jammer_belief)
    : channel_(std::move(channel)),
      params_(params),
      sigma_(sigma),
      target_(target_level),
      jammer_belief_(std::move(jammer_belief)) {
  require_level(target_, channel_.size(), "PapInstance");
  if (jammer_belief_) {
    if (jammer_belief_->grid().levels() != channel_.grid().levels()) {
      throw std::invalid_argument("jammer belief must share the radar's jamming grid");
    }
  }
}

PapInstance PapInstance::with_target(std::size_t level) const {
  return PapInstance(channel_, params_, sigma_, level, jammer_belief_);
}

double radar_utility(const LogStrategy& x, std::size_t level, const PapInstance& instance) {
  const auto m = instance.size();
  require_level(level, m, "radar_utility");
  require_strategy(x.x, m, "radar_utility");
  const double scale = instance.params().c1() * instance.sigma().value();
  const Eigen::VectorXd log_j = instance.channel().grid().log_levels();
  const auto row = instance.channel().probabilities().row(as_index(level));
  const Eigen::ArrayXd per_obs =
      scale * (x.x - log_j).array() - (2.0 * x.x.array()).exp();
  return row.dot(per_obs.matrix());
}

double jammer_utility(const LogStrategy& x, std::size_t level, const JammingChannel& channel,
                      const UtilityParams& params, CovarianceSummary sigma) {
  const auto m = channel.size();
  require_level(level, m, "jammer_utility");
  require_strategy(x.x, m, "jammer_utility");
  const Eigen::VectorXd log_j = channel.grid().log_levels();
  const auto row = channel.probabilities().row(as_index(level));
  const double j = channel.grid()[level];
  return params.c2() / sigma.value() * row.dot(log_j - x.x) - j * j;
}

double jammer_utility(const LogStrategy& x, std::size_t level, const PapInstance& instance) {
  return jammer_utility(x, level, instance.incentive_channel(), instance.params(),
                        instance.sigma());
}

std::vector<std::size_t> jammer_best_response(const LogStrategy& x, const PapInstance& instance,
                                              double tolerance) {
  const auto m = instance.size();
  std::vector<double> utility(m);
  for (std::size_t j = 0; j < m; ++j) utility[j] = jammer_utility(x, j, instance);
  const double best = *std::max_element(utility.begin(), utility.end());
  std::vector<std::size_t> argmax;
  for (std::size_t j = 0; j < m; ++j) {
    if (utility[j] >= best - tolerance) argmax.push_back(j);
  }
  return argmax;
}

double expected_snr(const EccmStrategy& pi, std::size_t level, const JammingChannel& channel) {
  require_level(level, channel.size(), "expected_snr");
  require_strategy(pi.pi, channel.size(), "expected_snr");
  const auto row = channel.probabilities().row(as_index(level));
  return row.dot(pi.pi) / row.dot(channel.grid().as_vector());
}

CovarianceSummary weighted_covariance(std::span<const CovarianceSummary> summaries,
                                      std::span<const double> weights) {
  if (summaries.empty() || summaries.size() != weights.size()) {
    throw std::invalid_argument("weighted_covariance: need one weight per summary");
  }
  if (std::any_of(weights.begin(), weights.end(), [](double w) { return !(w >= 0.0); })) {
    throw std::invalid_argument("weighted_covariance: weights must be nonnegative");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw std::invalid_argument("weighted_covariance: weights must sum to 1");
  }
  double value = 0.0;
  for (std::size_t i = 0; i < summaries.size(); ++i) value += weights[i] * summaries[i].value();
  return CovarianceSummary(value);
}

}  // namespace eccm
