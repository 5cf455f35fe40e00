#pragma once

// Steady-state tracking covariance for the barrage and deception jamming
// models, via fixed-point iteration of the Kalman predicted-covariance
// recursion, plus a Monte-Carlo Kalman-filter cross-check.

#include "eccm/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <variant>

namespace eccm {

/// x_{k+1} = A x_k + w_k, w_k ~ N(0, Q);  y_k = C x_k + v_k, v_k ~ N(0, I / snr).
class KinematicsModel {
 public:
  KinematicsModel(Eigen::MatrixXd a, Eigen::MatrixXd q, Eigen::MatrixXd c,
                  double sampling_period);

  /// Nearly-constant-velocity model over `axes` axes with position/velocity
  /// pairs, Q = I and C = I.
  static KinematicsModel constant_velocity(double sampling_period, int axes = 3);

  [[nodiscard]] const Eigen::MatrixXd& a() const { return a_; }
  [[nodiscard]] const Eigen::MatrixXd& q() const { return q_; }
  [[nodiscard]] const Eigen::MatrixXd& c() const { return c_; }
  [[nodiscard]] double sampling_period() const { return t_; }
  [[nodiscard]] Eigen::Index state_dim() const { return a_.rows(); }

  [[nodiscard]] KinematicsModel with_process_noise(Eigen::MatrixXd q) const;

 private:
  Eigen::MatrixXd a_, q_, c_;
  double t_;
};

/// Target state x and designed interference z:
///   [x; z]_{k+1} = [[A, 0], [B1, B2]] [x; z]_k + [w_k; v_k],  v_k ~ N(0, I / snr)
///   y_k = C1 x_k + C2 z_k
class DeceptionModel {
 public:
  DeceptionModel(Eigen::MatrixXd a, Eigen::MatrixXd b1, Eigen::MatrixXd b2, Eigen::MatrixXd c1,
                 Eigen::MatrixXd c2, Eigen::MatrixXd q, double sampling_period);

  [[nodiscard]] const Eigen::MatrixXd& a() const { return a_; }
  [[nodiscard]] const Eigen::MatrixXd& b1() const { return b1_; }
  [[nodiscard]] const Eigen::MatrixXd& b2() const { return b2_; }
  [[nodiscard]] const Eigen::MatrixXd& c1() const { return c1_; }
  [[nodiscard]] const Eigen::MatrixXd& c2() const { return c2_; }
  [[nodiscard]] const Eigen::MatrixXd& q() const { return q_; }
  [[nodiscard]] double sampling_period() const { return t_; }
  [[nodiscard]] Eigen::Index state_dim() const { return a_.rows(); }

  [[nodiscard]] DeceptionModel with_process_noise(Eigen::MatrixXd q) const;

  /// Augmented transition [[A, 0], [B1, B2]].
  [[nodiscard]] Eigen::MatrixXd augmented_transition() const;
  /// Augmented measurement [C1, C2].
  [[nodiscard]] Eigen::MatrixXd augmented_measurement() const;

 private:
  Eigen::MatrixXd a_, b1_, b2_, c1_, c2_, q_;
  double t_;
};

using TrackingModel = std::variant<KinematicsModel, DeceptionModel>;

struct AreOptions {
  int max_iterations = 10000;
  double step_tolerance = 1e-12;      // relative: ||S_{k+1} - S_k|| <= tol * (1 + ||S_k||)
  double residual_tolerance = 1e-10;  // relative to 1 + ||S||
  double overflow_guard = 1e12;
  double innovation_regularization = 1e-9;  // deception model only
};

struct AreSolution {
  Eigen::MatrixXd sigma_matrix;  // full predicted-covariance fixed point
  CovarianceSummary lambda_max;  // of the target-state block
  int iterations = 0;
  double residual = 0.0;
};

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularInnovation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solves S = A (S - S C' (C S C' + I/snr)^{-1} C S) A' + Q starting from S = Q.
AreSolution solve_are_barrage(const KinematicsModel& model, double snr_bar,
                              const AreOptions& options = {});

/// Same recursion on the augmented deception system with Q_aug = diag(Q, I/snr)
/// and innovation C_aug S C_aug' + eps I. Reports lambda_max of the x block.
AreSolution solve_are_deception(const DeceptionModel& model, double snr_bar,
                                const AreOptions& options = {});

AreSolution solve_are(const TrackingModel& model, double snr_bar, const AreOptions& options = {});

/// Largest eigenvalue of a symmetric matrix. Throws std::invalid_argument if
/// the input is not symmetric within 1e-9 (relative to its largest entry).
double max_eigenvalue(const Eigen::MatrixXd& s);

struct MonteCarloEstimate {
  /// lambda_max of the Kalman covariance after `horizon` Joseph-form updates.
  double recursion_lambda_max = 0.0;
  /// lambda_max of the sample covariance of the one-step prediction errors at
  /// the final step, across simulated trajectories.
  double empirical_lambda_max = 0.0;
  int trajectories = 0;
  int horizon = 0;
};

/// Simulates trajectories and measurements of `model`, runs a Kalman filter on
/// each, and summarises the prediction-error covariance at step `horizon`.
/// Each trajectory draws from its own generator seeded by (seed, trajectory),
/// so the result does not depend on evaluation order.
MonteCarloEstimate monte_carlo_covariance(const TrackingModel& model, double snr_bar,
                                          int n_trajectories, int horizon, std::uint64_t seed,
                                          const AreOptions& options = {});

}  // namespace eccm
