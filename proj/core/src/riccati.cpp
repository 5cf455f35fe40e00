#include "eccm/riccati.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace eccm {

namespace {

void require_square(const Eigen::MatrixXd& m, Eigen::Index n, const char* name) {
  if (m.rows() != n || m.cols() != n) {
    throw std::invalid_argument(std::string(name) + " must be " + std::to_string(n) + "x" +
                                std::to_string(n));
  }
}

void require_covariance(const Eigen::MatrixXd& q, const char* name) {
  if (!q.allFinite()) throw std::invalid_argument(std::string(name) + " must be finite");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw std::invalid_argument(std::string(name) + " must be positive semidefinite");
  }
}

// x_{k+1} = A x_k + w, w ~ N(0, Q);  y_k = C x_k + v, v ~ N(0, R).
struct LinearGaussianSystem {
  Eigen::MatrixXd a, q, c, r;
  Eigen::Index reported_block;  // leading block whose lambda_max is reported
  bool check_innovation = false;
};

LinearGaussianSystem barrage_system(const KinematicsModel& model, double snr_bar) {
  const auto p = model.c().rows();
  return {model.a(), model.q(), model.c(),
          Eigen::MatrixXd::Identity(p, p) / snr_bar, model.state_dim(), false};
}

LinearGaussianSystem deception_system(const DeceptionModel& model, double snr_bar,
                                      double regularization) {
  const auto n = model.state_dim();
  const auto p = model.c1().rows();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  q.topLeftCorner(n, n) = model.q();
  q.bottomRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n) / snr_bar;
  return {model.augmented_transition(), std::move(q), model.augmented_measurement(),
          regularization * Eigen::MatrixXd::Identity(p, p), n, true};
}

LinearGaussianSystem to_system(const TrackingModel& model, double snr_bar,
                               const AreOptions& options) {
  return std::visit(
      [&](const auto& m) -> LinearGaussianSystem {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KinematicsModel>) {
          return barrage_system(m, snr_bar);
        } else {
          return deception_system(m, snr_bar, options.innovation_regularization);
        }
      },
      model);
}

Eigen::MatrixXd riccati_map(const LinearGaussianSystem& sys, const Eigen::MatrixXd& s) {
  const Eigen::MatrixXd cs = sys.c * s;
  const Eigen::MatrixXd innovation = cs * sys.c.transpose() + sys.r;
  const Eigen::MatrixXd filtered = s - cs.transpose() * innovation.ldlt().solve(cs);
  Eigen::MatrixXd next = sys.a * filtered * sys.a.transpose() + sys.q;
  return 0.5 * (next + next.transpose());
}

AreSolution solve_fixed_point(const LinearGaussianSystem& sys, const AreOptions& options) {
  Eigen::MatrixXd s = sys.q;
  if (sys.check_innovation) {
    const Eigen::MatrixXd d = sys.c * s * sys.c.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (d + d.transpose()),
                                                       Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < 1e-12) {
      throw SingularInnovation("innovation covariance C S C' is singular (min eigenvalue " +
                               std::to_string(eig.eigenvalues().minCoeff()) + ")");
    }
  }

  int iteration = 0;
  for (; iteration < options.max_iterations; ++iteration) {
    Eigen::MatrixXd next = riccati_map(sys, s);
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > options.overflow_guard) {
      throw NoConvergence("Riccati iteration diverged after " + std::to_string(iteration + 1) +
                          " steps");
    }
    const double step = (next - s).norm();
    const double scale = 1.0 + s.norm();
    s = std::move(next);
    if (step <= options.step_tolerance * scale) {
      ++iteration;
      break;
    }
  }

  const double residual = (s - riccati_map(sys, s)).norm();
  if (residual > options.residual_tolerance * (1.0 + s.norm())) {
    throw NoConvergence("Riccati iteration stopped with residual " + std::to_string(residual) +
                        " after " + std::to_string(iteration) + " steps");
  }
  const Eigen::MatrixXd block = s.topLeftCorner(sys.reported_block, sys.reported_block);
  return AreSolution{s, CovarianceSummary(max_eigenvalue(block)), iteration, residual};
}

void require_snr(double snr_bar) {
  if (!(snr_bar > 0.0) || !std::isfinite(snr_bar)) {
    throw std::invalid_argument("snr_bar must be positive and finite");
  }
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace

KinematicsModel::KinematicsModel(Eigen::MatrixXd a, Eigen::MatrixXd q, Eigen::MatrixXd c,
                                 double sampling_period)
    : a_(std::move(a)), q_(std::move(q)), c_(std::move(c)), t_(sampling_period) {
  const auto n = a_.rows();
  if (n == 0) throw std::invalid_argument("state dimension must be positive");
  require_square(a_, n, "A");
  require_square(q_, n, "Q");
  if (c_.cols() != n || c_.rows() == 0) {
    throw std::invalid_argument("C must have " + std::to_string(n) + " columns");
  }
  if (!a_.allFinite() || !c_.allFinite()) throw std::invalid_argument("A and C must be finite");
  require_covariance(q_, "Q");
  if (!(t_ > 0.0)) throw std::invalid_argument("sampling period must be positive");
}

KinematicsModel KinematicsModel::constant_velocity(double sampling_period, int axes) {
  if (axes <= 0) throw std::invalid_argument("axes must be positive");
  const Eigen::Index n = 2 * axes;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < axes; ++i) {
    a.block<2, 2>(2 * i, 2 * i) << 1.0, sampling_period, 0.0, 1.0;
  }
  return KinematicsModel(std::move(a), Eigen::MatrixXd::Identity(n, n),
                         Eigen::MatrixXd::Identity(n, n), sampling_period);
}

KinematicsModel KinematicsModel::with_process_noise(Eigen::MatrixXd q) const {
  return KinematicsModel(a_, std::move(q), c_, t_);
}

DeceptionModel::DeceptionModel(Eigen::MatrixXd a, Eigen::MatrixXd b1, Eigen::MatrixXd b2,
                               Eigen::MatrixXd c1, Eigen::MatrixXd c2, Eigen::MatrixXd q,
                               double sampling_period)
    : a_(std::move(a)),
      b1_(std::move(b1)),
      b2_(std::move(b2)),
      c1_(std::move(c1)),
      c2_(std::move(c2)),
      q_(std::move(q)),
      t_(sampling_period) {
  const auto n = a_.rows();
  if (n == 0) throw std::invalid_argument("state dimension must be positive");
  require_square(a_, n, "A");
  require_square(b1_, n, "B1");
  require_square(b2_, n, "B2");
  require_square(q_, n, "Q");
  if (c1_.cols() != n || c2_.cols() != n || c1_.rows() != c2_.rows() || c1_.rows() == 0) {
    throw std::invalid_argument("C1 and C2 must both be p x " + std::to_string(n));
  }
  require_covariance(q_, "Q");
  if (!(t_ > 0.0)) throw std::invalid_argument("sampling period must be positive");
}

DeceptionModel DeceptionModel::with_process_noise(Eigen::MatrixXd q) const {
  return DeceptionModel(a_, b1_, b2_, c1_, c2_, std::move(q), t_);
}

Eigen::MatrixXd DeceptionModel::augmented_transition() const {
  const auto n = state_dim();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  a.topLeftCorner(n, n) = a_;
  a.bottomLeftCorner(n, n) = b1_;
  a.bottomRightCorner(n, n) = b2_;
  return a;
}

Eigen::MatrixXd DeceptionModel::augmented_measurement() const {
  Eigen::MatrixXd c(c1_.rows(), 2 * state_dim());
  c << c1_, c2_;
  return c;
}

AreSolution solve_are_barrage(const KinematicsModel& model, double snr_bar,
                              const AreOptions& options) {
  require_snr(snr_bar);
  return solve_fixed_point(barrage_system(model, snr_bar), options);
}

AreSolution solve_are_deception(const DeceptionModel& model, double snr_bar,
                                const AreOptions& options) {
  require_snr(snr_bar);
  return solve_fixed_point(
      deception_system(model, snr_bar, options.innovation_regularization), options);
}

AreSolution solve_are(const TrackingModel& model, double snr_bar, const AreOptions& options) {
  require_snr(snr_bar);
  return solve_fixed_point(to_system(model, snr_bar, options), options);
}

double max_eigenvalue(const Eigen::MatrixXd& s) {
  if (s.rows() != s.cols() || s.rows() == 0) {
    throw std::invalid_argument("max_eigenvalue: matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument("max_eigenvalue: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (s + s.transpose()),
                                                     Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

MonteCarloEstimate monte_carlo_covariance(const TrackingModel& model, double snr_bar,
                                          int n_trajectories, int horizon, std::uint64_t seed,
                                          const AreOptions& options) {
  require_snr(snr_bar);
  if (n_trajectories < 1 || horizon < 1) {
    throw std::invalid_argument("monte_carlo_covariance: need at least one trajectory and step");
  }
  const LinearGaussianSystem sys = to_system(model, snr_bar, options);
  const auto n = sys.a.rows();
  const auto p = sys.c.rows();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);

  // Gains do not depend on the measurements, so compute them once.
  std::vector<Eigen::MatrixXd> gains;
  gains.reserve(static_cast<std::size_t>(horizon));
  Eigen::MatrixXd cov = sys.q;
  for (int k = 0; k < horizon; ++k) {
    const Eigen::MatrixXd innovation = sys.c * cov * sys.c.transpose() + sys.r;
    Eigen::MatrixXd gain =
        innovation.ldlt().solve(sys.c * cov).transpose();  // cov C' innovation^{-1}
    const Eigen::MatrixXd i_kc = identity - gain * sys.c;
    const Eigen::MatrixXd filtered =
        i_kc * cov * i_kc.transpose() + gain * sys.r * gain.transpose();
    cov = sys.a * filtered * sys.a.transpose() + sys.q;
    cov = 0.5 * (cov + cov.transpose());
    gains.push_back(std::move(gain));
  }

  const Eigen::MatrixXd q_root = psd_sqrt(sys.q);
  const Eigen::MatrixXd r_root = psd_sqrt(sys.r);
  const auto block = sys.reported_block;
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(block, block);

  Eigen::VectorXd state(n), estimate(n), noise_x(n), noise_y(p), y(p);
  for (int traj = 0; traj < n_trajectories; ++traj) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(traj)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&](Eigen::VectorXd& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    };

    draw(noise_x);
    state = q_root * noise_x;  // prior x_0 ~ N(0, Q), estimate 0
    estimate.setZero();
    for (int k = 0; k < horizon; ++k) {
      draw(noise_y);
      y = sys.c * state + r_root * noise_y;
      estimate += gains[static_cast<std::size_t>(k)] * (y - sys.c * estimate);
      estimate = sys.a * estimate;
      draw(noise_x);
      state = sys.a * state + q_root * noise_x;
    }
    const Eigen::VectorXd err = (state - estimate).head(block);
    scatter.noalias() += err * err.transpose();
  }
  scatter /= static_cast<double>(n_trajectories);

  MonteCarloEstimate out;
  out.recursion_lambda_max = max_eigenvalue(cov.topLeftCorner(block, block));
  out.empirical_lambda_max = max_eigenvalue(0.5 * (scatter + scatter.transpose()));
  out.trajectories = n_trajectories;
  out.horizon = horizon;
  return out;
}

}  // namespace eccm
