#include "eccm/optimizer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace eccm {

namespace {

constexpr double kStallStep = 1e-14;

bool is_degenerate(const AffineConstraint& c) {
  return c.a.size() == 0 || c.a.cwiseAbs().maxCoeff() == 0.0;
}

struct ConstraintBlock {
  Eigen::MatrixXd a;            // one row per barrier constraint
  Eigen::VectorXd b;
  std::vector<std::size_t> ids;  // index into the program's constraint list
};

ConstraintBlock barrier_rows(const ConcaveProgram& program) {
  ConstraintBlock block;
  for (std::size_t i = 0; i < program.constraints.size(); ++i) {
    if (!is_degenerate(program.constraints[i])) block.ids.push_back(i);
  }
  const auto k = static_cast<Eigen::Index>(block.ids.size());
  block.a.resize(k, program.dimension);
  block.b.resize(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto& c = program.constraints[block.ids[static_cast<std::size_t>(r)]];
    block.a.row(r) = c.a.transpose();
    block.b(r) = c.b;
  }
  return block;
}

void validate(const ConcaveProgram& program) {
  if (program.dimension <= 0) throw std::invalid_argument("program dimension must be positive");
  if (!program.objective) throw std::invalid_argument("program objective is empty");
  for (const auto& c : program.constraints) {
    if (c.a.size() != program.dimension || !c.a.allFinite() || !std::isfinite(c.b)) {
      throw std::invalid_argument("constraint has wrong dimension or non-finite data");
    }
  }
}

// Solves (-H) d = g for the Newton direction, regularizing if -H is singular.
Eigen::VectorXd newton_direction(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& grad) {
  const Eigen::MatrixXd neg = -hessian;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(neg);
  Eigen::VectorXd d = ldlt.solve(grad);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && d.allFinite()) return d;
  const double shift = 1e-12 * (1.0 + neg.cwiseAbs().maxCoeff());
  for (double reg = shift; reg < 1e6; reg *= 100.0) {
    const Eigen::MatrixXd shifted =
        neg + reg * Eigen::MatrixXd::Identity(neg.rows(), neg.cols());
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      d = llt.solve(grad);
      if (d.allFinite()) return d;
    }
  }
  return Eigen::VectorXd::Zero(grad.size());
}


SolveReport make_report(const ConcaveProgram& program, const ConstraintBlock& rows,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& mult, int steps) {
  const ObjectiveEval eval = program.objective(x);
  SolveReport report;
  report.x_star = x;
  report.value = eval.value;
  report.newton_steps = steps;
  report.multipliers = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(program.constraints.size()));
  for (std::size_t r = 0; r < rows.ids.size(); ++r) {
    report.multipliers(static_cast<Eigen::Index>(rows.ids[r])) = mult(static_cast<Eigen::Index>(r));
  }
  if (rows.ids.empty()) {
    report.kkt_residual = eval.gradient.cwiseAbs().maxCoeff();
    return report;
  }
  const Eigen::VectorXd slack = rows.a * x - rows.b;
  const double stationarity = (eval.gradient + rows.a.transpose() * mult).cwiseAbs().maxCoeff();
  const double complementarity = mult.cwiseProduct(slack).cwiseAbs().maxCoeff();
  const double violation = std::max(0.0, -slack.minCoeff());
  const double dual = std::max(0.0, -mult.minCoeff());
  report.kkt_residual = stationarity + complementarity + violation + dual;
  return report;
}

// The barrier multipliers mu / s lose precision when s is small relative to
// |a . x|. Re-solve on the constraints the barrier path left nearly tight as
// equalities (a few equality-constrained Newton steps), which pins those
// slacks at zero and recovers the multipliers from the linear KKT system.
std::optional<SolveReport> polish_active_set(const ConcaveProgram& program,
                                             const ConstraintBlock& rows,
                                             const Eigen::VectorXd& x_barrier,
                                             const Eigen::VectorXd& slack, int steps) {
  constexpr double kActiveDistance = 1e-6;
  const Eigen::Index n = program.dimension;
  std::vector<Eigen::Index> active;
  for (Eigen::Index r = 0; r < rows.a.rows(); ++r) {
    if (slack(r) <= kActiveDistance * std::max(1.0, rows.a.row(r).norm())) active.push_back(r);
  }
  const auto k = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd a_act(k, n);
  Eigen::VectorXd b_act(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    a_act.row(i) = rows.a.row(active[static_cast<std::size_t>(i)]);
    b_act(i) = rows.b(active[static_cast<std::size_t>(i)]);
  }

  Eigen::VectorXd x = x_barrier;
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(k);
  for (int it = 0; it < 20; ++it) {
    const ObjectiveEval eval = program.objective(x);
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = -eval.hessian;
    kkt.topRightCorner(n, k) = -a_act.transpose();
    kkt.bottomLeftCorner(k, n) = a_act;
    Eigen::VectorXd rhs(n + k);
    rhs.head(n) = eval.gradient;
    rhs.tail(k) = b_act - a_act * x;
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite()) return std::nullopt;
    const Eigen::VectorXd d = sol.head(n);
    x += d;
    nu = sol.tail(k);
    if (!x.allFinite() || !std::isfinite(program.objective(x).value)) return std::nullopt;
    if (d.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + x.cwiseAbs().maxCoeff())) break;
  }
  // Refresh the multipliers at the final point.
  {
    const ObjectiveEval eval = program.objective(x);
    if (k > 0) {
      nu = (-a_act.transpose()).completeOrthogonalDecomposition().solve(eval.gradient);
    }
  }
  Eigen::VectorXd mult = Eigen::VectorXd::Zero(rows.a.rows());
  for (Eigen::Index i = 0; i < k; ++i) mult(active[static_cast<std::size_t>(i)]) = nu(i);
  const double scale = 1.0 + (k > 0 ? nu.cwiseAbs().maxCoeff() : 0.0);
  if (k > 0 && nu.minCoeff() < -1e-9 * scale) return std::nullopt;
  mult = mult.cwiseMax(0.0);
  return make_report(program, rows, x, mult, steps);
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::MaxIters: return "max_iters";
  }
  return "unknown";
}

SolveReport maximize(const ConcaveProgram& program, const Eigen::VectorXd& x0,
                     const BarrierOptions& options) {
  validate(program);
  if (x0.size() != program.dimension || !x0.allFinite()) {
    throw std::invalid_argument("maximize: start point has wrong dimension");
  }
  for (const auto& c : program.constraints) {
    if (is_degenerate(c) && !(c.b < 0.0)) {
      throw std::invalid_argument("maximize: constant constraint 0 >= b is not strictly satisfied");
    }
  }
  const ConstraintBlock rows = barrier_rows(program);
  if (((rows.a * x0 - rows.b).array() <= 0.0).any()) {
    throw std::invalid_argument("maximize: start point is not strictly feasible");
  }

  auto barrier_value = [&](const Eigen::VectorXd& x, double mu, double& out) {
    const Eigen::VectorXd s = rows.a * x - rows.b;
    if ((s.array() <= 0.0).any()) return false;
    const double f = program.objective(x).value;
    if (!std::isfinite(f)) return false;
    out = f + mu * s.array().log().sum();
    return std::isfinite(out);
  };

  Eigen::VectorXd x = x0;
  double mu = rows.ids.empty() ? options.mu_final : options.mu_initial;
  int steps = 0;
  bool exhausted = false;

  while (true) {
    const bool final_stage = mu <= options.mu_final * (1.0 + 1e-12);
    const double centering_tol = final_stage ? 1e-22 : 1e-9;
    while (true) {
      const ObjectiveEval eval = program.objective(x);
      const Eigen::VectorXd inv = (rows.a * x - rows.b).cwiseInverse();
      const Eigen::VectorXd grad = eval.gradient + mu * rows.a.transpose() * inv;
      const Eigen::MatrixXd hess =
          eval.hessian - mu * rows.a.transpose() * inv.cwiseAbs2().asDiagonal() * rows.a;
      const Eigen::VectorXd d = newton_direction(hess, grad);
      const double decrement2 = grad.dot(d);
      if (!(decrement2 > 2.0 * centering_tol * (1.0 + std::abs(eval.value)))) break;
      if (steps >= options.max_newton_steps) {
        exhausted = true;
        break;
      }

      double phi0 = 0.0;
      barrier_value(x, mu, phi0);
      double t = 1.0;
      bool accepted = false;
      Eigen::VectorXd candidate;
      while (t >= kStallStep) {
        candidate = x + t * d;
        double phi = 0.0;
        // Strict increase: once the gain is below rounding, stop instead of
        // accepting no-op steps.
        if (barrier_value(candidate, mu, phi) && phi > phi0 &&
            phi >= phi0 + options.armijo * t * decrement2) {
          accepted = true;
          break;
        }
        t *= options.backtrack;
      }
      if (!accepted && decrement2 <= 1e-8 * (1.0 + std::abs(phi0))) {
        // The remaining gain is below the resolution of the barrier value.
        // Take the full step if it shrinks the gradient.
        candidate = x + d;
        const Eigen::VectorXd s = rows.a * candidate - rows.b;
        if ((s.array() > 0.0).all()) {
          const Eigen::VectorXd g =
              program.objective(candidate).gradient + mu * rows.a.transpose() * s.cwiseInverse();
          accepted = g.allFinite() && g.norm() < grad.norm();
        }
      }
      if (!accepted) break;  // no further progress at this precision
      x = std::move(candidate);
      ++steps;
    }
    if (final_stage || exhausted) break;
    mu = std::max(mu * options.mu_shrink, options.mu_final);
  }

  const Eigen::VectorXd slack = rows.a * x - rows.b;
  const Eigen::VectorXd mult = mu * slack.cwiseInverse();
  SolveReport report = make_report(program, rows, x, mult, steps);
  if (!rows.ids.empty()) {
    if (auto polished = polish_active_set(program, rows, x, slack, steps)) {
      if (polished->kkt_residual < report.kkt_residual) report = std::move(*polished);
    }
  }
  report.status = report.kkt_residual <= options.tolerance ? SolveStatus::Optimal
                                                           : SolveStatus::MaxIters;
  return report;
}

FeasibilityResult find_feasible(const ConcaveProgram& program) {
  validate(program);
  const Eigen::Index n = program.dimension;
  const auto k = program.constraints.size();

  FeasibilityResult result;
  result.certificate = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));

  // A constant row 0 >= b can only be checked, not moved.
  for (std::size_t i = 0; i < k; ++i) {
    const auto& c = program.constraints[i];
    if (is_degenerate(c) && !(c.b <= -kFeasibilityMargin)) {
      result.certificate(static_cast<Eigen::Index>(i)) = 1.0;
      result.max_violation = c.b;
      return result;
    }
  }
  ConstraintBlock rows = barrier_rows(program);
  if (rows.ids.empty()) {
    result.point = Eigen::VectorXd::Zero(n);
    return result;
  }

  const auto m = rows.a.rows();
  Eigen::VectorXd norms = rows.a.rowwise().norm();
  ConcaveProgram phase1;
  phase1.dimension = n + 1;
  // Variables (x, t): maximize -t subject to a_i.x/|a_i| + t >= b_i/|a_i|, t >= -1.
  // The small proximal term keeps x bounded when the constraints leave
  // directions free.
  constexpr double kProximal = 1e-8;
  phase1.objective = [n](const Eigen::VectorXd& z) {
    ObjectiveEval e;
    const auto x = z.head(n);
    e.value = -z(n) - 0.5 * kProximal * x.squaredNorm();
    e.gradient = Eigen::VectorXd::Zero(n + 1);
    e.gradient.head(n) = -kProximal * x;
    e.gradient(n) = -1.0;
    e.hessian = Eigen::MatrixXd::Zero(n + 1, n + 1);
    e.hessian.topLeftCorner(n, n).diagonal().setConstant(-kProximal);
    return e;
  };
  for (Eigen::Index r = 0; r < m; ++r) {
    AffineConstraint c;
    c.a = Eigen::VectorXd::Zero(n + 1);
    c.a.head(n) = rows.a.row(r).transpose() / norms(r);
    c.a(n) = 1.0;
    c.b = rows.b(r) / norms(r);
    phase1.constraints.push_back(std::move(c));
  }
  {
    AffineConstraint floor;
    floor.a = Eigen::VectorXd::Zero(n + 1);
    floor.a(n) = 1.0;
    floor.b = -1.0;
    phase1.constraints.push_back(std::move(floor));
  }

  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(n + 1);
  z0(n) = std::max(0.0, (rows.b.array() / norms.array()).maxCoeff()) + 1.0;

  BarrierOptions opts;
  opts.mu_final = 1e-9;
  opts.max_newton_steps = 400;
  const SolveReport phase = maximize(phase1, z0, opts);
  const Eigen::VectorXd x = phase.x_star.head(n);
  const Eigen::VectorXd slack = rows.a * x - rows.b;
  result.max_violation = (-slack.array() / norms.array()).maxCoeff();

  if ((slack.array() >= kFeasibilityMargin).all()) {
    result.point = x;
    return result;
  }
  Eigen::VectorXd weights = phase.multipliers.head(m).cwiseQuotient(norms);
  const double total = weights.sum();
  if (total > 0.0) weights /= total;
  for (Eigen::Index r = 0; r < m; ++r) {
    result.certificate(static_cast<Eigen::Index>(rows.ids[static_cast<std::size_t>(r)])) =
        weights(r);
  }
  return result;
}

SolveReport solve(const ConcaveProgram& program, const BarrierOptions& options) {
  const FeasibilityResult feasible = find_feasible(program);
  if (!feasible.point) {
    SolveReport report;
    report.status = SolveStatus::Infeasible;
    report.multipliers = feasible.certificate;
    report.value = -std::numeric_limits<double>::infinity();
    return report;
  }
  return maximize(program, *feasible.point, options);
}

}  // namespace eccm
