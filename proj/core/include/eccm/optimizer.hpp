#pragma once

// Log-barrier Newton method for maximizing a smooth concave function over
// a polyhedron {x : a_i . x >= b_i}. Sized for the contract problems in this
// library (a few to a few dozen variables, dense algebra throughout).

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace eccm {

struct ObjectiveEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;  // negative semidefinite
};

using Objective = std::function<ObjectiveEval(const Eigen::VectorXd&)>;

/// a . x >= b
struct AffineConstraint {
  Eigen::VectorXd a;
  double b = 0.0;
};

struct ConcaveProgram {
  Eigen::Index dimension = 0;
  Objective objective;
  std::vector<AffineConstraint> constraints;
};

enum class SolveStatus { Optimal, Infeasible, MaxIters };

const char* to_string(SolveStatus status);

struct SolveReport {
  Eigen::VectorXd x_star;
  double value = 0.0;
  Eigen::VectorXd multipliers;  // one per constraint, >= 0
  double kkt_residual = 0.0;    // stationarity + complementarity + primal/dual violation
  SolveStatus status = SolveStatus::MaxIters;
  int newton_steps = 0;
};

struct BarrierOptions {
  double tolerance = 1e-8;
  double mu_initial = 1.0;
  double mu_shrink = 0.1;
  double mu_final = 1e-10;
  double armijo = 0.01;
  double backtrack = 0.5;
  int max_newton_steps = 200;
};

/// Strict-feasibility margin used by find_feasible.
inline constexpr double kFeasibilityMargin = 1e-10;

struct FeasibilityResult {
  /// Point with a_i . x >= b_i + kFeasibilityMargin for every i, if one was found.
  std::optional<Eigen::VectorXd> point;
  /// When infeasible: nonnegative weights y (normalized to sum 1) with
  /// sum_i y_i a_i ~ 0 and sum_i y_i b_i > 0 (Farkas certificate).
  Eigen::VectorXd certificate;
  /// Smallest achieved max_i (b_i - a_i . x) / ||a_i|| from phase I.
  double max_violation = 0.0;
};

/// Phase I: minimizes the largest normalized constraint violation.
FeasibilityResult find_feasible(const ConcaveProgram& program);

/// Path-following log-barrier Newton from a strictly feasible `x0`.
/// Multipliers are recovered as mu_barrier / (a_i . x - b_i).
SolveReport maximize(const ConcaveProgram& program, const Eigen::VectorXd& x0,
                     const BarrierOptions& options = {});

/// find_feasible followed by maximize. Returns status Infeasible (with an
/// empty x_star) when phase I fails.
SolveReport solve(const ConcaveProgram& program, const BarrierOptions& options = {});

}  // namespace eccm
