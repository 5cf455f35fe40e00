#include "eccm/pap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace eccm {

namespace {

Eigen::Index as_index(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Floor on the pulse-cost weight so coordinates the radar never observes
// under the target level still have a curved objective.
constexpr double kCostWeightFloor = 1e-12;

// Tolerance for the ex-post check that the target is a best response.
constexpr double kIncentiveTolerance = 1e-9;

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string scientific(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Radar objective in x-space for the instance's target level.
Objective radar_objective(const PapInstance& instance) {
  const auto row = instance.channel().probabilities().row(as_index(instance.target_level()));
  const Eigen::VectorXd p = row.transpose();
  const Eigen::VectorXd cost_weight = p.cwiseMax(kCostWeightFloor);
  const Eigen::VectorXd log_j = instance.channel().grid().log_levels();
  const double scale = instance.params().c1() * instance.sigma().value();
  return [p, cost_weight, log_j, scale](const Eigen::VectorXd& x) {
    const Eigen::ArrayXd e2x = (2.0 * x.array()).exp();
    ObjectiveEval e;
    e.value = scale * p.dot(x - log_j) - (cost_weight.array() * e2x).sum();
    e.gradient = (scale * p.array() - 2.0 * cost_weight.array() * e2x).matrix();
    e.hessian = (-4.0 * cost_weight.array() * e2x).matrix().asDiagonal();
    return e;
  };
}

// Drops IC rows that hold for every x; returns false if some row can never hold.
bool usable_constraints(const std::vector<IncentiveConstraint>& all,
                        std::vector<IncentiveConstraint>& kept) {
  kept.clear();
  for (const auto& ic : all) {
    if (ic.constraint.a.cwiseAbs().maxCoeff() == 0.0) {
      if (ic.constraint.b > 0.0) return false;
      continue;  // 0 >= b with b <= 0: weakly satisfied everywhere
    }
    kept.push_back(ic);
  }
  return true;
}

PapSolution assemble(const PapInstance& instance, const Eigen::VectorXd& x,
                     const std::vector<IncentiveConstraint>& kept,
                     const Eigen::VectorXd& constraint_multipliers, StrategyClass mode,
                     int newton_steps) {
  LogStrategy log_strategy(x);
  PapSolution sol{log_strategy,       EccmStrategy::from_log(log_strategy),
                  instance.target_level(), 0.0, 0.0, Eigen::VectorXd(), 0.0, mode,
                  newton_steps, std::nullopt};
  sol.radar_value = radar_utility(log_strategy, sol.j_star, instance);
  sol.jammer_value = jammer_utility(log_strategy, sol.j_star, instance);
  sol.multipliers = Eigen::VectorXd::Zero(as_index(instance.size()));
  for (std::size_t r = 0; r < kept.size(); ++r) {
    sol.multipliers(as_index(kept[r].rival)) = constraint_multipliers(as_index(r));
  }
  return sol;
}

std::optional<PapSolution> solve_log_space(const PapInstance& instance, bool relaxed,
                                           const BarrierOptions& options) {
  std::vector<IncentiveConstraint> kept;
  if (!usable_constraints(build_ic_constraints(instance, relaxed), kept)) return std::nullopt;

  ConcaveProgram program;
  program.dimension = as_index(instance.size());
  program.objective = radar_objective(instance);
  for (const auto& ic : kept) program.constraints.push_back(ic.constraint);

  const SolveReport report = solve(program, options);
  if (report.status == SolveStatus::Infeasible) return std::nullopt;
  if (report.status != SolveStatus::Optimal) {
    throw SolverFailure("contract solve for level " + std::to_string(instance.target_level()) +
                        " stopped with KKT residual " + scientific(report.kkt_residual));
  }

  const StrategyClass mode = relaxed ? StrategyClass::Relaxed : StrategyClass::Full;
  PapSolution sol =
      assemble(instance, report.x_star, kept, report.multipliers, mode, report.newton_steps);
  sol.kkt_residual = verify_kkt(sol, instance).residual;

  if (!relaxed) {
    const auto best = jammer_best_response(sol.x_star, instance, kIncentiveTolerance);
    if (std::find(best.begin(), best.end(), sol.j_star) == best.end()) {
      throw SolverFailure("solution for level " + std::to_string(sol.j_star) +
                          " is not a jammer best response");
    }
  }
  return sol;
}

}  // namespace

const char* to_string(StrategyClass mode) {
  switch (mode) {
    case StrategyClass::Full: return "full";
    case StrategyClass::Relaxed: return "relaxed";
    case StrategyClass::Affine: return "affine";
  }
  return "unknown";
}

std::vector<IncentiveConstraint> build_ic_constraints(const PapInstance& instance, bool relaxed) {
  const JammingChannel& ch = instance.incentive_channel();
  const auto& p = ch.probabilities();
  const Eigen::VectorXd log_j = ch.grid().log_levels();
  const std::size_t target = instance.target_level();
  const double ratio = instance.params().c2() / instance.sigma().value();
  const double j = ch.grid()[target];

  std::vector<IncentiveConstraint> out;
  for (std::size_t rival = 0; rival < ch.size(); ++rival) {
    if (rival == target || (relaxed && rival < target)) continue;
    const Eigen::VectorXd diff = (p.row(as_index(rival)) - p.row(as_index(target))).transpose();
    const double jr = ch.grid()[rival];
    IncentiveConstraint ic;
    ic.rival = rival;
    ic.constraint.a = ratio * diff;
    ic.constraint.b = ratio * diff.dot(log_j) + j * j - jr * jr;
    out.push_back(std::move(ic));
  }
  return out;
}

std::optional<PapSolution> solve_fixed_j(const PapInstance& instance,
                                         const BarrierOptions& options) {
  return solve_log_space(instance, false, options);
}

std::optional<PapSolution> solve_relaxed(const PapInstance& instance,
                                         const BarrierOptions& options) {
  return solve_log_space(instance, true, options);
}

std::optional<PapSolution> solve_affine(const PapInstance& instance,
                                        const BarrierOptions& options) {
  std::vector<IncentiveConstraint> kept;
  if (!usable_constraints(build_ic_constraints(instance, false), kept)) return std::nullopt;

  const Eigen::VectorXd levels = instance.channel().grid().as_vector();
  const auto m = levels.size();
  // With a single distinct level the slope is not identifiable; fix c3 = 0.
  const bool slope_free = levels.maxCoeff() > levels.minCoeff();
  const Eigen::Index dim = slope_free ? 2 : 1;
  Eigen::MatrixXd basis(m, dim);  // x = basis * theta
  if (slope_free) {
    basis.col(0) = levels;
    basis.col(1).setOnes();
  } else {
    basis.col(0).setOnes();
  }

  const Objective base = radar_objective(instance);
  ConcaveProgram program;
  program.dimension = dim;
  program.objective = [base, basis](const Eigen::VectorXd& theta) {
    const ObjectiveEval e = base(basis * theta);
    return ObjectiveEval{e.value, basis.transpose() * e.gradient,
                         basis.transpose() * e.hessian * basis};
  };
  for (const auto& ic : kept) {
    program.constraints.push_back({basis.transpose() * ic.constraint.a, ic.constraint.b});
  }
  if (slope_free) {
    program.constraints.push_back({Eigen::Vector2d(1.0, 0.0), 0.0});
  }

  const SolveReport report = solve(program, options);
  if (report.status == SolveStatus::Infeasible) return std::nullopt;
  if (report.status != SolveStatus::Optimal) {
    throw SolverFailure("affine contract solve for level " +
                        std::to_string(instance.target_level()) + " stopped with KKT residual " +
                        scientific(report.kkt_residual));
  }

  const Eigen::VectorXd x = basis * report.x_star;
  PapSolution sol = assemble(instance, x, kept, report.multipliers.head(as_index(kept.size())),
                             StrategyClass::Affine, report.newton_steps);
  sol.kkt_residual = report.kkt_residual;
  sol.affine_coefficients =
      slope_free ? std::array<double, 2>{report.x_star(0), report.x_star(1)}
                 : std::array<double, 2>{0.0, report.x_star(0)};

  const auto best = jammer_best_response(sol.x_star, instance, kIncentiveTolerance);
  if (std::find(best.begin(), best.end(), sol.j_star) == best.end()) {
    throw SolverFailure("affine solution for level " + std::to_string(sol.j_star) +
                        " is not a jammer best response");
  }
  return sol;
}

std::optional<PapSolution> solve_level(const PapInstance& instance, StrategyClass mode,
                                       const BarrierOptions& options) {
  switch (mode) {
    case StrategyClass::Full: return solve_fixed_j(instance, options);
    case StrategyClass::Relaxed: return solve_relaxed(instance, options);
    case StrategyClass::Affine: return solve_affine(instance, options);
  }
  throw std::invalid_argument("unknown strategy class");
}

PapOutcome solve_all_levels(const JammingChannel& channel, const UtilityParams& params,
                            CovarianceSummary sigma, StrategyClass mode,
                            const std::optional<JammingChannel>& jammer_belief,
                            const BarrierOptions& options) {
  const PapInstance base(channel, params, sigma, 0, jammer_belief);
  std::vector<LevelOutcome> levels;
  levels.reserve(channel.size());
  const PapSolution* best = nullptr;
  for (std::size_t level = 0; level < channel.size(); ++level) {
    levels.push_back({level, solve_level(base.with_target(level), mode, options)});
  }
  for (const auto& outcome : levels) {
    if (!outcome.solution) continue;
    if (best == nullptr || outcome.solution->radar_value > best->radar_value) {
      best = &*outcome.solution;
    }
  }
  if (best == nullptr) {
    throw std::runtime_error("no jamming level could be incentivized; the contract solver failed");
  }
  PapSolution winner = *best;
  return PapOutcome{std::move(levels), std::move(winner)};
}

PapSolution solve_pap(const JammingChannel& channel, const UtilityParams& params,
                      CovarianceSummary sigma, StrategyClass mode,
                      const std::optional<JammingChannel>& jammer_belief,
                      const BarrierOptions& options) {
  return solve_all_levels(channel, params, sigma, mode, jammer_belief, options).best;
}

Tp2Check check_tp2(const JammingChannel& channel) {
  const auto& p = channel.probabilities();
  const auto m = channel.size();
  Tp2Check out;
  for (std::size_t i = 1; i < m; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      for (std::size_t a = 1; a < m; ++a) {
        for (std::size_t b = 0; b < a; ++b) {
          const double lhs = p(as_index(i), as_index(a)) * p(as_index(j), as_index(b));
          const double rhs = p(as_index(i), as_index(b)) * p(as_index(j), as_index(a));
          if (lhs < rhs - kProbabilityTolerance) {
            out.holds = false;
            out.witness = std::array<std::size_t, 4>{i, j, a, b};
            return out;
          }
        }
      }
    }
  }
  return out;
}

namespace {

// Sign test for discrete convexity of values over (possibly repeated) levels.
// Returns the middle index of the first triple whose slope decreases by more
// than `tol`; repeated levels must carry equal values.
std::optional<std::size_t> first_convexity_violation(const std::vector<double>& levels,
                                                     const std::vector<double>& values,
                                                     double tol) {
  for (std::size_t a = 1; a + 1 < levels.size(); ++a) {
    const double h1 = levels[a] - levels[a - 1];
    const double h2 = levels[a + 1] - levels[a];
    if (h1 == 0.0 && std::abs(values[a] - values[a - 1]) > tol) return a;
    if (h2 == 0.0 && std::abs(values[a + 1] - values[a]) > tol) return a;
    if (h1 == 0.0 || h2 == 0.0) continue;
    const double second = (values[a + 1] - values[a]) / h2 - (values[a] - values[a - 1]) / h1;
    if (second < -tol) return a;
  }
  return std::nullopt;
}

}  // namespace

TailConvexityCheck check_tail_convexity(const JammingChannel& channel) {
  const auto m = channel.size();
  TailConvexityCheck out;
  if (m < 3) return out;
  const auto& p = channel.probabilities();
  const auto& levels = channel.grid().levels();
  for (std::size_t tail = 0; tail < m; ++tail) {
    std::vector<double> pi(m);
    for (std::size_t level = 0; level < m; ++level) {
      pi[level] = p.row(as_index(level)).tail(as_index(m - tail)).sum();
    }
    if (auto bad = first_convexity_violation(levels, pi, kProbabilityTolerance)) {
      out.holds = false;
      out.witness = TailConvexityCheck::Witness{tail, *bad};
      return out;
    }
  }
  return out;
}

StructureReport check_structure(const JammingChannel& channel) {
  return StructureReport{check_tp2(channel), check_tail_convexity(channel)};
}

KktReport verify_kkt(const PapSolution& solution, const PapInstance& instance) {
  if (solution.strategy_class == StrategyClass::Affine) {
    throw std::invalid_argument("verify_kkt applies to full or relaxed solutions only");
  }
  const auto m = instance.size();
  if (static_cast<std::size_t>(solution.x_star.x.size()) != m ||
      static_cast<std::size_t>(solution.multipliers.size()) != m) {
    throw std::invalid_argument("verify_kkt: solution does not match the instance");
  }
  const PapInstance target = instance.with_target(solution.j_star);
  const std::size_t level = solution.j_star;
  const auto& p = target.channel().probabilities();
  const auto& q = target.incentive_channel().probabilities();
  const double scale = target.params().c1() * target.sigma().value();
  const double ratio = target.params().c2() / target.sigma().value();
  const Eigen::VectorXd& x = solution.x_star.x;
  const Eigen::VectorXd& mu = solution.multipliers;

  KktReport report;
  for (std::size_t obs = 0; obs < m; ++obs) {
    const auto col = as_index(obs);
    double pull = 0.0;  // sum_J' mu_J' (Q[J'][m] - Q[J][m])
    for (std::size_t rival = 0; rival < m; ++rival) {
      if (rival == level) continue;
      pull += mu(as_index(rival)) * (q(as_index(rival), col) - q(as_index(level), col));
    }
    const double likelihood = p(as_index(level), col);
    const double e2x = std::exp(2.0 * x(col));
    double r = 0.0;
    if (likelihood > 0.0) {
      r = std::abs(e2x - 0.5 * (scale + ratio * pull / likelihood));
    } else {
      report.degenerate_likelihood = true;
      r = std::abs(likelihood * (2.0 * e2x - scale) - ratio * pull);
    }
    report.stationarity = std::max(report.stationarity, r);
  }

  report.dual_feasibility = std::max(0.0, -mu.minCoeff());
  const bool relaxed = solution.strategy_class == StrategyClass::Relaxed;
  for (const auto& ic : build_ic_constraints(target, relaxed)) {
    const double slack = ic.constraint.a.dot(x) - ic.constraint.b;
    report.primal_feasibility = std::max(report.primal_feasibility, -slack);
    report.complementarity =
        std::max(report.complementarity, std::abs(mu(as_index(ic.rival)) * slack));
  }
  report.residual = std::max({report.stationarity, report.dual_feasibility,
                              report.primal_feasibility, report.complementarity});
  return report;
}

ConcavityCheck check_jammer_concavity(const LogStrategy& x, const PapInstance& instance) {
  const auto m = instance.size();
  if (static_cast<std::size_t>(x.x.size()) != m) {
    throw std::invalid_argument("check_jammer_concavity: strategy size mismatch");
  }
  for (Eigen::Index i = 1; i < x.x.size(); ++i) {
    if (x.x(i) < x.x(i - 1) - 1e-9) {
      throw std::invalid_argument("check_jammer_concavity: strategy must be non-decreasing");
    }
  }
  ConcavityCheck out;
  out.jammer_utilities.resize(m);
  double magnitude = 1.0;
  for (std::size_t level = 0; level < m; ++level) {
    out.jammer_utilities[level] = jammer_utility(x, level, instance);
    magnitude = std::max(magnitude, std::abs(out.jammer_utilities[level]));
  }
  // Concave values = convex negated values.
  std::vector<double> negated(m);
  std::transform(out.jammer_utilities.begin(), out.jammer_utilities.end(), negated.begin(),
                 [](double v) { return -v; });
  if (auto bad = first_convexity_violation(instance.incentive_channel().grid().levels(), negated,
                                           kProbabilityTolerance * magnitude)) {
    out.holds = false;
    out.witness = *bad;
  }
  return out;
}

}  // namespace eccm
