#pragma once

// The radar's contract problem: for each jamming level to incentivize,
// maximize the radar's expected utility over log pulse powers subject to the
// jammer's incentive-compatibility constraints; then pick the best level.
// Also hosts the structural checks (TP2 channel, convex tail sums, discrete
// concavity of the jammer's utility) and KKT certification.

#include "eccm/model.hpp"
#include "eccm/optimizer.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace eccm {

enum class StrategyClass {
  Full,     // incentive constraints against every other level
  Relaxed,  // only against higher levels
  Affine,   // full constraints, x_m = c3 * j_m + c4 with c3 >= 0
};

const char* to_string(StrategyClass mode);

/// IC constraint "the jammer prefers the target level over `rival`".
struct IncentiveConstraint {
  AffineConstraint constraint;
  std::size_t rival;
};

struct PapSolution {
  LogStrategy x_star;
  EccmStrategy pi_star;
  std::size_t j_star = 0;
  double radar_value = 0.0;
  double jammer_value = 0.0;
  /// Multiplier per rival level (zero for the target itself and for levels
  /// without a constraint).
  Eigen::VectorXd multipliers;
  double kkt_residual = 0.0;
  StrategyClass strategy_class = StrategyClass::Full;
  int newton_steps = 0;
  /// (c3, c4) for the affine class.
  std::optional<std::array<double, 2>> affine_coefficients;
};

/// Emits, for each rival level (every other level, or only higher ones when
/// `relaxed`), the constraint psi(x, J) >= psi(x, rival) written as a . x >= b:
///   a = (c2/sigma) (P[rival] - P[J]),
///   b = (c2/sigma) (P[rival] - P[J]) . log j + J^2 - rival^2.
std::vector<IncentiveConstraint> build_ic_constraints(const PapInstance& instance, bool relaxed);

/// Solves the full problem at the instance's target level. Empty when the
/// level cannot be incentivized.
std::optional<PapSolution> solve_fixed_j(const PapInstance& instance,
                                         const BarrierOptions& options = {});

/// Keeps only constraints against higher levels. No ex-post full IC check.
std::optional<PapSolution> solve_relaxed(const PapInstance& instance,
                                         const BarrierOptions& options = {});

/// Restricts x to increasing affine functions of the jamming level.
std::optional<PapSolution> solve_affine(const PapInstance& instance,
                                        const BarrierOptions& options = {});

std::optional<PapSolution> solve_level(const PapInstance& instance, StrategyClass mode,
                                       const BarrierOptions& options = {});

struct LevelOutcome {
  std::size_t level = 0;
  std::optional<PapSolution> solution;
};

struct PapOutcome {
  std::vector<LevelOutcome> levels;
  PapSolution best;
};

/// Solves every level and returns all of them together with the winner
/// (highest radar value; ties go to the lowest jamming level).
PapOutcome solve_all_levels(const JammingChannel& channel, const UtilityParams& params,
                            CovarianceSummary sigma, StrategyClass mode = StrategyClass::Full,
                            const std::optional<JammingChannel>& jammer_belief = std::nullopt,
                            const BarrierOptions& options = {});

PapSolution solve_pap(const JammingChannel& channel, const UtilityParams& params,
                      CovarianceSummary sigma, StrategyClass mode = StrategyClass::Full,
                      const std::optional<JammingChannel>& jammer_belief = std::nullopt,
                      const BarrierOptions& options = {});

struct Tp2Check {
  bool holds = true;
  /// Smallest (i, j, m, n), i > j, m > n, with P[i][m] P[j][n] < P[i][n] P[j][m].
  std::optional<std::array<std::size_t, 4>> witness;
};

struct TailConvexityCheck {
  bool holds = true;
  struct Witness {
    std::size_t tail;   // i in Pi_i(J) = P(R >= j_i | J)
    std::size_t level;  // middle level of the violating triple
  };
  std::optional<Witness> witness;
};

struct StructureReport {
  Tp2Check tp2;
  TailConvexityCheck tail;
};

Tp2Check check_tp2(const JammingChannel& channel);
TailConvexityCheck check_tail_convexity(const JammingChannel& channel);
StructureReport check_structure(const JammingChannel& channel);

struct KktReport {
  double stationarity = 0.0;
  double dual_feasibility = 0.0;
  double primal_feasibility = 0.0;
  double complementarity = 0.0;
  double residual = 0.0;  // max of the four
  /// Some P[J][m] is zero, so those coordinates were checked in the
  /// undivided form P[J][m] (2 e^{2x_m} - c1 sigma) = (c2/sigma) sum mu (P[J'][m] - P[J][m]).
  bool degenerate_likelihood = false;
};

/// Checks first-order optimality of a full or relaxed solution using
///   e^{2 x_m} = 1/2 [c1 sigma + sum_J' (P[J'][m]/P[J][m] - 1) mu_J' c2 / sigma].
KktReport verify_kkt(const PapSolution& solution, const PapInstance& instance);

struct ConcavityCheck {
  bool holds = true;
  std::optional<std::size_t> witness;  // middle level of the violating triple
  std::vector<double> jammer_utilities;
};

/// Evaluates the jammer's utility over the grid for a non-decreasing x and
/// checks that its divided second differences are <= 0.
ConcavityCheck check_jammer_concavity(const LogStrategy& x, const PapInstance& instance);

}  // namespace eccm
