#pragma once

#include <functional>
#include <vector>

#include "zsg/evaluation.hpp"
#include "zsg/game.hpp"
#include "zsg/metrics.hpp"
#include "zsg/policy.hpp"

namespace zsg {

// Iterate of the single-loop OMWU solver. Before loop body t runs, `zeta`
// holds zeta^(t-1) (zeta^(0) at t=0), `zeta_bar` holds zetabar^(t), and the
// tables hold Q^(t), V^(t).
struct DiscountedSolverState {
  JointPolicy zeta;
  JointPolicy zeta_bar;
  ValueTables values;
  long iteration = 0;
};

// Worst observed margins of the per-iteration invariants (>= 0 means satisfied).
struct InvariantStats {
  double policy_gap_l1_max = 0.0;   // ||zetabar^(t) - zeta^(t)||_1, bound 2*eta/(1-gamma)
  double bar_step_l1_max = 0.0;     // ||zetabar^(t+1) - zetabar^(t)||_1, bound 6*eta/(1-gamma)
  double log_policy_max = 0.0;      // ||log zeta||_inf, bound 2/((1-gamma)*tau)
  double v_low = 0.0, v_high = 0.0; // extremes of V^(t)
  double q_low = 0.0, q_high = 0.0; // extremes of Q^(t)
  bool checked = false;
};

double default_theorem_eta_discounted(const DiscountedGame& game);

DiscountedSolverState init_discounted(const DiscountedGame& game, double tau);

// Eqs. (9a)/(9b): zeta^(t) from zeta^(t-1) (skipped at t = 0) and
// zetabar^(t+1) from the fresh zeta^(t), both with the marginal payoffs
// Q^(t)(s) * zetabar^(t)(s). States are processed in parallel.
void policy_update(const DiscountedGame& game, const DiscountedSolverState& state, double eta,
                   double tau, JointPolicy& zeta_next, JointPolicy& zeta_bar_next, int jobs = 0);

// Eq. (10): Q^(t+1) = r + gamma * E[V^(t)], then the convex-combination V step
// driven by the midpoint policies.
void value_update(const DiscountedGame& game, const DiscountedSolverState& state,
                  const JointPolicy& zeta_bar_next, double alpha, double tau, ValueTables& out,
                  int jobs = 0);

// Serial reference of one full loop body, plain loops, no OpenMP. Kept for
// testing and benchmarking the parallel kernels.
namespace serial {
void discounted_step(const DiscountedGame& game, DiscountedSolverState& state, double eta,
                     double tau, double alpha);
}

// One loop body using the parallel kernels.
void discounted_step(const DiscountedGame& game, DiscountedSolverState& state, double eta,
                     double tau, double alpha, int jobs = 0);

struct RunResult {
  DiscountedSolverState state;
  std::vector<MetricsRecord> trace;
  bool converged = false;
  long iterations = 0;
  double final_gap = 0.0;
  double runtime_s = 0.0;
  double eta = 0.0, alpha = 0.0;  // resolved values actually used
  InvariantStats invariants;
};

RunResult run_discounted(const DiscountedGame& game, const SolverConfig& config,
                         const ReferenceSolution* reference = nullptr);

}  // namespace zsg
