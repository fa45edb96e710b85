#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zsg/game.hpp"
#include "zsg/matrix_qre.hpp"
#include "zsg/policy.hpp"

namespace zsg {

// Ground-truth QRE of the regularized game, produced by the Shapley-style
// value-iteration oracle (independent of the OMWU solver loop).
struct ReferenceSolution {
  ValueTables values;      // Q*_tau, V*_tau
  JointPolicy zeta_star;   // (mu*_tau, nu*_tau)
  double residual = 0.0;   // final Bellman residual
};

struct EpisodicReferenceSolution {
  std::vector<ValueTables> values;     // per step h
  std::vector<JointPolicy> zeta_star;  // per step h
  double residual = 0.0;
};

// Exact regularized policy evaluation: dense linear solve of the per-state
// Bellman identities, residual <= 1e-12; Q from the one-step lookahead.
// tau = 0 gives the unregularized value.
ValueTables evaluate_policy_pair(const DiscountedGame& game, double tau, const JointPolicy& zeta);

// Soft (tau > 0) best-response value against the fixed side of `zeta`:
// side = kMax maximizes over mu with nu fixed, and vice versa. Returns the
// per-state value and the greedy (softmax) responder.
struct BestResponse {
  std::vector<double> v;
  std::vector<double> responder;  // [s][action] distribution of the optimizing player
};
BestResponse best_response_value(const DiscountedGame& game, double tau, const JointPolicy& zeta,
                                 Side side, double tol = 1e-12);

// Hard (tau = 0) variant; ties break toward the lowest action index.
BestResponse hard_best_response_value(const DiscountedGame& game, const JointPolicy& zeta,
                                      Side side, double tol = 1e-12);

// max_s [max_mu' V_tau^{mu',nu}(s) - min_nu' V_tau^{mu,nu'}(s)], or the
// rho-weighted average when rho is given.
double duality_gap(const DiscountedGame& game, double tau, const JointPolicy& zeta,
                   double tol = 1e-12, std::span<const double> rho = {});

double unregularized_gap(const DiscountedGame& game, const JointPolicy& zeta,
                         double tol = 1e-12);

ReferenceSolution solve_reference_qre(const DiscountedGame& game, double tau, double tol,
                                      int jobs = 0);
EpisodicReferenceSolution solve_reference_qre(const EpisodicGame& game, double tau, double tol);

// Episodic exact best-response backward pass; v is [h][s].
std::vector<std::vector<double>> episodic_best_response_values(
    const EpisodicGame& game, double tau, const std::vector<JointPolicy>& zeta, Side side);

// Per-step max_s duality gap of an episodic policy pair.
std::vector<double> episodic_duality_gap(const EpisodicGame& game, double tau,
                                         const std::vector<JointPolicy>& zeta);

// Theorem-1 style distances between an iterate and the reference.
struct KlMetrics {
  double kl_zeta_sum = 0.0;      // sum_s KL_s(zeta* || zeta)
  double kl_zeta_bar_sum = 0.0;  // sum_s KL_s(zeta* || zeta_bar)
  double q_err_sum = 0.0;        // sum_s ||Q(s) - Q*(s)||_inf
  double q_err_max = 0.0;        // max_s ||Q(s) - Q*(s)||_inf
};
KlMetrics kl_metrics(const JointPolicy& zeta, const JointPolicy& zeta_bar,
                     const std::vector<double>& q, const ReferenceSolution& ref);

// JSON cache for expensive references, keyed by (game hash, tau, tol).
std::string serialize_reference(const ReferenceSolution& ref);
ReferenceSolution parse_reference(const std::string& json_text, int nS, int nA, int nB);
std::string reference_cache_name(uint64_t game_hash, double tau, double tol);

}  // namespace zsg
