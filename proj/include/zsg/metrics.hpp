#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace zsg {

// One logged row of a solver trace. Reference-dependent fields stay empty when
// no reference solution was supplied. `h` is set only for episodic traces.
struct MetricsRecord {
  long iter = 0;
  std::optional<int> h;
  std::optional<double> kl_zeta;      // sum_s KL_s(zeta* || zeta^(t))
  std::optional<double> kl_zeta_bar;  // sum_s KL_s(zeta* || zetabar^(t))
  std::optional<double> q_err;        // max_s ||Q^(t)(s) - Q*(s)||_inf
  double dual_gap = 0.0;
  double elapsed_s = 0.0;
  // Carried for theorem-bound checks, not part of the CSV schema.
  std::optional<double> q_err_sum;    // sum_s ||Q^(t)(s) - Q*(s)||_inf
};

// CSV schema: "iter,kl_zeta,kl_zeta_bar,q_err,dual_gap,elapsed_s"
// (episodic inserts an `h` column after iter). Empty fields for absent values.
std::string trace_to_csv(const std::vector<MetricsRecord>& trace, bool episodic);

struct RateFit {
  double rho_hat = 0.0;
  double r_squared = 0.0;
  long window_begin = 0, window_end = 0;  // iteration range used
};

// Least-squares line through (t, log v); rho_hat = exp(slope). Window defaults
// to the last half of the series. Throws on nonpositive values in the window.
RateFit fit_rate(const std::vector<std::pair<long, double>>& series, long window_begin = -1);

struct TheoremCheckConfig {
  double eta = 0.0;
  double tau = 0.0;
  double gamma = 0.0;   // discounted
  int horizon = 0;      // episodic
  int num_states = 0;
  // Inequalities verified up to this absolute allowance; RHS values decay
  // below what f64 measurement of the LHS can resolve.
  double atol = 1e-9;
};

struct TheoremCheckResult {
  bool holds = true;
  double worst_margin = std::numeric_limits<double>::infinity();  // min over t of rhs - lhs
};

// Theorem 1: contraction bound on KL and Q-error (per logged iterate).
TheoremCheckResult check_thm1_kl_bound(const std::vector<MetricsRecord>& trace,
                                       const TheoremCheckConfig& cfg);
// Theorem 1: duality-gap bound.
TheoremCheckResult check_thm1_gap_bound(const std::vector<MetricsRecord>& trace,
                                        const TheoremCheckConfig& cfg);
// Theorem 2: per-step Q-error bound, rows with t < T_h excluded.
TheoremCheckResult check_thm2_q_bound(const std::vector<MetricsRecord>& trace,
                                      const TheoremCheckConfig& cfg);
// Theorem 2: duality-gap bound at the first step.
TheoremCheckResult check_thm2_gap_bound(const std::vector<MetricsRecord>& trace,
                                        const TheoremCheckConfig& cfg);

long thm2_warmup_start(const TheoremCheckConfig& cfg, int h_one_based);

}  // namespace zsg
