#include "zsg/discounted.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "zsg/simplex.hpp"

namespace zsg {

double default_theorem_eta_discounted(const DiscountedGame& game) {
  const double om = 1.0 - game.gamma;
  return om * om * om / (32000.0 * game.num_states);
}

DiscountedSolverState init_discounted(const DiscountedGame& game, double tau) {
  DiscountedSolverState st;
  const int nS = game.num_states, nA = game.num_actions_max, nB = game.num_actions_min;
  st.zeta = JointPolicy::uniform(nS, nA, nB);
  st.zeta_bar = JointPolicy::uniform(nS, nA, nB);
  st.values.q.assign(static_cast<size_t>(nS) * nA * nB, 0.0);
  st.values.v.assign(nS, tau * (std::log(static_cast<double>(nA)) -
                                std::log(static_cast<double>(nB))));
  st.iteration = 0;
  return st;
}

namespace {

// Marginal payoffs g_mu = Q(s) nu, g_nu = Q(s)^T mu for one state.
void marginal_payoffs(const DiscountedGame& game, const std::vector<double>& q, int s,
                      std::span<const double> mu, std::span<const double> nu,
                      std::span<double> g_mu, std::span<double> g_nu) {
  const int nA = game.num_actions_max, nB = game.num_actions_min;
  const double* qs = q.data() + static_cast<size_t>(s) * nA * nB;
  std::fill(g_mu.begin(), g_mu.end(), 0.0);
  std::fill(g_nu.begin(), g_nu.end(), 0.0);
  for (int a = 0; a < nA; ++a) {
    const double* row = qs + static_cast<size_t>(a) * nB;
    double acc = 0.0;
    for (int b = 0; b < nB; ++b) {
      acc += row[b] * nu[b];
      g_nu[b] += row[b] * mu[a];
    }
    g_mu[a] = acc;
  }
}

void policy_update_state(const DiscountedGame& game, const DiscountedSolverState& state,
                         double eta, double tau, int s, JointPolicy& zeta_next,
                         JointPolicy& zeta_bar_next, std::span<double> g_mu,
                         std::span<double> g_nu) {
  const int nA = game.num_actions_max, nB = game.num_actions_min;
  const double shrink = 1.0 - eta * tau;

  marginal_payoffs(game, state.values.q, s, state.zeta_bar.mu_row(s), state.zeta_bar.nu_row(s),
                   g_mu, g_nu);

  auto lz_mu = zeta_next.log_mu_row(s);
  auto lz_nu = zeta_next.log_nu_row(s);
  if (state.iteration >= 1) {
    auto prev_mu = state.zeta.log_mu_row(s);
    auto prev_nu = state.zeta.log_nu_row(s);
    for (int a = 0; a < nA; ++a) lz_mu[a] = shrink * prev_mu[a] + eta * g_mu[a];
    for (int b = 0; b < nB; ++b) lz_nu[b] = shrink * prev_nu[b] - eta * g_nu[b];
    log_normalize(lz_mu);
    log_normalize(lz_nu);
  } else {
    // zeta^(0) stays uniform; Eq. (9a) starts at t = 1.
    std::copy(state.zeta.log_mu_row(s).begin(), state.zeta.log_mu_row(s).end(), lz_mu.begin());
    std::copy(state.zeta.log_nu_row(s).begin(), state.zeta.log_nu_row(s).end(), lz_nu.begin());
  }
  auto z_mu = zeta_next.mu_row(s);
  auto z_nu = zeta_next.nu_row(s);
  if (state.iteration >= 1) {
    for (int a = 0; a < nA; ++a) z_mu[a] = std::exp(lz_mu[a]);
    for (int b = 0; b < nB; ++b) z_nu[b] = std::exp(lz_nu[b]);
  } else {
    std::copy(state.zeta.mu_row(s).begin(), state.zeta.mu_row(s).end(), z_mu.begin());
    std::copy(state.zeta.nu_row(s).begin(), state.zeta.nu_row(s).end(), z_nu.begin());
  }

  auto lb_mu = zeta_bar_next.log_mu_row(s);
  auto lb_nu = zeta_bar_next.log_nu_row(s);
  for (int a = 0; a < nA; ++a) lb_mu[a] = shrink * lz_mu[a] + eta * g_mu[a];
  for (int b = 0; b < nB; ++b) lb_nu[b] = shrink * lz_nu[b] - eta * g_nu[b];
  log_normalize(lb_mu);
  log_normalize(lb_nu);
  auto b_mu = zeta_bar_next.mu_row(s);
  auto b_nu = zeta_bar_next.nu_row(s);
  for (int a = 0; a < nA; ++a) b_mu[a] = std::exp(lb_mu[a]);
  for (int b = 0; b < nB; ++b) b_nu[b] = std::exp(lb_nu[b]);
}

void value_update_state(const DiscountedGame& game, const DiscountedSolverState& state,
                        const JointPolicy& zeta_bar_next, double alpha, double tau, int s,
                        ValueTables& out) {
  const int nA = game.num_actions_max, nB = game.num_actions_min;
  double* qs = out.q.data() + static_cast<size_t>(s) * nA * nB;
  const auto mu = zeta_bar_next.mu_row(s);
  const auto nu = zeta_bar_next.nu_row(s);
  double ev = 0.0;
  for (int a = 0; a < nA; ++a) {
    for (int b = 0; b < nB; ++b) {
      const auto p = game.next(s, a, b);
      double nxt = 0.0;
      for (int sp = 0; sp < game.num_states; ++sp) nxt += p[sp] * state.values.v[sp];
      const double q = game.r(s, a, b) + game.gamma * nxt;
      qs[static_cast<size_t>(a) * nB + b] = q;
      ev += mu[a] * q * nu[b];
    }
  }
  ev += tau * entropy(mu) - tau * entropy(nu);
  out.v[s] = (1.0 - alpha) * state.values.v[s] + alpha * ev;
}

}  // namespace

void policy_update(const DiscountedGame& game, const DiscountedSolverState& state, double eta,
                   double tau, JointPolicy& zeta_next, JointPolicy& zeta_bar_next, int jobs) {
  if (eta * tau > 1.0) throw std::invalid_argument("policy_update: need eta <= 1/tau");
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (jobs != 1)
#endif
  for (int s = 0; s < game.num_states; ++s) {
    std::vector<double> g_mu(game.num_actions_max), g_nu(game.num_actions_min);
    policy_update_state(game, state, eta, tau, s, zeta_next, zeta_bar_next, g_mu, g_nu);
  }
  (void)jobs;
}

void value_update(const DiscountedGame& game, const DiscountedSolverState& state,
                  const JointPolicy& zeta_bar_next, double alpha, double tau, ValueTables& out,
                  int jobs) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (jobs != 1)
#endif
  for (int s = 0; s < game.num_states; ++s)
    value_update_state(game, state, zeta_bar_next, alpha, tau, s, out);
  (void)jobs;
}

namespace serial {
void discounted_step(const DiscountedGame& game, DiscountedSolverState& state, double eta,
                     double tau, double alpha) {
  if (eta * tau > 1.0) throw std::invalid_argument("discounted_step: need eta <= 1/tau");
  const int nS = game.num_states, nA = game.num_actions_max, nB = game.num_actions_min;
  JointPolicy zeta_next = state.zeta, zeta_bar_next = state.zeta_bar;
  ValueTables values_next;
  values_next.v.assign(nS, 0.0);
  values_next.q.assign(static_cast<size_t>(nS) * nA * nB, 0.0);
  std::vector<double> g_mu(nA), g_nu(nB);
  for (int s = 0; s < nS; ++s)
    policy_update_state(game, state, eta, tau, s, zeta_next, zeta_bar_next, g_mu, g_nu);
  for (int s = 0; s < nS; ++s)
    value_update_state(game, state, zeta_bar_next, alpha, tau, s, values_next);
  state.zeta = std::move(zeta_next);
  state.zeta_bar = std::move(zeta_bar_next);
  state.values = std::move(values_next);
  ++state.iteration;
}
}  // namespace serial

void discounted_step(const DiscountedGame& game, DiscountedSolverState& state, double eta,
                     double tau, double alpha, int jobs) {
  const int nS = game.num_states, nA = game.num_actions_max, nB = game.num_actions_min;
  JointPolicy zeta_next = state.zeta, zeta_bar_next = state.zeta_bar;
  ValueTables values_next;
  values_next.v.assign(nS, 0.0);
  values_next.q.assign(static_cast<size_t>(nS) * nA * nB, 0.0);
  policy_update(game, state, eta, tau, zeta_next, zeta_bar_next, jobs);
  value_update(game, state, zeta_bar_next, alpha, tau, values_next, jobs);
  state.zeta = std::move(zeta_next);
  state.zeta_bar = std::move(zeta_bar_next);
  state.values = std::move(values_next);
  ++state.iteration;
}

namespace {

void accumulate_invariants(const DiscountedGame& game, const DiscountedSolverState& before,
                           const DiscountedSolverState& after, InvariantStats& inv) {
  inv.checked = true;
  for (int s = 0; s < game.num_states; ++s) {
    inv.policy_gap_l1_max =
        std::max(inv.policy_gap_l1_max,
                 l1_distance(after.zeta_bar.mu_row(s), after.zeta.mu_row(s)) +
                     l1_distance(after.zeta_bar.nu_row(s), after.zeta.nu_row(s)));
    inv.bar_step_l1_max =
        std::max(inv.bar_step_l1_max,
                 l1_distance(after.zeta_bar.mu_row(s), before.zeta_bar.mu_row(s)) +
                     l1_distance(after.zeta_bar.nu_row(s), before.zeta_bar.nu_row(s)));
    for (double v : after.zeta.log_mu_row(s))
      inv.log_policy_max = std::max(inv.log_policy_max, std::abs(v));
    for (double v : after.zeta.log_nu_row(s))
      inv.log_policy_max = std::max(inv.log_policy_max, std::abs(v));
    inv.v_low = std::min(inv.v_low, after.values.v[s]);
    inv.v_high = std::max(inv.v_high, after.values.v[s]);
  }
  for (double q : after.values.q) {
    inv.q_low = std::min(inv.q_low, q);
    inv.q_high = std::max(inv.q_high, q);
  }
}

}  // namespace

RunResult run_discounted(const DiscountedGame& game, const SolverConfig& config,
                         const ReferenceSolution* reference) {
  if (config.tau <= 0.0) throw std::invalid_argument("run_discounted: tau must be > 0");
  RunResult res;
  res.eta = config.eta > 0.0
                ? config.eta
                : (config.mode == StepMode::kTheorem ? default_theorem_eta_discounted(game)
                                                     : 0.1 * (1.0 - game.gamma));
  res.alpha = config.alpha > 0.0 ? config.alpha : res.eta * config.tau;
  if (res.eta * config.tau > 1.0)
    throw std::invalid_argument("run_discounted: need eta <= 1/tau");

#ifdef _OPENMP
  if (config.jobs > 0) omp_set_num_threads(config.jobs);
#endif

  res.state = init_discounted(game, config.tau);
  DiscountedSolverState& st = res.state;
  DiscountedSolverState prev;
  const int nS = game.num_states, nA = game.num_actions_max, nB = game.num_actions_min;

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  for (long t = 0; t <= config.max_iters; ++t) {
    // Split the loop body around the logging point so the logged tuple is
    // coherent: zeta^(t) fresh, zetabar^(t) and Q^(t) from the incoming state.
    JointPolicy zeta_next = st.zeta, zeta_bar_next = st.zeta_bar;
    policy_update(game, st, res.eta, config.tau, zeta_next, zeta_bar_next, config.jobs);

    const bool last = (t == config.max_iters);
    if (t % config.log_every == 0 || last) {
      MetricsRecord rec;
      rec.iter = t;
      rec.dual_gap = duality_gap(game, config.tau, st.zeta_bar);
      if (reference) {
        const KlMetrics m = kl_metrics(zeta_next, st.zeta_bar, st.values.q, *reference);
        rec.kl_zeta = m.kl_zeta_sum;
        rec.kl_zeta_bar = m.kl_zeta_bar_sum;
        rec.q_err = m.q_err_max;
        rec.q_err_sum = m.q_err_sum;
      }
      rec.elapsed_s = elapsed();
      res.trace.push_back(rec);
      res.final_gap = rec.dual_gap;
      if (rec.dual_gap <= config.tol) {
        res.converged = true;
        st.zeta = std::move(zeta_next);
        st.iteration = t;
        break;
      }
    }
    if (last) {
      st.zeta = std::move(zeta_next);
      st.iteration = t;
      break;
    }

    ValueTables values_next;
    values_next.v.assign(nS, 0.0);
    values_next.q.assign(static_cast<size_t>(nS) * nA * nB, 0.0);
    value_update(game, st, zeta_bar_next, res.alpha, config.tau, values_next, config.jobs);
    if (config.check_invariants) prev = st;
    st.zeta = std::move(zeta_next);
    st.zeta_bar = std::move(zeta_bar_next);
    st.values = std::move(values_next);
    st.iteration = t + 1;
    if (config.check_invariants) accumulate_invariants(game, prev, st, res.invariants);
  }
  res.iterations = st.iteration;
  res.runtime_s = elapsed();
  return res;
}

}  // namespace zsg
