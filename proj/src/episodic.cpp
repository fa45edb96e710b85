#include "zsg/episodic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "zsg/simplex.hpp"

namespace zsg {

double default_theorem_eta_episodic(const EpisodicGame& game) {
  return 1.0 / (8.0 * game.horizon);
}

EpisodicSolverState init_episodic(const EpisodicGame& game, double tau) {
  EpisodicSolverState st;
  const int H = game.horizon, nS = game.num_states;
  const int nA = game.num_actions_max, nB = game.num_actions_min;
  st.zeta.assign(H, JointPolicy::uniform(nS, nA, nB));
  st.zeta_bar.assign(H, JointPolicy::uniform(nS, nA, nB));
  st.values.resize(H);
  const double v0 = tau * (std::log(static_cast<double>(nA)) -
                           std::log(static_cast<double>(nB)));
  for (int h = 0; h < H; ++h) {
    st.values[h].q.assign(static_cast<size_t>(nS) * nA * nB, 0.0);
    st.values[h].v.assign(nS, v0);
  }
  st.iteration = 0;
  return st;
}

namespace {

// Same arithmetic as the matrix-game OMWU round so the H = 1 trajectory is
// bit-identical to omwu_matrix_step given identical eta, tau, payoff.
void policy_update_cell(const EpisodicSolverState& state, double eta, double tau, int h, int s,
                        int nA, int nB, JointPolicy& zeta_next, JointPolicy& zeta_bar_next,
                        std::span<double> g_mu, std::span<double> g_nu) {
  const double shrink = 1.0 - eta * tau;
  const std::vector<double>& q = state.values[h].q;
  const double* qs = q.data() + static_cast<size_t>(s) * nA * nB;
  const auto mu_bar = state.zeta_bar[h].mu_row(s);
  const auto nu_bar = state.zeta_bar[h].nu_row(s);

  for (int a = 0; a < nA; ++a) {
    const double* row = qs + static_cast<size_t>(a) * nB;
    double acc = 0.0;
    for (int b = 0; b < nB; ++b) acc += row[b] * nu_bar[b];
    g_mu[a] = acc;
  }
  for (int b = 0; b < nB; ++b) {
    double acc = 0.0;
    for (int a = 0; a < nA; ++a) acc += qs[static_cast<size_t>(a) * nB + b] * mu_bar[a];
    g_nu[b] = acc;
  }

  auto lz_mu = zeta_next.log_mu_row(s);
  auto lz_nu = zeta_next.log_nu_row(s);
  auto z_mu = zeta_next.mu_row(s);
  auto z_nu = zeta_next.nu_row(s);
  if (state.iteration >= 1) {
    const auto prev_mu = state.zeta[h].log_mu_row(s);
    const auto prev_nu = state.zeta[h].log_nu_row(s);
    for (int a = 0; a < nA; ++a) lz_mu[a] = shrink * prev_mu[a] + eta * g_mu[a];
    for (int b = 0; b < nB; ++b) lz_nu[b] = shrink * prev_nu[b] - eta * g_nu[b];
    log_normalize(lz_mu);
    log_normalize(lz_nu);
    for (int a = 0; a < nA; ++a) z_mu[a] = std::exp(lz_mu[a]);
    for (int b = 0; b < nB; ++b) z_nu[b] = std::exp(lz_nu[b]);
  } else {
    const auto& src = state.zeta[h];
    std::copy(src.log_mu_row(s).begin(), src.log_mu_row(s).end(), lz_mu.begin());
    std::copy(src.log_nu_row(s).begin(), src.log_nu_row(s).end(), lz_nu.begin());
    std::copy(src.mu_row(s).begin(), src.mu_row(s).end(), z_mu.begin());
    std::copy(src.nu_row(s).begin(), src.nu_row(s).end(), z_nu.begin());
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

// Q_h^(t+1) = r_h + E[V_{h+1}^(t)] (V_H == 0, no discount), then the convex
// V step with the fresh midpoints.
void value_update_cell(const EpisodicGame& game, const EpisodicSolverState& state,
                       const std::vector<JointPolicy>& zeta_bar_next, double alpha, double tau,
                       int h, int s, ValueTables& out) {
  const int nA = game.num_actions_max, nB = game.num_actions_min;
  double* qs = out.q.data() + static_cast<size_t>(s) * nA * nB;
  const auto mu = zeta_bar_next[h].mu_row(s);
  const auto nu = zeta_bar_next[h].nu_row(s);
  const bool terminal = (h == game.horizon - 1);
  double ev = 0.0;
  for (int a = 0; a < nA; ++a) {
    for (int b = 0; b < nB; ++b) {
      double q = game.r(h, s, a, b);
      if (!terminal) {
        const auto p = game.next(h, s, a, b);
        double nxt = 0.0;
        for (int sp = 0; sp < game.num_states; ++sp)
          nxt += p[sp] * state.values[h + 1].v[sp];
        q += nxt;
      }
      qs[static_cast<size_t>(a) * nB + b] = q;
      ev += mu[a] * q * nu[b];
    }
  }
  ev += tau * entropy(mu) - tau * entropy(nu);
  out.v[s] = (1.0 - alpha) * state.values[h].v[s] + alpha * ev;
}

void step_into(const EpisodicGame& game, const EpisodicSolverState& state, double eta, double tau,
               double alpha, std::vector<JointPolicy>& zeta_next,
               std::vector<JointPolicy>& zeta_bar_next, std::vector<ValueTables>& values_next,
               int jobs, bool parallel) {
  const int H = game.horizon, nS = game.num_states;
  const int nA = game.num_actions_max, nB = game.num_actions_min;
  const int cells = H * nS;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && jobs != 1)
#endif
  for (int c = 0; c < cells; ++c) {
    std::vector<double> g_mu(nA), g_nu(nB);
    policy_update_cell(state, eta, tau, c / nS, c % nS, nA, nB, zeta_next[c / nS],
                       zeta_bar_next[c / nS], g_mu, g_nu);
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && jobs != 1)
#endif
  for (int c = 0; c < cells; ++c)
    value_update_cell(game, state, zeta_bar_next, alpha, tau, c / nS, c % nS,
                      values_next[c / nS]);
  (void)jobs;
  (void)parallel;
}

void commit(EpisodicSolverState& state, std::vector<JointPolicy>&& zeta_next,
            std::vector<JointPolicy>&& zeta_bar_next, std::vector<ValueTables>&& values_next) {
  state.zeta = std::move(zeta_next);
  state.zeta_bar = std::move(zeta_bar_next);
  state.values = std::move(values_next);
  ++state.iteration;
}

void check_step_args(const EpisodicGame& game, double eta, double tau, double alpha) {
  if (eta * tau > 1.0) throw std::invalid_argument("episodic_step: need eta <= 1/tau");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("episodic_step: need alpha in (0,1]");
  (void)game;
}

}  // namespace

void episodic_step(const EpisodicGame& game, EpisodicSolverState& state, double eta, double tau,
                   double alpha, int jobs) {
  check_step_args(game, eta, tau, alpha);
  std::vector<JointPolicy> zeta_next = state.zeta, zeta_bar_next = state.zeta_bar;
  std::vector<ValueTables> values_next = state.values;
  step_into(game, state, eta, tau, alpha, zeta_next, zeta_bar_next, values_next, jobs, true);
  commit(state, std::move(zeta_next), std::move(zeta_bar_next), std::move(values_next));
}

namespace serial {
void episodic_step(const EpisodicGame& game, EpisodicSolverState& state, double eta, double tau,
                   double alpha) {
  check_step_args(game, eta, tau, alpha);
  std::vector<JointPolicy> zeta_next = state.zeta, zeta_bar_next = state.zeta_bar;
  std::vector<ValueTables> values_next = state.values;
  step_into(game, state, eta, tau, alpha, zeta_next, zeta_bar_next, values_next, 1, false);
  commit(state, std::move(zeta_next), std::move(zeta_bar_next), std::move(values_next));
}
}  // namespace serial

EpisodicRunResult run_episodic(const EpisodicGame& game, const SolverConfig& config,
                               const EpisodicReferenceSolution* reference) {
  if (config.tau <= 0.0) throw std::invalid_argument("run_episodic: tau must be > 0");
  EpisodicRunResult res;
  res.eta = config.eta > 0.0 ? config.eta : default_theorem_eta_episodic(game);
  res.alpha = config.alpha > 0.0 ? config.alpha : res.eta * config.tau;
  if (res.eta * config.tau > 1.0)
    throw std::invalid_argument("run_episodic: need eta <= 1/tau");

#ifdef _OPENMP
  if (config.jobs > 0) omp_set_num_threads(config.jobs);
#endif

  const int H = game.horizon, nS = game.num_states;
  const int nA = game.num_actions_max, nB = game.num_actions_min;
  res.state = init_episodic(game, config.tau);
  EpisodicSolverState& st = res.state;

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  for (long t = 0; t <= config.max_iters; ++t) {
    // Same split as run_discounted: policy halves first so the logged tuple
    // pairs zeta^(t) with the incoming zetabar^(t) and Q^(t).
    std::vector<JointPolicy> zeta_next = st.zeta, zeta_bar_next = st.zeta_bar;
    const int cells = H * nS;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (config.jobs != 1)
#endif
    for (int c = 0; c < cells; ++c) {
      std::vector<double> g_mu(nA), g_nu(nB);
      policy_update_cell(st, res.eta, config.tau, c / nS, c % nS, nA, nB, zeta_next[c / nS],
                         zeta_bar_next[c / nS], g_mu, g_nu);
    }

    const bool last = (t == config.max_iters);
    if (t % config.log_every == 0 || last) {
      const std::vector<double> gaps = episodic_duality_gap(game, config.tau, st.zeta_bar);
      const double now = elapsed();
      for (int h = 0; h < H; ++h) {
        MetricsRecord rec;
        rec.iter = t;
        rec.h = h;
        rec.dual_gap = gaps[h];
        if (reference) {
          double klz = 0.0, klb = 0.0, qmax = 0.0, qsum = 0.0;
          const JointPolicy& star = reference->zeta_star[h];
          for (int s = 0; s < nS; ++s) {
            klz += kl_divergence_logs(star.mu_row(s), star.log_mu_row(s),
                                      zeta_next[h].log_mu_row(s)) +
                   kl_divergence_logs(star.nu_row(s), star.log_nu_row(s),
                                      zeta_next[h].log_nu_row(s));
            klb += kl_divergence_logs(star.mu_row(s), star.log_mu_row(s),
                                      st.zeta_bar[h].log_mu_row(s)) +
                   kl_divergence_logs(star.nu_row(s), star.log_nu_row(s),
                                      st.zeta_bar[h].log_nu_row(s));
            const size_t off = static_cast<size_t>(s) * nA * nB;
            const double err = linf_distance(
                std::span<const double>(st.values[h].q.data() + off,
                                        static_cast<size_t>(nA) * nB),
                std::span<const double>(reference->values[h].q.data() + off,
                                        static_cast<size_t>(nA) * nB));
            qmax = std::max(qmax, err);
            qsum += err;
          }
          rec.kl_zeta = klz;
          rec.kl_zeta_bar = klb;
          rec.q_err = qmax;
          rec.q_err_sum = qsum;
        }
        rec.elapsed_s = now;
        res.trace.push_back(rec);
      }
      res.final_gap = gaps[0];
      if (gaps[0] <= config.tol) {
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

    std::vector<ValueTables> values_next = st.values;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (config.jobs != 1)
#endif
    for (int c = 0; c < cells; ++c)
      value_update_cell(game, st, zeta_bar_next, res.alpha, config.tau, c / nS, c % nS,
                        values_next[c / nS]);
    st.zeta = std::move(zeta_next);
    st.zeta_bar = std::move(zeta_bar_next);
    st.values = std::move(values_next);
    st.iteration = t + 1;
  }
  res.iterations = st.iteration;
  res.runtime_s = elapsed();
  return res;
}

}  // namespace zsg
