#pragma once

// Test-side oracles, deliberately independent of the solver code paths they
// check: damped fixed-point and exponentiated-gradient QRE solvers, a linear
// scalar transcription of the OMWU round, truncated-series policy evaluation,
// and brute-force grid searches.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "zsg/game.hpp"
#include "zsg/matrix_qre.hpp"
#include "zsg/policy.hpp"
#include "zsg/simplex.hpp"

namespace oracle {

struct QrePoint {
  std::vector<double> mu, nu;
  bool converged = false;
  long iterations = 0;
};

inline std::vector<double> softmax_scaled(const zsg::PayoffMatrix& A,
                                          const std::vector<double>& nu, double tau,
                                          bool transpose_negate) {
  std::vector<double> g;
  if (!transpose_negate) {
    g.resize(A.rows);
    for (int i = 0; i < A.rows; ++i) {
      double s = 0.0;
      for (int j = 0; j < A.cols; ++j) s += A.at(i, j) * nu[j];
      g[i] = s / tau;
    }
  } else {
    g.resize(A.cols);
    for (int j = 0; j < A.cols; ++j) {
      double s = 0.0;
      for (int i = 0; i < A.rows; ++i) s += A.at(i, j) * nu[i];
      g[j] = -s / tau;
    }
  }
  return zsg::softmax(g);
}

// Damped best-response map mu <- (1-beta) mu + beta softmax(A nu / tau),
// symmetric for nu; residual is the undamped fixed-point violation. Only
// convergent for moderate tau (the map's Lipschitz constant is ~||A||/tau).
inline QrePoint damped_fixed_point_qre(const zsg::PayoffMatrix& A, double tau, double beta = 0.1,
                                       double tol = 1e-12, long max_iters = 1000000) {
  QrePoint p;
  p.mu.assign(A.rows, 1.0 / A.rows);
  p.nu.assign(A.cols, 1.0 / A.cols);
  for (long t = 0; t < max_iters; ++t) {
    const std::vector<double> bm = softmax_scaled(A, p.nu, tau, false);
    const std::vector<double> bn = softmax_scaled(A, p.mu, tau, true);
    double res = 0.0;
    for (int i = 0; i < A.rows; ++i) res = std::max(res, std::abs(bm[i] - p.mu[i]));
    for (int j = 0; j < A.cols; ++j) res = std::max(res, std::abs(bn[j] - p.nu[j]));
    if (res <= tol) {
      p.converged = true;
      p.iterations = t;
      return p;
    }
    for (int i = 0; i < A.rows; ++i) p.mu[i] = (1.0 - beta) * p.mu[i] + beta * bm[i];
    for (int j = 0; j < A.cols; ++j) p.nu[j] = (1.0 - beta) * p.nu[j] + beta * bn[j];
  }
  p.iterations = max_iters;
  return p;
}

// Exponentiated gradient on the min player's marginal objective
// f(nu) = tau*lse(A nu / tau) - tau*H(nu), which is tau-strongly convex over
// the simplex; mu* is then the closed-form softmax response. Stable for the
// small-tau instances where the damped map diverges.
inline QrePoint exp_gradient_qre(const zsg::PayoffMatrix& A, double tau, double tol = 1e-12,
                                 long max_iters = 2000000) {
  QrePoint p;
  p.nu.assign(A.cols, 1.0 / A.cols);
  const double n = A.inf_norm();
  const double step = 1.0 / (n * n / tau + tau);
  std::vector<double> grad(A.cols), log_nu(A.cols, -std::log(static_cast<double>(A.cols)));
  for (long t = 0; t < max_iters; ++t) {
    p.mu = softmax_scaled(A, p.nu, tau, false);
    const double gap = zsg::matrix_duality_gap(A, tau, p.mu, p.nu);
    if (gap <= tol) {
      p.converged = true;
      p.iterations = t;
      return p;
    }
    for (int j = 0; j < A.cols; ++j) {
      double s = 0.0;
      for (int i = 0; i < A.rows; ++i) s += A.at(i, j) * p.mu[i];
      grad[j] = s + tau * (1.0 + log_nu[j]);
    }
    for (int j = 0; j < A.cols; ++j) log_nu[j] -= step * grad[j];
    zsg::log_normalize(log_nu);
    for (int j = 0; j < A.cols; ++j) p.nu[j] = std::exp(log_nu[j]);
  }
  p.mu = softmax_scaled(A, p.nu, tau, false);
  p.iterations = max_iters;
  return p;
}

// Literal linear-domain transcription of one OMWU round, Eqs. (8a)-(8b):
// powers and exponentials taken directly on probabilities, no log tricks.
struct OmwuPair {
  std::vector<double> mu, nu, mu_bar, nu_bar;
};

inline std::vector<double> mwu_linear(const std::vector<double>& base,
                                      const std::vector<double>& g, double eta, double tau,
                                      double sign) {
  std::vector<double> out(base.size());
  double z = 0.0;
  for (size_t i = 0; i < base.size(); ++i) {
    out[i] = std::pow(base[i], 1.0 - eta * tau) * std::exp(sign * eta * g[i]);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

inline OmwuPair omwu_round_linear(const zsg::PayoffMatrix& A, double tau, double eta,
                                  const OmwuPair& in) {
  std::vector<double> g_mu(A.rows, 0.0), g_nu(A.cols, 0.0);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) {
      g_mu[i] += A.at(i, j) * in.nu_bar[j];
      g_nu[j] += A.at(i, j) * in.mu_bar[i];
    }
  OmwuPair out;
  out.mu = mwu_linear(in.mu, g_mu, eta, tau, +1.0);
  out.nu = mwu_linear(in.nu, g_nu, eta, tau, -1.0);
  out.mu_bar = mwu_linear(out.mu, g_mu, eta, tau, +1.0);
  out.nu_bar = mwu_linear(out.nu, g_nu, eta, tau, -1.0);
  return out;
}

// V_K(s): K applications of the regularized policy Bellman map from V = 0.
inline std::vector<double> truncated_series_value(const zsg::DiscountedGame& g, double tau,
                                                  const zsg::JointPolicy& zeta, long K) {
  const int nS = g.num_states, nA = g.num_actions_max, nB = g.num_actions_min;
  std::vector<double> v(nS, 0.0), vn(nS);
  for (long k = 0; k < K; ++k) {
    for (int s = 0; s < nS; ++s) {
      const auto mu = zeta.mu_row(s);
      const auto nu = zeta.nu_row(s);
      double acc = tau * zsg::entropy(mu) - tau * zsg::entropy(nu);
      for (int a = 0; a < nA; ++a)
        for (int b = 0; b < nB; ++b) {
          double nxt = 0.0;
          const auto p = g.next(s, a, b);
          for (int sp = 0; sp < nS; ++sp) nxt += p[sp] * v[sp];
          acc += mu[a] * nu[b] * (g.r(s, a, b) + g.gamma * nxt);
        }
      vn[s] = acc;
    }
    v.swap(vn);
  }
  return v;
}

// Brute-force smoothed best response over the 2-simplex (2-action side only).
inline double grid_best_response(const zsg::PayoffMatrix& A, double tau, zsg::Side side,
                                 const std::vector<double>& opponent, double resolution = 1e-4) {
  double best = side == zsg::Side::kMax ? -1e300 : 1e300;
  const int steps = static_cast<int>(std::lround(1.0 / resolution));
  for (int k = 0; k <= steps; ++k) {
    const double p = static_cast<double>(k) / steps;
    const std::vector<double> own = {p, 1.0 - p};
    double val = 0.0;
    if (side == zsg::Side::kMax) {
      for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) val += own[i] * A.at(i, j) * opponent[j];
      val += tau * zsg::entropy(own) - tau * zsg::entropy(opponent);
      best = std::max(best, val);
    } else {
      for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) val += opponent[i] * A.at(i, j) * own[j];
      val += tau * zsg::entropy(opponent) - tau * zsg::entropy(own);
      best = std::min(best, val);
    }
  }
  return best;
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, int n, double spread = 2.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<double> logits(n);
  for (double& v : logits) v = u(rng);
  return zsg::softmax(logits);
}

inline zsg::JointPolicy random_policy(std::mt19937_64& rng, int nS, int nA, int nB) {
  zsg::JointPolicy p = zsg::JointPolicy::uniform(nS, nA, nB);
  for (int s = 0; s < nS; ++s) {
    const std::vector<double> m = random_simplex(rng, nA);
    const std::vector<double> n = random_simplex(rng, nB);
    std::copy(m.begin(), m.end(), p.mu_row(s).begin());
    std::copy(n.begin(), n.end(), p.nu_row(s).begin());
    for (int a = 0; a < nA; ++a) p.log_mu_row(s)[a] = std::log(m[a]);
    for (int b = 0; b < nB; ++b) p.log_nu_row(s)[b] = std::log(n[b]);
  }
  return p;
}

}  // namespace oracle
