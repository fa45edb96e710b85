#include "zsg/matrix_qre.hpp"

#include <cmath>
#include <stdexcept>

#include "zsg/simplex.hpp"

namespace zsg {

double PayoffMatrix::inf_norm() const {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

MatrixGameState MatrixGameState::uniform(int rows, int cols) {
  MatrixGameState s;
  s.mu.assign(rows, 1.0 / rows);
  s.nu.assign(cols, 1.0 / cols);
  s.mu_bar = s.mu;
  s.nu_bar = s.nu;
  s.log_mu.assign(rows, -std::log(static_cast<double>(rows)));
  s.log_nu.assign(cols, -std::log(static_cast<double>(cols)));
  s.log_mu_bar = s.log_mu;
  s.log_nu_bar = s.log_nu;
  return s;
}

double default_matrix_step(const PayoffMatrix& A, double tau) {
  const double n = A.inf_norm();
  if (n == 0.0) return 1.0 / (2.0 * tau);
  return std::min(1.0 / (2.0 * n + 2.0 * tau), 1.0 / (4.0 * n));
}

namespace {

void matvec(const PayoffMatrix& A, std::span<const double> x, std::span<double> out) {
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += A.at(i, j) * x[j];
    out[i] = s;
  }
}

void matvec_t(const PayoffMatrix& A, std::span<const double> x, std::span<double> out) {
  for (int j = 0; j < A.cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < A.rows; ++i) s += A.at(i, j) * x[i];
    out[j] = s;
  }
}

// new_log(a) = (1 - eta*tau) * base_log(a) + sign * eta * g(a), then log-normalize.
void mwu_update(std::span<const double> base_log, std::span<const double> g, double eta,
                double tau, double sign, std::span<double> out_log, std::span<double> out_lin) {
  for (size_t i = 0; i < base_log.size(); ++i)
    out_log[i] = (1.0 - eta * tau) * base_log[i] + sign * eta * g[i];
  log_normalize(out_log);
  for (size_t i = 0; i < base_log.size(); ++i) out_lin[i] = std::exp(out_log[i]);
}

}  // namespace

MatrixGameState omwu_matrix_step(const PayoffMatrix& A, double tau, double eta,
                                 const MatrixGameState& state) {
  if (eta > 1.0 / tau) throw std::invalid_argument("omwu_matrix_step: eta must be <= 1/tau");
  std::vector<double> g_mu(A.rows), g_nu(A.cols);
  matvec(A, state.nu_bar, g_mu);   // [A nu_bar]_a
  matvec_t(A, state.mu_bar, g_nu); // [A^T mu_bar]_b

  MatrixGameState next = state;
  next.iteration = state.iteration + 1;
  mwu_update(state.log_mu, g_mu, eta, tau, +1.0, next.log_mu, next.mu);
  mwu_update(state.log_nu, g_nu, eta, tau, -1.0, next.log_nu, next.nu);
  mwu_update(next.log_mu, g_mu, eta, tau, +1.0, next.log_mu_bar, next.mu_bar);
  mwu_update(next.log_nu, g_nu, eta, tau, -1.0, next.log_nu_bar, next.nu_bar);
  return next;
}

MatrixQreResult solve_matrix_qre_from(const PayoffMatrix& A, double tau, double eta, double tol,
                                      long max_iters, const MatrixGameState& start) {
  if (tau <= 0.0) throw std::invalid_argument("solve_matrix_qre: tau must be > 0");
  if (eta <= 0.0) eta = default_matrix_step(A, tau);
  MatrixGameState st = start;
  MatrixQreResult res;
  for (long t = 0;; ++t) {
    const double gap = matrix_duality_gap(A, tau, st.mu, st.nu);
    if (gap <= tol) {
      res.converged = true;
      res.gap = gap;
      res.iterations = t;
      break;
    }
    if (t >= max_iters) {
      res.converged = false;
      res.gap = gap;
      res.iterations = t;
      break;
    }
    st = omwu_matrix_step(A, tau, eta, st);
  }
  res.mu = st.mu;
  res.nu = st.nu;
  res.state = std::move(st);
  return res;
}

MatrixQreResult solve_matrix_qre(const PayoffMatrix& A, double tau, double eta, double tol,
                                 long max_iters) {
  return solve_matrix_qre_from(A, tau, eta, tol, max_iters,
                               MatrixGameState::uniform(A.rows, A.cols));
}

double smoothed_best_response_value(const PayoffMatrix& A, double tau, Side side,
                                    std::span<const double> opponent) {
  if (side == Side::kMax) {
    std::vector<double> g(A.rows);
    matvec(A, opponent, g);
    for (double& v : g) v /= tau;
    return tau * log_sum_exp(g) - tau * entropy(opponent);
  }
  std::vector<double> g(A.cols);
  matvec_t(A, opponent, g);
  for (double& v : g) v = -v / tau;
  return -tau * log_sum_exp(g) + tau * entropy(opponent);
}

double matrix_duality_gap(const PayoffMatrix& A, double tau, std::span<const double> mu,
                          std::span<const double> nu) {
  return smoothed_best_response_value(A, tau, Side::kMax, nu) -
         smoothed_best_response_value(A, tau, Side::kMin, mu);
}

double matrix_game_value(const PayoffMatrix& A, double tau, std::span<const double> mu,
                         std::span<const double> nu) {
  double v = 0.0;
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) v += mu[i] * A.at(i, j) * nu[j];
  return v + tau * entropy(mu) - tau * entropy(nu);
}

}  // namespace zsg
