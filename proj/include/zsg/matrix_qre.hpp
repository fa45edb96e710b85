#pragma once

#include <span>
#include <vector>

namespace zsg {

// Row-major payoff matrix of a zero-sum matrix game (max player owns rows).
struct PayoffMatrix {
  int rows = 0, cols = 0;
  std::vector<double> a;
  double at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
  double inf_norm() const;  // max entrywise absolute value
};

// One OMWU iterate: current policies and extrapolated ("midpoint") policies,
// kept in both linear and log domain.
struct MatrixGameState {
  std::vector<double> mu, nu, mu_bar, nu_bar;
  std::vector<double> log_mu, log_nu, log_mu_bar, log_nu_bar;
  long iteration = 0;

  static MatrixGameState uniform(int rows, int cols);
};

// Default step size min{1/(2*||A||_inf + 2*tau), 1/(4*||A||_inf)}; 1/(2*tau) for A = 0.
double default_matrix_step(const PayoffMatrix& A, double tau);

// One full OMWU round: mu/nu move first, then the midpoints, all with the same
// marginal payoffs A*nu_bar and A^T*mu_bar from the incoming state.
MatrixGameState omwu_matrix_step(const PayoffMatrix& A, double tau, double eta,
                                 const MatrixGameState& state);

struct MatrixQreResult {
  std::vector<double> mu, nu;
  long iterations = 0;
  double gap = 0.0;
  bool converged = false;
  MatrixGameState state;  // final iterate
};

// Iterates OMWU until matrix_duality_gap <= tol. eta <= 0 selects the default step.
MatrixQreResult solve_matrix_qre(const PayoffMatrix& A, double tau, double eta, double tol,
                                 long max_iters);

// Optional warm start (interior distributions); used by the outer value-iteration oracle.
MatrixQreResult solve_matrix_qre_from(const PayoffMatrix& A, double tau, double eta, double tol,
                                      long max_iters, const MatrixGameState& start);

enum class Side { kMax, kMin };

// Value of the smoothed best response against a fixed opponent:
//   max side: max_mu [mu^T A nu + tau H(mu)] - tau H(nu) = tau*lse(A nu / tau) - tau H(nu)
//   min side: min_nu [mu^T A nu - tau H(nu)] + tau H(mu)
double smoothed_best_response_value(const PayoffMatrix& A, double tau, Side side,
                                    std::span<const double> opponent);

// Regularized duality gap at (mu, nu); zero exactly at the QRE.
double matrix_duality_gap(const PayoffMatrix& A, double tau, std::span<const double> mu,
                          std::span<const double> nu);

// Regularized game value mu^T A nu + tau H(mu) - tau H(nu).
double matrix_game_value(const PayoffMatrix& A, double tau, std::span<const double> mu,
                         std::span<const double> nu);

}  // namespace zsg
