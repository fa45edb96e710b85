#include "zsg/evaluation.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"
#include "zsg/game_io.hpp"
#include "zsg/simplex.hpp"

namespace zsg {
namespace {

// Effective one-step quantities against a fixed opponent distribution.
// side = kMax: responder is the max player, opponent is nu.
struct Marginalized {
  std::vector<double> reward;      // [s][action of responder]
  std::vector<double> transition;  // [s][action][s']
  std::vector<double> opp_entropy; // [s]
  int n_act = 0;
};

Marginalized marginalize(const DiscountedGame& g, const JointPolicy& zeta, Side side) {
  Marginalized m;
  const int nS = g.num_states, nA = g.num_actions_max, nB = g.num_actions_min;
  m.n_act = (side == Side::kMax) ? nA : nB;
  m.reward.assign(static_cast<size_t>(nS) * m.n_act, 0.0);
  m.transition.assign(static_cast<size_t>(nS) * m.n_act * nS, 0.0);
  m.opp_entropy.assign(nS, 0.0);
  for (int s = 0; s < nS; ++s) {
    auto opp = (side == Side::kMax) ? zeta.nu_row(s) : zeta.mu_row(s);
    m.opp_entropy[s] = entropy(opp);
    for (int a = 0; a < nA; ++a)
      for (int b = 0; b < nB; ++b) {
        const int act = (side == Side::kMax) ? a : b;
        const double w = (side == Side::kMax) ? opp[b] : opp[a];
        if (w == 0.0) continue;
        m.reward[s * m.n_act + act] += w * g.r(s, a, b);
        auto nx = g.next(s, a, b);
        double* dst = m.transition.data() + (static_cast<size_t>(s) * m.n_act + act) * nS;
        for (int sp = 0; sp < nS; ++sp) dst[sp] += w * nx[sp];
      }
  }
  return m;
}

void bellman_backup(const Marginalized& m, const DiscountedGame& g, int s,
                    const std::vector<double>& v, std::vector<double>& bracket) {
  const int n = m.n_act, nS = g.num_states;
  for (int a = 0; a < n; ++a) {
    double ev = 0.0;
    const double* row = m.transition.data() + (static_cast<size_t>(s) * n + a) * nS;
    for (int sp = 0; sp < nS; ++sp) ev += row[sp] * v[sp];
    bracket[a] = m.reward[s * n + a] + g.gamma * ev;
  }
}

}  // namespace

ValueTables evaluate_policy_pair(const DiscountedGame& g, double tau, const JointPolicy& zeta) {
  const int nS = g.num_states, nA = g.num_actions_max, nB = g.num_actions_min;
  if (tau > 0.0) {
    for (double p : zeta.mu)
      if (p <= 0.0) throw std::domain_error("evaluate_policy_pair: boundary policy with tau > 0");
    for (double p : zeta.nu)
      if (p <= 0.0) throw std::domain_error("evaluate_policy_pair: boundary policy with tau > 0");
  }
  // V = r_zeta + gamma * P_zeta V  =>  (I - gamma P_zeta) V = r_zeta
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(nS, nS);
  Eigen::VectorXd rhs(nS);
  for (int s = 0; s < nS; ++s) {
    auto mu = zeta.mu_row(s);
    auto nu = zeta.nu_row(s);
    double rs = tau * entropy(mu) - tau * entropy(nu);
    for (int a = 0; a < nA; ++a) {
      if (mu[a] == 0.0) continue;
      for (int b = 0; b < nB; ++b) {
        const double w = mu[a] * nu[b];
        if (w == 0.0) continue;
        rs += w * g.r(s, a, b);
        auto nx = g.next(s, a, b);
        for (int sp = 0; sp < nS; ++sp) M(s, sp) -= g.gamma * w * nx[sp];
      }
    }
    rhs(s) = rs;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  Eigen::VectorXd v = lu.solve(rhs);
  // One round of iterative refinement if the residual is above target.
  Eigen::VectorXd res = rhs - M * v;
  if (res.lpNorm<Eigen::Infinity>() > 1e-12) v += lu.solve(res);

  ValueTables out;
  out.v.assign(v.data(), v.data() + nS);
  out.q.resize(static_cast<size_t>(nS) * nA * nB);
  for (int s = 0; s < nS; ++s)
    for (int a = 0; a < nA; ++a)
      for (int b = 0; b < nB; ++b) {
        auto nx = g.next(s, a, b);
        double ev = 0.0;
        for (int sp = 0; sp < nS; ++sp) ev += nx[sp] * out.v[sp];
        out.q[(static_cast<size_t>(s) * nA + a) * nB + b] = g.r(s, a, b) + g.gamma * ev;
      }
  return out;
}

BestResponse best_response_value(const DiscountedGame& g, double tau, const JointPolicy& zeta,
                                 Side side, double tol) {
  if (tau <= 0.0) return hard_best_response_value(g, zeta, side, tol);
  const int nS = g.num_states;
  Marginalized m = marginalize(g, zeta, side);
  const double sign = (side == Side::kMax) ? 1.0 : -1.0;
  std::vector<double> v(nS, 0.0), vn(nS), bracket(m.n_act);
  const double stop = (g.gamma > 0.0) ? tol * (1.0 - g.gamma) / g.gamma : 0.0;
  for (;;) {
    double diff = 0.0;
    for (int s = 0; s < nS; ++s) {
      bellman_backup(m, g, s, v, bracket);
      for (double& x : bracket) x = sign * x / tau;
      // max: tau*lse(bracket/tau) - tau*H(nu); min: -tau*lse(-bracket/tau) + tau*H(mu)
      vn[s] = sign * tau * log_sum_exp(bracket) - sign * tau * m.opp_entropy[s];
      diff = std::max(diff, std::abs(vn[s] - v[s]));
    }
    v.swap(vn);
    if (g.gamma == 0.0 || diff <= stop) break;
  }
  BestResponse br;
  br.v = v;
  br.responder.resize(static_cast<size_t>(nS) * m.n_act);
  for (int s = 0; s < nS; ++s) {
    bellman_backup(m, g, s, v, bracket);
    for (double& x : bracket) x = sign * x / tau;
    softmax_into(bracket, {br.responder.data() + static_cast<size_t>(s) * m.n_act,
                           static_cast<size_t>(m.n_act)});
  }
  return br;
}

BestResponse hard_best_response_value(const DiscountedGame& g, const JointPolicy& zeta,
                                      Side side, double tol) {
  const int nS = g.num_states;
  Marginalized m = marginalize(g, zeta, side);
  const double sign = (side == Side::kMax) ? 1.0 : -1.0;
  std::vector<double> v(nS, 0.0), vn(nS), bracket(m.n_act);
  const double stop = (g.gamma > 0.0) ? tol * (1.0 - g.gamma) / g.gamma : 0.0;
  for (;;) {
    double diff = 0.0;
    for (int s = 0; s < nS; ++s) {
      bellman_backup(m, g, s, v, bracket);
      double best = sign * bracket[0];
      for (int a = 1; a < m.n_act; ++a) best = std::max(best, sign * bracket[a]);
      vn[s] = sign * best;
      diff = std::max(diff, std::abs(vn[s] - v[s]));
    }
    v.swap(vn);
    if (g.gamma == 0.0 || diff <= stop) break;
  }
  BestResponse br;
  br.v = v;
  br.responder.assign(static_cast<size_t>(nS) * m.n_act, 0.0);
  for (int s = 0; s < nS; ++s) {
    bellman_backup(m, g, s, v, bracket);
    int best = 0;
    for (int a = 1; a < m.n_act; ++a)
      if (sign * bracket[a] > sign * bracket[best]) best = a;  // lowest index wins ties
    br.responder[static_cast<size_t>(s) * m.n_act + best] = 1.0;
  }
  return br;
}

double duality_gap(const DiscountedGame& g, double tau, const JointPolicy& zeta, double tol,
                   std::span<const double> rho) {
  BestResponse hi = best_response_value(g, tau, zeta, Side::kMax, tol);
  BestResponse lo = best_response_value(g, tau, zeta, Side::kMin, tol);
  if (rho.empty()) {
    double gap = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < g.num_states; ++s) gap = std::max(gap, hi.v[s] - lo.v[s]);
    return gap;
  }
  double gap = 0.0;
  for (int s = 0; s < g.num_states; ++s) gap += rho[s] * (hi.v[s] - lo.v[s]);
  return gap;
}

double unregularized_gap(const DiscountedGame& g, const JointPolicy& zeta, double tol) {
  BestResponse hi = hard_best_response_value(g, zeta, Side::kMax, tol);
  BestResponse lo = hard_best_response_value(g, zeta, Side::kMin, tol);
  double gap = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < g.num_states; ++s) gap = std::max(gap, hi.v[s] - lo.v[s]);
  return gap;
}

ReferenceSolution solve_reference_qre(const DiscountedGame& g, double tau, double tol, int jobs) {
  if (tau <= 0.0) throw std::invalid_argument("solve_reference_qre: tau must be > 0");
  const int nS = g.num_states, nA = g.num_actions_max, nB = g.num_actions_min;
  std::vector<double> v(nS, 0.0);
  std::vector<MatrixGameState> warm(nS, MatrixGameState::uniform(nA, nB));
  JointPolicy zeta = JointPolicy::uniform(nS, nA, nB);
  const double inner_tol = tol / 10.0;
  const double stop = (g.gamma > 0.0) ? tol * (1.0 - g.gamma) / (2.0 * g.gamma) : 0.0;
  std::vector<double> vn(nS);
  for (;;) {
    bool inner_fail = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (jobs != 1)
#endif
    for (int s = 0; s < nS; ++s) {
      PayoffMatrix A;
      A.rows = nA;
      A.cols = nB;
      A.a.resize(static_cast<size_t>(nA) * nB);
      for (int a = 0; a < nA; ++a)
        for (int b = 0; b < nB; ++b) {
          auto nx = g.next(s, a, b);
          double ev = 0.0;
          for (int sp = 0; sp < nS; ++sp) ev += nx[sp] * v[sp];
          A.a[static_cast<size_t>(a) * nB + b] = g.r(s, a, b) + g.gamma * ev;
        }
      MatrixQreResult res = solve_matrix_qre_from(A, tau, 0.0, inner_tol, 20'000'000, warm[s]);
      if (!res.converged) {
        inner_fail = true;
        continue;
      }
      warm[s] = res.state;
      std::copy(res.mu.begin(), res.mu.end(), zeta.mu_row(s).begin());
      std::copy(res.nu.begin(), res.nu.end(), zeta.nu_row(s).begin());
      std::copy(res.state.log_mu.begin(), res.state.log_mu.end(), zeta.log_mu_row(s).begin());
      std::copy(res.state.log_nu.begin(), res.state.log_nu.end(), zeta.log_nu_row(s).begin());
      vn[s] = matrix_game_value(A, tau, res.mu, res.nu);
    }
    if (inner_fail)
      throw std::runtime_error("solve_reference_qre: inner matrix solver did not converge");
    double diff = 0.0;
    for (int s = 0; s < nS; ++s) diff = std::max(diff, std::abs(vn[s] - v[s]));
    v = vn;
    if (g.gamma == 0.0 || diff <= stop) break;
  }

  ReferenceSolution ref;
  ref.zeta_star = zeta;
  ref.values.v = v;
  ref.values.q.resize(static_cast<size_t>(nS) * nA * nB);
  double residual = 0.0;
  for (int s = 0; s < nS; ++s) {
    PayoffMatrix A;
    A.rows = nA;
    A.cols = nB;
    A.a.resize(static_cast<size_t>(nA) * nB);
    for (int a = 0; a < nA; ++a)
      for (int b = 0; b < nB; ++b) {
        auto nx = g.next(s, a, b);
        double ev = 0.0;
        for (int sp = 0; sp < nS; ++sp) ev += nx[sp] * v[sp];
        const double q = g.r(s, a, b) + g.gamma * ev;
        A.a[static_cast<size_t>(a) * nB + b] = q;
        ref.values.q[(static_cast<size_t>(s) * nA + a) * nB + b] = q;
      }
    residual =
        std::max(residual, std::abs(v[s] - matrix_game_value(A, tau, zeta.mu_row(s), zeta.nu_row(s))));
  }
  ref.residual = residual;
  return ref;
}

EpisodicReferenceSolution solve_reference_qre(const EpisodicGame& g, double tau, double tol) {
  const int H = g.horizon, nS = g.num_states, nA = g.num_actions_max, nB = g.num_actions_min;
  EpisodicReferenceSolution ref;
  ref.values.resize(H);
  ref.zeta_star.assign(H, JointPolicy::uniform(nS, nA, nB));
  std::vector<double> v_next(nS, 0.0);
  double residual = 0.0;
  for (int h = H - 1; h >= 0; --h) {
    ValueTables& vt = ref.values[h];
    vt.v.assign(nS, 0.0);
    vt.q.resize(static_cast<size_t>(nS) * nA * nB);
    for (int s = 0; s < nS; ++s) {
      PayoffMatrix A;
      A.rows = nA;
      A.cols = nB;
      A.a.resize(static_cast<size_t>(nA) * nB);
      for (int a = 0; a < nA; ++a)
        for (int b = 0; b < nB; ++b) {
          double q = g.r(h, s, a, b);
          if (h < H - 1) {
            auto nx = g.next(h, s, a, b);
            for (int sp = 0; sp < nS; ++sp) q += nx[sp] * v_next[sp];
          }
          A.a[static_cast<size_t>(a) * nB + b] = q;
          vt.q[(static_cast<size_t>(s) * nA + a) * nB + b] = q;
        }
      MatrixQreResult res = solve_matrix_qre(A, tau, 0.0, tol / 10.0, 20'000'000);
      if (!res.converged)
        throw std::runtime_error("episodic reference: inner matrix solver did not converge");
      JointPolicy& z = ref.zeta_star[h];
      std::copy(res.mu.begin(), res.mu.end(), z.mu_row(s).begin());
      std::copy(res.nu.begin(), res.nu.end(), z.nu_row(s).begin());
      std::copy(res.state.log_mu.begin(), res.state.log_mu.end(), z.log_mu_row(s).begin());
      std::copy(res.state.log_nu.begin(), res.state.log_nu.end(), z.log_nu_row(s).begin());
      vt.v[s] = matrix_game_value(A, tau, res.mu, res.nu);
      residual = std::max(residual, res.gap);
    }
    v_next = vt.v;
  }
  ref.residual = residual;
  return ref;
}

std::vector<std::vector<double>> episodic_best_response_values(
    const EpisodicGame& g, double tau, const std::vector<JointPolicy>& zeta, Side side) {
  const int H = g.horizon, nS = g.num_states, nA = g.num_actions_max, nB = g.num_actions_min;
  const int n_act = (side == Side::kMax) ? nA : nB;
  const double sign = (side == Side::kMax) ? 1.0 : -1.0;
  std::vector<std::vector<double>> v(H + 1, std::vector<double>(nS, 0.0));
  std::vector<double> bracket(n_act);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < nS; ++s) {
      auto opp = (side == Side::kMax) ? zeta[h].nu_row(s) : zeta[h].mu_row(s);
      for (int act = 0; act < n_act; ++act) {
        double total = 0.0;
        for (int o = 0; o < static_cast<int>(opp.size()); ++o) {
          const int a = (side == Side::kMax) ? act : o;
          const int b = (side == Side::kMax) ? o : act;
          if (opp[o] == 0.0) continue;
          double q = g.r(h, s, a, b);
          if (h < H - 1) {
            auto nx = g.next(h, s, a, b);
            for (int sp = 0; sp < nS; ++sp) q += nx[sp] * v[h + 1][sp];
          }
          total += opp[o] * q;
        }
        bracket[act] = sign * total / tau;
      }
      v[h][s] = sign * tau * log_sum_exp(bracket) - sign * tau * entropy(opp);
    }
  }
  v.pop_back();
  return v;
}

std::vector<double> episodic_duality_gap(const EpisodicGame& g, double tau,
                                         const std::vector<JointPolicy>& zeta) {
  auto hi = episodic_best_response_values(g, tau, zeta, Side::kMax);
  auto lo = episodic_best_response_values(g, tau, zeta, Side::kMin);
  std::vector<double> gap(g.horizon, -std::numeric_limits<double>::infinity());
  for (int h = 0; h < g.horizon; ++h)
    for (int s = 0; s < g.num_states; ++s) gap[h] = std::max(gap[h], hi[h][s] - lo[h][s]);
  return gap;
}

KlMetrics kl_metrics(const JointPolicy& zeta, const JointPolicy& zeta_bar,
                     const std::vector<double>& q, const ReferenceSolution& ref) {
  KlMetrics m;
  const int nS = zeta.num_states, nA = zeta.num_actions_max, nB = zeta.num_actions_min;
  for (int s = 0; s < nS; ++s) {
    auto ms = ref.zeta_star.mu_row(s);
    auto ns = ref.zeta_star.nu_row(s);
    auto lms = ref.zeta_star.log_mu_row(s);
    auto lns = ref.zeta_star.log_nu_row(s);
    m.kl_zeta_sum += kl_divergence_logs(ms, lms, zeta.log_mu_row(s)) +
                     kl_divergence_logs(ns, lns, zeta.log_nu_row(s));
    m.kl_zeta_bar_sum += kl_divergence_logs(ms, lms, zeta_bar.log_mu_row(s)) +
                         kl_divergence_logs(ns, lns, zeta_bar.log_nu_row(s));
    double qe = 0.0;
    for (int i = 0; i < nA * nB; ++i) {
      const size_t idx = static_cast<size_t>(s) * nA * nB + i;
      qe = std::max(qe, std::abs(q[idx] - ref.values.q[idx]));
    }
    m.q_err_sum += qe;
    m.q_err_max = std::max(m.q_err_max, qe);
  }
  return m;
}

namespace {
void emit_array(std::ostringstream& os, const std::vector<double>& v) {
  os << '[';
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << format_double(v[i]);
  }
  os << ']';
}
std::vector<double> read_flat(const nlohmann::json& j, const char* field, size_t n) {
  if (!j.contains(field) || !j.at(field).is_array() || j.at(field).size() != n)
    throw std::runtime_error(std::string("reference file: bad field '") + field + "'");
  std::vector<double> out;
  out.reserve(n);
  for (const auto& x : j.at(field)) out.push_back(x.get<double>());
  return out;
}
}  // namespace

std::string serialize_reference(const ReferenceSolution& ref) {
  std::ostringstream os;
  os << "{\"kind\":\"reference\",\"residual\":" << format_double(ref.residual) << ",\"v\":";
  emit_array(os, ref.values.v);
  os << ",\"q\":";
  emit_array(os, ref.values.q);
  os << ",\"mu\":";
  emit_array(os, ref.zeta_star.mu);
  os << ",\"nu\":";
  emit_array(os, ref.zeta_star.nu);
  // log policies are stored too so a cache hit reproduces KL metrics exactly
  os << ",\"log_mu\":";
  emit_array(os, ref.zeta_star.log_mu);
  os << ",\"log_nu\":";
  emit_array(os, ref.zeta_star.log_nu);
  os << "}";
  return os.str();
}

ReferenceSolution parse_reference(const std::string& text, int nS, int nA, int nB) {
  nlohmann::json j = nlohmann::json::parse(text);
  ReferenceSolution ref;
  ref.residual = j.at("residual").get<double>();
  ref.values.v = read_flat(j, "v", nS);
  ref.values.q = read_flat(j, "q", static_cast<size_t>(nS) * nA * nB);
  ref.zeta_star = JointPolicy::uniform(nS, nA, nB);
  ref.zeta_star.mu = read_flat(j, "mu", static_cast<size_t>(nS) * nA);
  ref.zeta_star.nu = read_flat(j, "nu", static_cast<size_t>(nS) * nB);
  ref.zeta_star.log_mu = read_flat(j, "log_mu", static_cast<size_t>(nS) * nA);
  ref.zeta_star.log_nu = read_flat(j, "log_nu", static_cast<size_t>(nS) * nB);
  return ref;
}

std::string reference_cache_name(uint64_t game_hash, double tau, double tol) {
  std::ostringstream os;
  os << "reference_" << std::hex << game_hash << std::dec << "_" << format_double(tau) << "_"
     << format_double(tol) << ".json";
  return os.str();
}

}  // namespace zsg
