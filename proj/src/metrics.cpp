#include "zsg/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "zsg/game_io.hpp"

namespace zsg {

namespace {
void emit_opt(std::ostringstream& os, const std::optional<double>& v) {
  if (v) os << format_double(*v);
}
}  // namespace

std::string trace_to_csv(const std::vector<MetricsRecord>& trace, bool episodic) {
  std::ostringstream os;
  os << (episodic ? "iter,h,kl_zeta,kl_zeta_bar,q_err,dual_gap,elapsed_s\n"
                  : "iter,kl_zeta,kl_zeta_bar,q_err,dual_gap,elapsed_s\n");
  for (const auto& r : trace) {
    os << r.iter << ',';
    if (episodic) os << (r.h ? std::to_string(*r.h) : std::string()) << ',';
    emit_opt(os, r.kl_zeta);
    os << ',';
    emit_opt(os, r.kl_zeta_bar);
    os << ',';
    emit_opt(os, r.q_err);
    os << ',' << format_double(r.dual_gap) << ',' << format_double(r.elapsed_s) << '\n';
  }
  return os.str();
}

RateFit fit_rate(const std::vector<std::pair<long, double>>& series, long window_begin) {
  if (window_begin < 0) {
    // default window: last half of the points
    if (series.size() < 10) throw std::invalid_argument("fit_rate: need at least 10 points");
    window_begin = series[series.size() / 2].first;
  }
  std::vector<std::pair<long, double>> w;
  for (const auto& p : series)
    if (p.first >= window_begin) w.push_back(p);
  if (w.size() < 2) throw std::invalid_argument("fit_rate: window too small");
  for (const auto& p : w)
    if (!(p.second > 0.0)) throw std::domain_error("fit_rate: nonpositive value in window");

  double tm = 0.0, ym = 0.0;
  for (const auto& p : w) {
    tm += static_cast<double>(p.first);
    ym += std::log(p.second);
  }
  tm /= w.size();
  ym /= w.size();
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : w) {
    const double dt = static_cast<double>(p.first) - tm;
    sxx += dt * dt;
    sxy += dt * (std::log(p.second) - ym);
  }
  const double slope = (sxx > 0.0) ? sxy / sxx : 0.0;
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& p : w) {
    const double y = std::log(p.second);
    const double yhat = ym + slope * (static_cast<double>(p.first) - tm);
    ss_res += (y - yhat) * (y - yhat);
    ss_tot += (y - ym) * (y - ym);
  }
  RateFit fit;
  fit.rho_hat = std::exp(slope);
  // A constant series is fit perfectly by a horizontal line.
  fit.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  fit.window_begin = w.front().first;
  fit.window_end = w.back().first;
  return fit;
}

TheoremCheckResult check_thm1_kl_bound(const std::vector<MetricsRecord>& trace,
                                       const TheoremCheckConfig& cfg) {
  TheoremCheckResult res;
  const double S = cfg.num_states;
  const double rate = 1.0 - (1.0 - cfg.gamma) * cfg.eta * cfg.tau / 4.0;
  const double c = 3000.0 / ((1.0 - cfg.gamma) * (1.0 - cfg.gamma) * cfg.tau);
  for (const auto& r : trace) {
    if (!r.kl_zeta || !r.kl_zeta_bar || !r.q_err_sum)
      throw std::invalid_argument("check_thm1_kl_bound: trace lacks reference columns");
    const double lhs = std::max({*r.kl_zeta / S, *r.kl_zeta_bar / (2.0 * S),
                                 3.0 * cfg.eta * *r.q_err_sum / S});
    const double rhs = c * std::pow(rate, static_cast<double>(r.iter));
    res.worst_margin = std::min(res.worst_margin, rhs + cfg.atol - lhs);
    if (lhs > rhs + cfg.atol) res.holds = false;
  }
  return res;
}

TheoremCheckResult check_thm1_gap_bound(const std::vector<MetricsRecord>& trace,
                                        const TheoremCheckConfig& cfg) {
  TheoremCheckResult res;
  const double om = 1.0 - cfg.gamma;
  const double rate = 1.0 - om * cfg.eta * cfg.tau / 4.0;
  const double c = 6000.0 * cfg.num_states / (om * om * om * cfg.tau) *
                   std::max(8.0 / (om * om * cfg.tau), 1.0 / cfg.eta);
  for (const auto& r : trace) {
    const double rhs = c * std::pow(rate, static_cast<double>(r.iter));
    res.worst_margin = std::min(res.worst_margin, rhs + cfg.atol - r.dual_gap);
    if (r.dual_gap > rhs + cfg.atol) res.holds = false;
  }
  return res;
}

long thm2_warmup_start(const TheoremCheckConfig& cfg, int h_one_based) {
  const long t_start = static_cast<long>(std::ceil(std::log(static_cast<double>(cfg.horizon)) /
                                                   (cfg.eta * cfg.tau)));
  return static_cast<long>(cfg.horizon - h_one_based) * t_start;
}

TheoremCheckResult check_thm2_q_bound(const std::vector<MetricsRecord>& trace,
                                      const TheoremCheckConfig& cfg) {
  TheoremCheckResult res;
  for (const auto& r : trace) {
    if (!r.h) throw std::invalid_argument("check_thm2_q_bound: trace lacks h column");
    if (!r.q_err) throw std::invalid_argument("check_thm2_q_bound: trace lacks q_err column");
    const int h1 = *r.h + 1;  // records store 0-based h
    const long Th = thm2_warmup_start(cfg, h1);
    if (r.iter < Th) continue;  // warm-up rows excluded
    const double t = static_cast<double>(r.iter);
    const double rhs = std::pow(1.0 - cfg.eta * cfg.tau, static_cast<double>(r.iter - Th)) *
                       std::pow(t, static_cast<double>(cfg.horizon - h1));
    res.worst_margin = std::min(res.worst_margin, rhs + cfg.atol - *r.q_err);
    if (*r.q_err > rhs + cfg.atol) res.holds = false;
  }
  return res;
}

TheoremCheckResult check_thm2_gap_bound(const std::vector<MetricsRecord>& trace,
                                        const TheoremCheckConfig& cfg) {
  TheoremCheckResult res;
  const double H = cfg.horizon;
  for (const auto& r : trace) {
    if (!r.h || *r.h != 0) continue;  // bound asserted at the first step
    const long Th = thm2_warmup_start(cfg, 1);
    if (r.iter < Th) continue;
    const double t = static_cast<double>(r.iter);
    const double rhs = 4.0 * std::pow(1.0 - cfg.eta * cfg.tau, static_cast<double>(r.iter - Th)) *
                       std::max(8.0 * H * H / cfg.tau, 1.0 / cfg.eta) *
                       (8.0 * H / cfg.tau + 6.0 * cfg.eta * std::pow(t, H));
    res.worst_margin = std::min(res.worst_margin, rhs + cfg.atol - r.dual_gap);
    if (r.dual_gap > rhs + cfg.atol) res.holds = false;
  }
  return res;
}

}  // namespace zsg
