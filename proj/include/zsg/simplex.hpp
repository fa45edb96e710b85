#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace zsg {

// log(sum_i exp(x_i)), guarded by max-subtraction.
inline double log_sum_exp(std::span<const double> x) {
  double m = x[0];
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

// Normalizes log-weights in place so that sum_i exp(x_i) == 1.
inline void log_normalize(std::span<double> x) {
  const double z = log_sum_exp(x);
  for (double& v : x) v -= z;
}

inline void softmax_into(std::span<const double> logits, std::span<double> out) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  double s = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    s += out[i];
  }
  for (double& v : out) v /= s;
}

inline std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  softmax_into(logits, p);
  return p;
}

// Shannon entropy, 0*log 0 := 0.
inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

// KL(x || y); requires y(a) > 0 wherever x(a) > 0.
inline double kl_divergence(std::span<const double> x, std::span<const double> y) {
  double d = 0.0;
  for (size_t a = 0; a < x.size(); ++a) {
    if (x[a] > 0.0) {
      if (y[a] <= 0.0)
        throw std::domain_error("kl_divergence: absolute continuity violated");
      d += x[a] * (std::log(x[a]) - std::log(y[a]));
    }
  }
  return d;
}

// KL from explicit log-probabilities (avoids re-taking logs of tiny values).
inline double kl_divergence_logs(std::span<const double> x, std::span<const double> log_x,
                                 std::span<const double> log_y) {
  double d = 0.0;
  for (size_t a = 0; a < x.size(); ++a)
    if (x[a] > 0.0) d += x[a] * (log_x[a] - log_y[a]);
  return d;
}

inline double l1_distance(std::span<const double> x, std::span<const double> y) {
  double d = 0.0;
  for (size_t i = 0; i < x.size(); ++i) d += std::abs(x[i] - y[i]);
  return d;
}

inline double linf_distance(std::span<const double> x, std::span<const double> y) {
  double d = 0.0;
  for (size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

}  // namespace zsg
