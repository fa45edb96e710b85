#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "zsg/game.hpp"

namespace zsg {

// Per-state distribution pair (mu over A, nu over B), stored linear with log mirror.
// The log mirror is the canonical source during multiplicative updates.
struct JointPolicy {
  int num_states = 0, num_actions_max = 0, num_actions_min = 0;
  std::vector<double> mu, log_mu;  // [s][a]
  std::vector<double> nu, log_nu;  // [s][b]

  static JointPolicy uniform(int nS, int nA, int nB);

  std::span<double> mu_row(int s) {
    return {mu.data() + static_cast<size_t>(s) * num_actions_max,
            static_cast<size_t>(num_actions_max)};
  }
  std::span<const double> mu_row(int s) const {
    return {mu.data() + static_cast<size_t>(s) * num_actions_max,
            static_cast<size_t>(num_actions_max)};
  }
  std::span<double> nu_row(int s) {
    return {nu.data() + static_cast<size_t>(s) * num_actions_min,
            static_cast<size_t>(num_actions_min)};
  }
  std::span<const double> nu_row(int s) const {
    return {nu.data() + static_cast<size_t>(s) * num_actions_min,
            static_cast<size_t>(num_actions_min)};
  }
  std::span<double> log_mu_row(int s) {
    return {log_mu.data() + static_cast<size_t>(s) * num_actions_max,
            static_cast<size_t>(num_actions_max)};
  }
  std::span<const double> log_mu_row(int s) const {
    return {log_mu.data() + static_cast<size_t>(s) * num_actions_max,
            static_cast<size_t>(num_actions_max)};
  }
  std::span<double> log_nu_row(int s) {
    return {log_nu.data() + static_cast<size_t>(s) * num_actions_min,
            static_cast<size_t>(num_actions_min)};
  }
  std::span<const double> log_nu_row(int s) const {
    return {log_nu.data() + static_cast<size_t>(s) * num_actions_min,
            static_cast<size_t>(num_actions_min)};
  }

  void refresh_linear();  // mu = exp(log_mu), nu = exp(log_nu)
};

struct ValueTables {
  std::vector<double> v;  // [s]
  std::vector<double> q;  // [s][a][b]
};

enum class StepMode { kTheorem, kEmpirical };

struct SolverConfig {
  double tau = 1.0;
  double eta = 0.0;    // 0 = use default for the setting
  double alpha = 0.0;  // 0 = eta * tau
  long max_iters = 100000;
  double tol = 1e-6;
  int log_every = 100;
  StepMode mode = StepMode::kEmpirical;
  int jobs = 0;                  // 0 = OpenMP default
  bool check_invariants = false; // per-iteration debug assertions
  uint64_t seed = 0;
};

}  // namespace zsg
