#pragma once

#include <vector>

#include "zsg/evaluation.hpp"
#include "zsg/game.hpp"
#include "zsg/metrics.hpp"
#include "zsg/policy.hpp"

namespace zsg {

// Iterate of the episodic solver; index h runs over [0, H). All cells advance
// simultaneously: Q_h^(t+1) reads V_{h+1}^(t), never iteration-(t+1) data.
struct EpisodicSolverState {
  std::vector<JointPolicy> zeta;      // per h
  std::vector<JointPolicy> zeta_bar;  // per h
  std::vector<ValueTables> values;    // per h
  long iteration = 0;
};

double default_theorem_eta_episodic(const EpisodicGame& game);

EpisodicSolverState init_episodic(const EpisodicGame& game, double tau);

// One loop body over the full (h, s) grid; V_{H} == 0 terminal, no discount.
void episodic_step(const EpisodicGame& game, EpisodicSolverState& state, double eta, double tau,
                   double alpha, int jobs = 0);

namespace serial {
void episodic_step(const EpisodicGame& game, EpisodicSolverState& state, double eta, double tau,
                   double alpha);
}

struct EpisodicRunResult {
  EpisodicSolverState state;
  std::vector<MetricsRecord> trace;  // H rows per logged iteration
  bool converged = false;
  long iterations = 0;
  double final_gap = 0.0;  // gap at h = 0
  double runtime_s = 0.0;
  double eta = 0.0, alpha = 0.0;
};

EpisodicRunResult run_episodic(const EpisodicGame& game, const SolverConfig& config,
                               const EpisodicReferenceSolution* reference = nullptr);

}  // namespace zsg
