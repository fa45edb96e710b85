#pragma once

#include <cstdint>
#include <string>

#include "zsg/policy.hpp"

namespace zsg {

enum class ReferenceMode { kCompute, kLoad, kSkip };

// One experiment invocation: a single game source, a solver run, artifacts on
// disk (trace.csv, summary.json, cached reference when computed).
struct ExperimentSpec {
  std::string game_file;  // empty = use the generator fields below

  // generator parameters (used when game_file is empty)
  int num_states = 0, num_actions_max = 0, num_actions_min = 0;
  double gamma = 0.0;
  int horizon = 0;  // > 0 selects the episodic generator

  std::string mode = "discounted";  // discounted | episodic | matrix
  SolverConfig config;

  ReferenceMode reference = ReferenceMode::kCompute;
  std::string reference_path;  // for kLoad
  double reference_tol = 1e-10;

  std::string out_dir = ".";
  bool no_timing = false;  // zero wall-time fields for byte-stable artifacts
};

// Returns the process exit code: 0 tol reached, 2 max_iters hit, 1 input
// error (message on stderr, no artifacts written).
int run_experiment(const ExperimentSpec& spec);

}  // namespace zsg
