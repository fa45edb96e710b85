#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zsg/experiment.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-regularized OMWU solver for zero-sum Markov games"};

  zsg::ExperimentSpec spec;
  std::string random_params, reference = "compute";

  auto* game_opt = app.add_option("--game", spec.game_file, "Game JSON file");
  auto* random_opt = app.add_option(
      "--random", random_params,
      "Generate a game: nS,nA,nB,gamma (discounted), nS,nA,nB (episodic), rows,cols (matrix)");
  game_opt->excludes(random_opt);
  random_opt->excludes(game_opt);
  app.add_option("--seed", spec.config.seed, "Generator seed");
  app.add_option("--mode", spec.mode, "discounted | episodic | matrix")
      ->check(CLI::IsMember({"discounted", "episodic", "matrix"}));
  app.add_option("--horizon", spec.horizon, "Episode length H (episodic mode)");
  app.add_option("--tau", spec.config.tau, "Entropy regularization");
  app.add_option("--eta", spec.config.eta, "Policy step size (omit for the theorem default)");
  app.add_option("--alpha", spec.config.alpha, "Value step size (default eta*tau)");
  app.add_option("--iters", spec.config.max_iters, "Iteration cap");
  app.add_option("--tol", spec.config.tol, "Duality-gap stopping tolerance");
  app.add_option("--log-every", spec.config.log_every, "Metric cadence K");
  app.add_option("--reference", reference, "compute | load | skip")
      ->check(CLI::IsMember({"compute", "load", "skip"}));
  app.add_option("--reference-path", spec.reference_path, "Reference JSON (with --reference load)");
  app.add_option("--reference-tol", spec.reference_tol, "Reference oracle tolerance");
  app.add_option("--out", spec.out_dir, "Output directory");
  app.add_option("--jobs", spec.config.jobs, "Solver-phase parallelism cap");
  app.add_flag("--no-timing", spec.no_timing, "Zero wall-time fields (byte-stable artifacts)");
  app.add_flag("--check-invariants", spec.config.check_invariants,
               "Accumulate per-iteration invariant margins");

  CLI11_PARSE(app, argc, argv);

  if (reference == "compute") spec.reference = zsg::ReferenceMode::kCompute;
  if (reference == "load") spec.reference = zsg::ReferenceMode::kLoad;
  if (reference == "skip") spec.reference = zsg::ReferenceMode::kSkip;

  if (!random_params.empty()) {
    const std::vector<std::string> f = split_csv(random_params);
    try {
      if (spec.mode == "matrix") {
        if (f.size() != 2) throw std::runtime_error("--random needs rows,cols in matrix mode");
        spec.num_actions_max = std::stoi(f[0]);
        spec.num_actions_min = std::stoi(f[1]);
      } else if (spec.mode == "episodic") {
        if (f.size() != 3) throw std::runtime_error("--random needs nS,nA,nB in episodic mode");
        spec.num_states = std::stoi(f[0]);
        spec.num_actions_max = std::stoi(f[1]);
        spec.num_actions_min = std::stoi(f[2]);
      } else {
        if (f.size() != 4)
          throw std::runtime_error("--random needs nS,nA,nB,gamma in discounted mode");
        spec.num_states = std::stoi(f[0]);
        spec.num_actions_max = std::stoi(f[1]);
        spec.num_actions_min = std::stoi(f[2]);
        spec.gamma = std::stod(f[3]);
      }
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    }
  } else if (spec.game_file.empty() && spec.mode != "matrix") {
    std::fprintf(stderr, "error: need --game or --random\n");
    return 1;
  }

  return zsg::run_experiment(spec);
}
