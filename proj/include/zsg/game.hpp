#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace zsg {

inline constexpr double kSimplexTol = 1e-12;

// Tabular discounted two-player zero-sum Markov game.
// reward[s][a][b] in [0,1]; transition[s][a][b] is a distribution over next states.
struct DiscountedGame {
  int num_states = 0;
  int num_actions_max = 0;  // |A|
  int num_actions_min = 0;  // |B|
  double gamma = 0.0;
  std::vector<double> reward;      // [s*nA*nB + a*nB + b]
  std::vector<double> transition;  // [((s*nA + a)*nB + b)*nS + s']

  double r(int s, int a, int b) const {
    return reward[(s * num_actions_max + a) * num_actions_min + b];
  }
  std::span<const double> next(int s, int a, int b) const {
    return {transition.data() +
                static_cast<size_t>((s * num_actions_max + a) * num_actions_min + b) * num_states,
            static_cast<size_t>(num_states)};
  }
  std::span<const double> payoff_row(int s) const {  // r(s) as a |A|x|B| block
    return {reward.data() + static_cast<size_t>(s) * num_actions_max * num_actions_min,
            static_cast<size_t>(num_actions_max) * num_actions_min};
  }
};

// Finite-horizon, time-inhomogeneous game. Step h in [0, H): reward_h for all h,
// transition_h only for h < H-1 (the last step is terminal).
struct EpisodicGame {
  int horizon = 0;
  int num_states = 0;
  int num_actions_max = 0;
  int num_actions_min = 0;
  std::vector<double> reward;      // [h][s][a][b]
  std::vector<double> transition;  // [h][s][a][b][s'], h in [0, H-1)

  double r(int h, int s, int a, int b) const {
    return reward[((static_cast<size_t>(h) * num_states + s) * num_actions_max + a) *
                      num_actions_min +
                  b];
  }
  std::span<const double> next(int h, int s, int a, int b) const {
    return {transition.data() +
                (((static_cast<size_t>(h) * num_states + s) * num_actions_max + a) *
                     num_actions_min +
                 b) *
                    num_states,
            static_cast<size_t>(num_states)};
  }
  std::span<const double> payoff_row(int h, int s) const {
    return {reward.data() + (static_cast<size_t>(h) * num_states + s) * num_actions_max *
                                num_actions_min,
            static_cast<size_t>(num_actions_max) * num_actions_min};
  }
};

struct ValidationReport {
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
  std::string joined() const;
};

ValidationReport validate_game(const DiscountedGame& g);
ValidationReport validate_game(const EpisodicGame& g);

// Deterministic generator: rewards ~ U[0,1], transition rows ~ Dirichlet(1,...,1)
// via normalized exponentials. Identical arguments yield bit-identical games.
DiscountedGame generate_random_game(uint64_t seed, int num_states, int num_actions_max,
                                    int num_actions_min, double gamma);
EpisodicGame generate_random_episodic_game(uint64_t seed, int horizon, int num_states,
                                           int num_actions_max, int num_actions_min);

// Matrix game with entries U[-1,1] (used by benchmark instances).
std::vector<double> generate_random_payoff(uint64_t seed, int rows, int cols);

}  // namespace zsg
