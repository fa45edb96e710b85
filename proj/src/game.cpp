#include "zsg/game.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace zsg {
namespace {

// Portable uniform in [0,1): top 53 bits of the engine output.
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double next_exponential(std::mt19937_64& rng) {
  double u;
  do {
    u = next_unit(rng);
  } while (u <= 0.0);
  return -std::log(u);
}

void fill_transition_rows(std::mt19937_64& rng, std::vector<double>& t, size_t rows, int nS) {
  t.resize(rows * nS);
  for (size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (int s = 0; s < nS; ++s) {
      double e = next_exponential(rng);
      t[r * nS + s] = e;
      sum += e;
    }
    for (int s = 0; s < nS; ++s) t[r * nS + s] /= sum;
  }
}

void check_rows(std::vector<std::string>& errors, std::span<const double> row,
                const std::string& where) {
  double sum = 0.0;
  for (double p : row) {
    if (p < 0.0) {
      errors.push_back("transition row " + where + " has negative entry");
      return;
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTol) {
    std::ostringstream os;
    os.precision(17);
    os << "row " << where << " sums to " << sum;
    errors.push_back(os.str());
  }
}

void check_reward(std::vector<std::string>& errors, double r, const std::string& where) {
  if (!(r >= 0.0 && r <= 1.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "reward " << where << "=" << r << " not in [0,1]";
    errors.push_back(os.str());
  }
}

std::string sab(int s, int a, int b) {
  return "(" + std::to_string(s) + "," + std::to_string(a) + "," + std::to_string(b) + ")";
}

}  // namespace

std::string ValidationReport::joined() const {
  std::string out;
  for (const auto& e : errors) {
    if (!out.empty()) out += "; ";
    out += e;
  }
  return out;
}

ValidationReport validate_game(const DiscountedGame& g) {
  ValidationReport rep;
  if (g.num_states < 1 || g.num_actions_max < 1 || g.num_actions_min < 1)
    rep.errors.push_back("dimensions must be positive");
  if (!(g.gamma >= 0.0 && g.gamma < 1.0))
    rep.errors.push_back("gamma " + std::to_string(g.gamma) + " not in [0,1)");
  if (!rep.ok()) return rep;
  for (int s = 0; s < g.num_states; ++s)
    for (int a = 0; a < g.num_actions_max; ++a)
      for (int b = 0; b < g.num_actions_min; ++b) {
        check_reward(rep.errors, g.r(s, a, b), sab(s, a, b));
        check_rows(rep.errors, g.next(s, a, b), sab(s, a, b));
      }
  return rep;
}

ValidationReport validate_game(const EpisodicGame& g) {
  ValidationReport rep;
  if (g.horizon < 1) rep.errors.push_back("horizon must be >= 1");
  if (g.num_states < 1 || g.num_actions_max < 1 || g.num_actions_min < 1)
    rep.errors.push_back("dimensions must be positive");
  if (!rep.ok()) return rep;
  const size_t want_rows = static_cast<size_t>(g.horizon - 1) * g.num_states *
                           g.num_actions_max * g.num_actions_min;
  if (g.transition.size() != want_rows * g.num_states)
    rep.errors.push_back("transition tensor has wrong shape (terminal step must be absent)");
  for (int h = 0; h < g.horizon; ++h)
    for (int s = 0; s < g.num_states; ++s)
      for (int a = 0; a < g.num_actions_max; ++a)
        for (int b = 0; b < g.num_actions_min; ++b) {
          check_reward(rep.errors, g.r(h, s, a, b),
                       "(h=" + std::to_string(h) + ")" + sab(s, a, b));
          if (h < g.horizon - 1 && g.transition.size() == want_rows * g.num_states)
            check_rows(rep.errors, g.next(h, s, a, b),
                       "(h=" + std::to_string(h) + ")" + sab(s, a, b));
        }
  return rep;
}

DiscountedGame generate_random_game(uint64_t seed, int nS, int nA, int nB, double gamma) {
  if (nS < 1 || nA < 1 || nB < 1) throw std::invalid_argument("dimensions must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in [0,1)");
  DiscountedGame g;
  g.num_states = nS;
  g.num_actions_max = nA;
  g.num_actions_min = nB;
  g.gamma = gamma;
  std::mt19937_64 rng(seed);
  const size_t cells = static_cast<size_t>(nS) * nA * nB;
  g.reward.resize(cells);
  for (auto& r : g.reward) r = next_unit(rng);
  fill_transition_rows(rng, g.transition, cells, nS);
  return g;
}

EpisodicGame generate_random_episodic_game(uint64_t seed, int H, int nS, int nA, int nB) {
  if (H < 1 || nS < 1 || nA < 1 || nB < 1)
    throw std::invalid_argument("dimensions must be >= 1");
  EpisodicGame g;
  g.horizon = H;
  g.num_states = nS;
  g.num_actions_max = nA;
  g.num_actions_min = nB;
  std::mt19937_64 rng(seed);
  const size_t cells = static_cast<size_t>(nS) * nA * nB;
  g.reward.resize(static_cast<size_t>(H) * cells);
  for (auto& r : g.reward) r = next_unit(rng);
  fill_transition_rows(rng, g.transition, static_cast<size_t>(H - 1) * cells, nS);
  return g;
}

std::vector<double> generate_random_payoff(uint64_t seed, int rows, int cols) {
  std::mt19937_64 rng(seed);
  std::vector<double> a(static_cast<size_t>(rows) * cols);
  for (auto& v : a) v = 2.0 * next_unit(rng) - 1.0;
  return a;
}

}  // namespace zsg
