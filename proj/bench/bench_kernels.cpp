// Compares the OpenMP solver kernels against the serial reference on a
// mid-sized discounted game and reports timings plus the worst divergence.
#include <chrono>
#include <cstdio>
#include <string>

#include "zsg/discounted.hpp"
#include "zsg/episodic.hpp"
#include "zsg/game.hpp"
#include "zsg/simplex.hpp"

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_divergence(const zsg::DiscountedSolverState& a, const zsg::DiscountedSolverState& b) {
  double d = 0.0;
  d = std::max(d, zsg::linf_distance(a.zeta_bar.mu, b.zeta_bar.mu));
  d = std::max(d, zsg::linf_distance(a.zeta_bar.nu, b.zeta_bar.nu));
  d = std::max(d, zsg::linf_distance(a.values.v, b.values.v));
  d = std::max(d, zsg::linf_distance(a.values.q, b.values.q));
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  const int nS = argc > 1 ? std::stoi(argv[1]) : 200;
  const int nA = argc > 2 ? std::stoi(argv[2]) : 8;
  const long iters = argc > 3 ? std::stol(argv[3]) : 200;
  const double tau = 0.1, eta = 0.01, alpha = 0.05;

  const zsg::DiscountedGame game = zsg::generate_random_game(7, nS, nA, nA, 0.95);
  std::printf("game: |S|=%d, |A|=|B|=%d, gamma=0.95, %ld iterations\n", nS, nA, iters);

  zsg::DiscountedSolverState serial_state = zsg::init_discounted(game, tau);
  auto t0 = std::chrono::steady_clock::now();
  for (long t = 0; t < iters; ++t)
    zsg::serial::discounted_step(game, serial_state, eta, tau, alpha);
  const double t_serial = seconds_since(t0);

  zsg::DiscountedSolverState parallel_state = zsg::init_discounted(game, tau);
  t0 = std::chrono::steady_clock::now();
  for (long t = 0; t < iters; ++t)
    zsg::discounted_step(game, parallel_state, eta, tau, alpha);
  const double t_parallel = seconds_since(t0);

  std::printf("serial:   %.3f s  (%.1f iters/s)\n", t_serial, iters / t_serial);
  std::printf("parallel: %.3f s  (%.1f iters/s)\n", t_parallel, iters / t_parallel);
  std::printf("speedup:  %.2fx\n", t_serial / t_parallel);
  std::printf("max |serial - parallel| over all tables: %.3e\n",
              max_divergence(serial_state, parallel_state));
  return 0;
}
