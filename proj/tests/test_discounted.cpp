#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "zsg/discounted.hpp"
#include "zsg/evaluation.hpp"
#include "zsg/matrix_qre.hpp"
#include "zsg/simplex.hpp"

using namespace zsg;

TEST_CASE("init_discounted matches Algorithm 1's initialization") {
  SUBCASE("equal action counts give V(0) = 0") {
    const DiscountedGame g = generate_random_game(1, 3, 3, 3, 0.9);
    const DiscountedSolverState st = init_discounted(g, 0.7);
    for (double v : st.values.v) CHECK(v == 0.0);
  }
  SUBCASE("|A|=4, |B|=2, tau=0.5 gives V(0) = 0.5 log 2") {
    const DiscountedGame g = generate_random_game(1, 2, 4, 2, 0.9);
    const DiscountedSolverState st = init_discounted(g, 0.5);
    for (double v : st.values.v)
      CHECK(v == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
    CHECK(st.values.v[0] == doctest::Approx(0.346574).epsilon(1e-5));
  }
  SUBCASE("policies uniform, Q zero") {
    const DiscountedGame g = generate_random_game(1, 2, 4, 2, 0.9);
    const DiscountedSolverState st = init_discounted(g, 0.5);
    for (double q : st.values.q) CHECK(q == 0.0);
    for (double p : st.zeta.mu) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
    for (double p : st.zeta_bar.nu) CHECK(p == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(st.iteration == 0);
  }
}

TEST_CASE("policy_update: zero Q keeps everything uniform") {
  const DiscountedGame g = generate_random_game(2, 3, 2, 2, 0.9);
  DiscountedSolverState st = init_discounted(g, 0.5);
  st.iteration = 5;  // exercise the Eq. (9a) branch too
  JointPolicy zn = st.zeta, zbn = st.zeta_bar;
  policy_update(g, st, 0.1, 0.5, zn, zbn);
  for (double p : zn.mu) CHECK(p == doctest::Approx(0.5).epsilon(1e-14));
  for (double p : zbn.mu) CHECK(p == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("policy_update matches the scalar transcription on a 1-state game") {
  DiscountedGame g;
  g.num_states = 1;
  g.num_actions_max = 2;
  g.num_actions_min = 2;
  g.gamma = 0.9;
  g.reward = {1.0, 0.0, 0.0, 0.5};
  g.transition = {1, 1, 1, 1};

  const double tau = 0.4, eta = 0.15;
  DiscountedSolverState st = init_discounted(g, tau);
  st.values.q = {0.8, -0.2, 0.3, 0.1};
  st.iteration = 1;

  const PayoffMatrix Q{2, 2, st.values.q};
  oracle::OmwuPair pair;
  pair.mu = {st.zeta.mu[0], st.zeta.mu[1]};
  pair.nu = {st.zeta.nu[0], st.zeta.nu[1]};
  pair.mu_bar = {st.zeta_bar.mu[0], st.zeta_bar.mu[1]};
  pair.nu_bar = {st.zeta_bar.nu[0], st.zeta_bar.nu[1]};
  const oracle::OmwuPair want = oracle::omwu_round_linear(Q, tau, eta, pair);

  JointPolicy zn = st.zeta, zbn = st.zeta_bar;
  policy_update(g, st, eta, tau, zn, zbn);
  for (int a = 0; a < 2; ++a) {
    CHECK(zn.mu[a] == doctest::Approx(want.mu[a]).epsilon(1e-14));
    CHECK(zn.nu[a] == doctest::Approx(want.nu[a]).epsilon(1e-14));
    CHECK(zbn.mu[a] == doctest::Approx(want.mu_bar[a]).epsilon(1e-14));
    CHECK(zbn.nu[a] == doctest::Approx(want.nu_bar[a]).epsilon(1e-14));
  }
}

TEST_CASE("policy_update honors the t=0 guard of Eq. (9a)") {
  const DiscountedGame g = generate_random_game(3, 2, 2, 2, 0.9);
  DiscountedSolverState st = init_discounted(g, 0.5);
  for (double& q : st.values.q) q = 0.9;  // nonzero payoff signal
  st.values.q[0] = 0.1;
  JointPolicy zn = st.zeta, zbn = st.zeta_bar;
  policy_update(g, st, 0.2, 0.5, zn, zbn);
  for (size_t i = 0; i < zn.mu.size(); ++i) CHECK(zn.mu[i] == st.zeta.mu[i]);
  // but the midpoint does move
  CHECK(zbn.mu[0] != st.zeta_bar.mu[0]);
}

TEST_CASE("policy_update step-size precondition") {
  const DiscountedGame g = generate_random_game(1, 2, 2, 2, 0.9);
  DiscountedSolverState st = init_discounted(g, 2.0);
  JointPolicy zn = st.zeta, zbn = st.zeta_bar;
  CHECK_THROWS_AS(policy_update(g, st, 0.6, 2.0, zn, zbn), std::invalid_argument);
}

TEST_CASE("Lemma 11 one-step bound after a policy update") {
  const DiscountedGame g = generate_random_game(6, 4, 3, 3, 0.9);
  const double tau = 0.1, eta = 0.05, alpha = 0.05;
  DiscountedSolverState st = init_discounted(g, tau);
  for (int t = 0; t < 50; ++t) discounted_step(g, st, eta, tau, alpha);
  for (int s = 0; s < g.num_states; ++s) {
    const double d = l1_distance(st.zeta_bar.mu_row(s), st.zeta.mu_row(s)) +
                     l1_distance(st.zeta_bar.nu_row(s), st.zeta.nu_row(s));
    CHECK(d <= 2.0 * eta / (1.0 - g.gamma) + 1e-12);
  }
}

TEST_CASE("value_update: gamma=0 copies the reward into Q") {
  const DiscountedGame g = generate_random_game(4, 3, 2, 2, 0.0);
  DiscountedSolverState st = init_discounted(g, 0.5);
  for (double& v : st.values.v) v = 3.0;  // must not leak into Q
  ValueTables out;
  out.v.assign(3, 0.0);
  out.q.assign(st.values.q.size(), 0.0);
  value_update(g, st, st.zeta_bar, 0.5, 0.5, out);
  CHECK(out.q == g.reward);
}

TEST_CASE("value_update fixed point: zero reward, equal action counts") {
  DiscountedGame g = generate_random_game(4, 3, 3, 3, 0.9);
  for (double& r : g.reward) r = 0.0;
  const double tau = 0.5;
  DiscountedSolverState st = init_discounted(g, tau);  // V(0) = 0 since |A| = |B|
  ValueTables out;
  out.v.assign(3, 0.0);
  out.q.assign(st.values.q.size(), 0.0);
  value_update(g, st, st.zeta_bar, 0.5, tau, out);
  for (int s = 0; s < 3; ++s) CHECK(out.v[s] == doctest::Approx(st.values.v[s]).epsilon(1e-14));
}

TEST_CASE("value_update fixed point: zero reward, gamma=0, unequal action counts") {
  DiscountedGame g = generate_random_game(4, 3, 4, 2, 0.0);
  for (double& r : g.reward) r = 0.0;
  const double tau = 0.5;
  DiscountedSolverState st = init_discounted(g, tau);  // V(0) = tau log 2
  ValueTables out;
  out.v.assign(3, 0.0);
  out.q.assign(st.values.q.size(), 0.0);
  value_update(g, st, st.zeta_bar, 0.5, tau, out);
  for (int s = 0; s < 3; ++s) CHECK(out.v[s] == doctest::Approx(st.values.v[s]).epsilon(1e-14));
}

TEST_CASE("value_update single-cell hand case") {
  DiscountedGame g;
  g.num_states = 1;
  g.num_actions_max = 1;
  g.num_actions_min = 1;
  g.gamma = 0.9;
  g.reward = {0.6};
  g.transition = {1.0};
  const double tau = 0.3, alpha = 0.5;
  DiscountedSolverState st = init_discounted(g, tau);
  st.values.v = {2.0};
  ValueTables out;
  out.v.assign(1, 0.0);
  out.q.assign(1, 0.0);
  value_update(g, st, st.zeta_bar, alpha, tau, out);
  const double q = 0.6 + 0.9 * 2.0;
  CHECK(out.q[0] == doctest::Approx(q).epsilon(1e-15));
  CHECK(out.v[0] == doctest::Approx(0.5 * 2.0 + 0.5 * q).epsilon(1e-15));
}

TEST_CASE("run_discounted: symmetric zero-reward game converges at iteration 0") {
  DiscountedGame g = generate_random_game(9, 3, 2, 2, 0.9);
  for (double& r : g.reward) r = 0.0;
  SolverConfig cfg;
  cfg.tau = 1.0;
  cfg.eta = 0.1;
  cfg.tol = 1e-12;
  cfg.max_iters = 100;
  const RunResult res = run_discounted(g, cfg);
  CHECK(res.converged);
  CHECK(res.iterations == 0);
  CHECK(res.final_gap <= 1e-12);
}

TEST_CASE("run_discounted on a 1-state game matches the matrix QRE of the effective payoff") {
  const DiscountedGame g = generate_random_game(17, 1, 3, 3, 0.8);
  SolverConfig cfg;
  cfg.tau = 0.2;
  cfg.eta = 0.05;
  cfg.alpha = 0.1;
  cfg.tol = 1e-10;
  cfg.max_iters = 200000;
  cfg.log_every = 50;
  const RunResult res = run_discounted(g, cfg);
  REQUIRE(res.converged);

  // effective payoff: r(s) + gamma * V* * 1
  const ReferenceSolution ref = solve_reference_qre(g, cfg.tau, 1e-12);
  PayoffMatrix A{3, 3, {}};
  A.a.assign(ref.values.q.begin(), ref.values.q.end());
  const MatrixQreResult mr = solve_matrix_qre(A, cfg.tau, 0.0, 1e-12, 1000000);
  REQUIRE(mr.converged);
  // both solvers stop on a gap of ~1e-10; tau-strong convexity turns that
  // into a policy radius of sqrt(2 * gap / tau) ~ 3e-5
  for (int a = 0; a < 3; ++a) {
    CHECK(std::abs(res.state.zeta_bar.mu[a] - mr.mu[a]) < 1e-4);
    CHECK(std::abs(res.state.zeta_bar.nu[a] - mr.nu[a]) < 1e-4);
  }
  for (size_t i = 0; i < res.state.values.q.size(); ++i)
    CHECK(res.state.values.q[i] == doctest::Approx(ref.values.q[i]).epsilon(1e-5));
}

TEST_CASE("run_discounted reaches 1e-5 on the 5-state acceptance game") {
  const DiscountedGame g = generate_random_game(2, 5, 4, 4, 0.9);
  SolverConfig cfg;
  cfg.tau = 0.1;
  cfg.eta = 0.01;
  cfg.alpha = 0.05;
  cfg.tol = 1e-5;
  cfg.max_iters = 50000;
  const RunResult res = run_discounted(g, cfg);
  CHECK(res.converged);
}

TEST_CASE("serial and parallel steps agree") {
  const DiscountedGame g = generate_random_game(23, 8, 3, 3, 0.9);
  DiscountedSolverState a = init_discounted(g, 0.1);
  DiscountedSolverState b = init_discounted(g, 0.1);
  for (int t = 0; t < 100; ++t) {
    serial::discounted_step(g, a, 0.02, 0.1, 0.05);
    discounted_step(g, b, 0.02, 0.1, 0.05);
  }
  CHECK(linf_distance(a.zeta_bar.mu, b.zeta_bar.mu) == 0.0);
  CHECK(linf_distance(a.zeta_bar.nu, b.zeta_bar.nu) == 0.0);
  CHECK(linf_distance(a.values.v, b.values.v) == 0.0);
  CHECK(linf_distance(a.values.q, b.values.q) == 0.0);
}

TEST_CASE("determinism: identical config gives identical traces") {
  const DiscountedGame g = generate_random_game(2, 4, 3, 3, 0.9);
  SolverConfig cfg;
  cfg.tau = 0.1;
  cfg.eta = 0.01;
  cfg.max_iters = 500;
  cfg.tol = 1e-14;
  const RunResult a = run_discounted(g, cfg);
  const RunResult b = run_discounted(g, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i)
    CHECK(a.trace[i].dual_gap == b.trace[i].dual_gap);
  CHECK(a.state.values.v == b.state.values.v);
}
