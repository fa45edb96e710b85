#include "zsg/policy.hpp"

namespace zsg {

JointPolicy JointPolicy::uniform(int nS, int nA, int nB) {
  JointPolicy p;
  p.num_states = nS;
  p.num_actions_max = nA;
  p.num_actions_min = nB;
  p.mu.assign(static_cast<size_t>(nS) * nA, 1.0 / nA);
  p.nu.assign(static_cast<size_t>(nS) * nB, 1.0 / nB);
  p.log_mu.assign(p.mu.size(), -std::log(static_cast<double>(nA)));
  p.log_nu.assign(p.nu.size(), -std::log(static_cast<double>(nB)));
  return p;
}

void JointPolicy::refresh_linear() {
  for (size_t i = 0; i < mu.size(); ++i) mu[i] = std::exp(log_mu[i]);
  for (size_t i = 0; i < nu.size(); ++i) nu[i] = std::exp(log_nu[i]);
}

}  // namespace zsg
