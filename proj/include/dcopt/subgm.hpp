#ifndef DCOPT_SUBGM_HPP
#define DCOPT_SUBGM_HPP

#include "dcopt/ilpa.hpp"
#include "dcopt/problem.hpp"

namespace dcopt {

struct SubgmConfig {
  double step_fraction = 0.05;
  StopRule stop{5e-6, 5e-4, 500, 2000, 9};

  void validate() const;
};

// Subgradient of Phi at x assembled from the deterministic selections:
// F'(x)* s1 - G'(x)* grad theta2(G(x)) + s_h.
Vec phi_subgradient(const ProblemInstance& p, const Linearization& lin);

// Polyak-type iteration x^{k+1} = x^k - (step_fraction Phi(x^k) / ||g||^2) g.
// The trace uses the iLPA schema with xi = phi.
RunResult subgm_run(const ProblemInstance& p, const SubgmConfig& cfg, const Vec& x0);

}  // namespace dcopt

#endif  // DCOPT_SUBGM_HPP
