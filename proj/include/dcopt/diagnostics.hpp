#ifndef DCOPT_DIAGNOSTICS_HPP
#define DCOPT_DIAGNOSTICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dcopt/dppasn.hpp"
#include "dcopt/ilpa.hpp"

namespace dcopt {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0;  // worst observed error (or violation) over the battery
  double tol = 0;
  std::string detail;
};

struct RandomDualOptions {
  Index max_primal = 30;
  Index max_dual = 20;
  // Box blocks in theta1 make q(x) infinite off the box; A2 excludes them.
  bool box_in_theta1 = true;
  // Scales A by 1/sqrt(n) so that ||A|| stays O(1).
  bool normalize_A = false;
};

// theta1 is a separable sum of blocks drawn from {l1, hinge, coordmax, box,
// zero}; h is drawn from {zero, l1, box}; A, c, u, x_k are Gaussian.
DualSubproblem random_dual_subproblem(RandomSource& rng, const RandomDualOptions& opt = {});

struct ReferenceSolve {
  Vec zeta;
  Vec x;
  double gap = 0;
  int iters = 0;
};

// Accelerated gradient on Psi with function-value restarts, step 1/L for
// L = 1/alpha + ||A||^2 / gamma (A dense). Stops at gap <= 1e-15 (1 + |q|).
ReferenceSolve reference_dual_solve(const DualSubproblem& d, int max_iters);

// A1: analytic grad Psi against central differences (step 1e-6).
CheckResult check_grad_psi(int instances, std::uint64_t seed, double tol = 1e-6);

// A2: dPPASN with a tight gap against the reference solve.
CheckResult check_subsolver(int instances, std::uint64_t seed, int reference_iters = 100000,
                            double x_tol = 1e-6, double gap_tol = 1e-8);

// Weak duality q(x(zeta)) + Psi(zeta) >= -1e-10 (1 + |q|) at random zeta.
CheckResult check_weak_duality(int instances, std::uint64_t seed);

struct PotentialCheck {
  CheckResult monotone;   // Phi(x^k) <= Phi(x^{k-1})
  CheckResult sandwich;   // Phi(x^k) <= Xi(w^k) <= Phi(x^{k-1}) + 1e-8
  CheckResult descent;    // Xi(w^{k+1}) <= Xi(w^k) - (gamma_min/4 - mu)||x^k - x^{k-1}||^2 + 1e-8
  int iters = 0;
  double seconds = 0;
};

// A3: seeded 60 x 40, rank-3 matcomp run in theory mode with gap <= 1e-12.
PotentialCheck check_potential(std::uint64_t seed);

// A8: prox optimality, firm nonexpansiveness, envelope identity, Jacobian
// symmetry / PSD / contraction, simplex projection against enumeration.
std::vector<CheckResult> check_atoms(std::uint64_t seed, int pairs = 1000);

// <A u, v> = <u, A* v> (relative 1e-10) on 100 random pairs for the dense,
// factor and example Jacobians.
CheckResult check_adjoints(std::uint64_t seed);

// F' and G' of the DC examples and of a matcomp instance against directional
// differences at 20 random points (relative 1e-5).
CheckResult check_jacobians(std::uint64_t seed);

// Gradient of the SCAD theta2 against central differences at 20 random
// points (1e-6). `corrupt` perturbs the analytic gradient (negative control).
CheckResult check_theta2_grad(std::uint64_t seed, bool corrupt = false);

struct DiagnosticOptions {
  std::uint64_t seed = 0;
  bool corrupt_theta2_grad = false;
  int subsolver_instances = 20;
};

std::vector<CheckResult> run_diagnostics(const DiagnosticOptions& opt);

}  // namespace dcopt

#endif  // DCOPT_DIAGNOSTICS_HPP
