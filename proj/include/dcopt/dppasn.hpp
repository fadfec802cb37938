#ifndef DCOPT_DPPASN_HPP
#define DCOPT_DPPASN_HPP

#include <functional>
#include <limits>

#include "dcopt/atoms.hpp"
#include "dcopt/numerics.hpp"
#include "dcopt/problem.hpp"

namespace dcopt {

// Data of the strongly convex subproblem
//
//   q(x) = theta1(A x - b) + <u, x - x_k> + h(x) + gamma/2 ||x - x_k||^2
//          + alpha/2 ||A (x - x_k)||^2 + C,       b = A x_k - c,
//
// and of its dual Psi(zeta) = ||zeta||^2/(2 alpha) - e_{1/alpha} theta1(zeta/alpha + c)
//   + ||A* zeta + u||^2/(2 gamma) - e_{1/gamma} h(x_k - (A* zeta + u)/gamma) - C,
// so that q(x) + Psi(zeta) >= 0 with equality at the saddle point.
// The outer loop uses C = -theta2(G(x_k)).
struct DualSubproblem {
  LinearMapPtr A;
  Vec c;
  Vec b;
  Vec u;
  Vec x_k;
  double gamma = 1;
  double alpha = 1;
  double C = 0;
  AtomPtr theta1;
  AtomPtr h;

  static DualSubproblem build(LinearMapPtr A, Vec c, Vec u, Vec x_k, double gamma, double alpha,
                              double C, AtomPtr theta1, AtomPtr h);
  Index dual_dim() const { return c.size(); }
  Index primal_dim() const { return x_k.size(); }
};

// Everything computed from one dual point. Costs one application of A* and
// one of A.
struct DualEval {
  Vec zeta;
  Vec v1;    // zeta/alpha + c, argument of the theta1 prox
  Vec v2;    // x_k - (A* zeta + u)/gamma, argument of the h prox
  Vec y;     // P_{1/alpha} theta1(v1)
  Vec x;     // P_{1/gamma} h(v2)
  Vec Ad;    // A (x - x_k)
  Vec grad;  // y - (A x - b)
  double psi = 0;
  // Sum of |terms| of psi plus ||zeta||_1 ||v1||_inf (the error in y is
  // amplified by 1/alpha); bounds the round-off in psi.
  double psi_scale = 0;
  double q = 0;    // primal value at x
  double gap = 0;  // q + psi, evaluated without cancellation
};

DualEval evaluate_dual(const DualSubproblem& d, const Vec& zeta);
double eval_psi(const DualSubproblem& d, const Vec& zeta);
Vec eval_grad_psi(const DualSubproblem& d, const Vec& zeta);
double primal_value(const DualSubproblem& d, const Vec& x);

struct PrimalPair {
  Vec x;
  Vec y;
};
PrimalPair recover_primal(const DualSubproblem& d, const Vec& zeta);

struct NewtonConfig {
  double eta = 1e-2;
  double beta = 0.5;
  double varsigma = 0.5;
  double c1 = 1e-4;
  double c2 = 0.25;
  int max_iters = 50;
  int max_backtracks = 60;
  int cg_max_iters = 500;
};

struct PpaConfig {
  double tau0 = 1.0;
  double tau_min = 1e-6;
  double tau_decay = 0.1;
  // For the first plateau_iters iterations tau stays at or above tau_plateau.
  double tau_plateau = 0.0;
  int plateau_iters = 0;
  int max_iters = 200;
  // Exit when ||grad Psi|| <= fallback_tol * (1 + ||c||).
  double fallback_tol = 1e-9;
  NewtonConfig newton;

  void validate() const;
};

struct NewtonCounters {
  int iters = 0;
  int cg_iters = 0;
  int backtracks = 0;
  // Steps where no trial met both line-search conditions and the first
  // Armijo point was taken instead.
  int armijo_only = 0;
};

// One semismooth Newton step on Psi_l(zeta) = Psi(zeta) + tau/2 ||zeta - center||^2
// starting from `ev`, which is replaced by the evaluation at the new point.
// Throws Stagnation when no Armijo point exists within max_backtracks.
void newton_step(const DualSubproblem& d, const Vec& center, double tau, const NewtonConfig& cfg,
                 DualEval& ev, NewtonCounters& counters);

// Newton iterations on Psi_l until ||grad Psi_l|| <= max(0.1 tau ||zeta - center||, 1e-12),
// or earlier once `done` holds at the current iterate.
void newton_solve(const DualSubproblem& d, const Vec& center, double tau, const NewtonConfig& cfg,
                  DualEval& ev, NewtonCounters& counters,
                  const std::function<bool(const DualEval&)>& done = {});

struct PpaCandidate {
  const Vec& zeta;
  const Vec& x;
  double q;
  double gap;
  double grad_norm;
};

using AcceptFn = std::function<bool(const PpaCandidate&)>;

enum class PpaExit { Certificate, Fallback };

struct PpaResult {
  Vec zeta;
  Vec x;
  double q = 0;
  double psi = 0;
  double gap = 0;
  double grad_norm = 0;
  PpaExit exit = PpaExit::Certificate;
  bool kept_base_point = false;  // fallback candidate was worse than x_k
  int ppa_iters = 0;
  NewtonCounters newton;
};

PpaResult ppa_solve(const DualSubproblem& d, const PpaConfig& cfg, const Vec& zeta_init,
                    const AcceptFn& accept);

}  // namespace dcopt

#endif  // DCOPT_DPPASN_HPP
