#ifndef DCOPT_ILPA_HPP
#define DCOPT_ILPA_HPP

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "dcopt/dppasn.hpp"
#include "dcopt/problem.hpp"

namespace dcopt {

enum class InexactMode { Theory, Paper };
enum class RunStatus { StepTol, ObjectiveTol, IterCap, Aborted };

InexactMode parse_inexact_mode(const std::string& s);
std::string to_string(InexactMode m);
std::string to_string(RunStatus s);

// Stop when ||x^k - x^{k-1}|| / step_scale <= eps1, or (for k >= kbar) the
// oscillation max_{1<=j<=window} |Phi(x^k) - Phi(x^{k-j})| / max(1, Phi(x^k))
// is at most eps2 (indices below 0 are clamped to 0), or k reaches k_max.
// eps2 <= 0 disables the oscillation test.
struct StopRule {
  double eps1 = 5e-6;
  double eps2 = 5e-4;
  int kbar = 10;
  int k_max = 2000;
  int window = 9;
};

struct AlphaSchedule {
  double alpha0 = 0.5;
  double decay = 1.2;
  double floor = 1e-3;
  int period = 3;
};

// alpha_k = max(alpha_{k-1} / decay, floor) when k is a multiple of the period,
// otherwise alpha_{k-1}.
double update_alpha(int k, double alpha_prev, const AlphaSchedule& s = {});

struct IlpaConfig {
  double rho = 2.0;
  double gamma_min = 10.0;
  double gamma_max = 1e6;
  double mu = 0.0;      // <= 0 selects gamma_min / 8
  double gamma0 = 0.0;  // <= 0 selects gamma_min
  AlphaSchedule alpha;
  StopRule stop;
  InexactMode mode = InexactMode::Paper;
  // When positive, the subsolver must reach gap <= tight_gap * max(1, |q|).
  double tight_gap = 0.0;
  PpaConfig ppa;
  // Power iterations per outer step for the alpha ||A||^2 <= (rho - 1) gamma check;
  // 0 skips the check.
  int op_norm_iters = 10;
  std::uint64_t seed = 0;
  // Optional extra requirement for the step test (e.g. feasibility).
  std::function<bool(const Vec&)> step_guard;
  // Round-off band around kinks of theta2 for the subgradient selection; 0 keeps
  // the exact selection.
  double kink_tol = 0.0;

  double mu_value() const { return mu > 0 ? mu : gamma_min / 8.0; }
  double gamma0_value() const { return gamma0 > 0 ? gamma0 : gamma_min; }
  double certificate_constant() const;
  // ceil(log_rho(gamma_max / gamma0)): the largest admissible j_k.
  int max_inner() const;
  void validate() const;
};

struct TraceRecord {
  int k = 0;
  double phi = 0;
  double xi = 0;
  double gamma_k = 0;
  int j_k = 0;
  double step_norm = 0;
  double dual_gap = 0;
  int ppa_iters = 0;
  int newton_iters = 0;
  int cg_iters = 0;
  double wall_ms = 0;
};

struct RunResult {
  Vec x;
  std::vector<TraceRecord> trace;
  RunStatus status = RunStatus::IterCap;
  std::string message;
  std::vector<std::string> warnings;
  int metric_violations = 0;     // alpha ||A||^2 > (rho - 1) gamma observed
  int monotonicity_violations = 0;
  int fallback_exits = 0;
  int armijo_only_steps = 0;

  int iters() const { return trace.empty() ? 0 : trace.back().k; }
  double final_phi() const { return trace.empty() ? 0.0 : trace.back().phi; }
};

struct InnerResult {
  Vec x;
  Vec zeta;
  double gamma = 0;
  int j = 0;
  double gap = 0;
  double xi = 0;  // Xi(x^k, x^{k+1}, xi^k, Q_k)
  int ppa_iters = 0;
  NewtonCounters newton;
  bool fallback = false;
  bool metric_violation = false;
};

// Step 2 of the outer loop: escalate gamma_{k,j} = rho^j gamma0 until the
// descent test passes. `zeta` is the warm start and is updated in place.
InnerResult inner_gamma_loop(const ProblemInstance& p, const IlpaConfig& cfg,
                             const Linearization& lin, const Vec& xi, double alpha,
                             double op_norm, Vec& zeta);

RunResult ilpa_run(const ProblemInstance& p, const IlpaConfig& cfg, const Vec& x0);

// True when the stop rule's oscillation test fires for the last entry of `phi`.
bool oscillation_stop(const std::vector<double>& phi, const StopRule& rule);

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace, int threads);

}  // namespace dcopt

#endif  // DCOPT_ILPA_HPP
