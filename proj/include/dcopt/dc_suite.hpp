#ifndef DCOPT_DC_SUITE_HPP
#define DCOPT_DC_SUITE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dcopt/ilpa.hpp"
#include "dcopt/problem.hpp"

namespace dcopt {

// Printed: the formulas exactly as stated in the example list.
// Reconstructed: the corrected forms whose optimal values match the reference
// table (examples 1, 3, 4 and 5 differ; 2 and 6 are identical).
enum class ExampleVariant { Reconstructed, Printed };

ExampleVariant parse_variant(const std::string& s);
std::string to_string(ExampleVariant v);

struct DcExample {
  int id = 0;
  ExampleVariant variant = ExampleVariant::Reconstructed;
  ProblemInstance instance;
  std::optional<double> reference_min;
  double start_radius = 10.0;  // starts are uniform in [-r, r]^n
};

// flip_g negates G in example 6 (ignored elsewhere).
DcExample build_example(int id, ExampleVariant variant = ExampleVariant::Reconstructed,
                        bool flip_g = false);

// Spectral norm of F'(x) formed densely; meant for small problems.
double jacobian_norm(const ProblemInstance& p, const Vec& x);

// rho = 2, gamma_max = 1e6, gamma_min = gamma_0 = 0.01, constant
// alpha = min(1e-4, 10 / max(1, ||F'(x0)||)), stop at step <= 1e-7 or k >= 1000.
IlpaConfig dc_ilpa_config(const ProblemInstance& p, const Vec& x0);

// ---------------------------------------------------------------------------
// l1 exact penalty for  min f(x)  s.t.  c_i(x) - d_i(x) <= 0,  x in box
// ---------------------------------------------------------------------------

struct SmoothScalar {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
};

struct PenaltyInstance {
  Index n = 0;
  SmoothScalar f;
  std::vector<std::pair<SmoothScalar, SmoothScalar>> constraints;  // (c_i, d_i)
  double beta = 1.0;
  std::optional<std::pair<Vec, Vec>> box;
  std::string name = "penalty";

  void validate() const;
};

// theta1 = beta * sum max(y_i, 0) on F = (c_i - d_i), theta2(t) = t on G = -f,
// h = indicator of the box (or zero).
ProblemInstance build_l1_penalty(const PenaltyInstance& pi);

// sum max(0, c_i(x) - d_i(x)).
double infeasibility(const PenaltyInstance& pi, const Vec& x);

// Same as dc_ilpa_config except gamma_min = gamma_0 = min(||F'(x0)||, 100)
// (floored at 0.01), step <= 1e-6 and the step test also requires
// infeasibility <= 1e-6.
IlpaConfig penalty_ilpa_config(const ProblemInstance& p, const PenaltyInstance& pi,
                               const Vec& x0);

// x^2 - 1 <= 0 with f(x) = x on the box [-10, 10]: minimum -1 at x = -1.
PenaltyInstance demo_penalty_instance(double beta = 10.0);

// ---------------------------------------------------------------------------
// Multi-start benchmark
// ---------------------------------------------------------------------------

struct NoptTarget {
  std::string name;
  ProblemInstance problem;
  std::optional<double> reference_min;  // absent: the best value found is used
  double start_radius = 10.0;
  std::optional<PenaltyInstance> penalty;
};

NoptTarget example_target(const DcExample& ex);
NoptTarget penalty_target(const PenaltyInstance& pi);

struct NoptOptions {
  int runs = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  InexactMode mode = InexactMode::Paper;
  // Optional hook applied to each run's configuration.
  std::function<void(IlpaConfig&)> tweak;
};

struct NoptRun {
  Vec x0;
  Vec x;
  double theta = 0;
  double infeasibility = 0;
  double seconds = 0;
  int iters = 0;
  RunStatus status = RunStatus::IterCap;
  int monotonicity_violations = 0;
  int max_j = 0;          // largest inner escalation count j_k
  int j_limit = 0;        // ceil(log_rho(gamma_max / gamma_0))
  bool gamma_cap = false;  // the inner loop exceeded gamma_max
  std::string error;      // non-empty when the run failed
};

struct NoptReport {
  std::string name;
  double min_theta = 0;
  double max_theta = 0;
  double mean_theta = 0;
  int nopt = 0;
  double reference = 0;
  double mean_infeasibility = 0;
  double mean_seconds = 0;
  int failed_runs = 0;
  int monotonicity_violations = 0;
  std::vector<NoptRun> runs;
};

// Runs iLPA from i.i.d. uniform starts (stream i of `seed` for run i) and
// counts |Theta - reference| < 1e-5 (plus infeasibility <= 1e-6 for penalty
// targets). Starts are projected onto the box of a penalty target.
NoptReport nopt_benchmark(const NoptTarget& target, const NoptOptions& opt);

// example,min,max,mean,Nopt,time; time (mean seconds per run) is left empty
// unless with_time, so that the file is reproducible byte for byte.
void write_bench_csv(std::ostream& os, const std::vector<NoptReport>& reports,
                     bool with_time = true);

}  // namespace dcopt

#endif  // DCOPT_DC_SUITE_HPP
