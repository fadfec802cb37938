#include "dcopt/subgm.hpp"

#include <chrono>
#include <cmath>

namespace dcopt {

void SubgmConfig::validate() const {
  if (!(step_fraction > 0)) throw InvalidInput("SubgmConfig: step_fraction must be positive");
  if (stop.k_max < 1 || stop.window < 1) throw InvalidInput("SubgmConfig: invalid stop rule");
}

Vec phi_subgradient(const ProblemInstance& p, const Linearization& lin) {
  const Vec s1 = p.theta1->subgrad_select(lin.Fx);
  const Vec s2 = p.theta2->subgrad_select(lin.Gx);
  Vec g = p.h->subgrad_select(lin.x);
  if (lin.B == lin.A) {
    g += lin.A->apply_adjoint(s1 - s2);
  } else {
    g += lin.A->apply_adjoint(s1);
    g -= lin.B->apply_adjoint(s2);
  }
  return g;
}

RunResult subgm_run(const ProblemInstance& p, const SubgmConfig& cfg, const Vec& x0) {
  p.validate();
  cfg.validate();
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  RunResult run;
  Linearization lin = linearize_at(p, x0);
  double phi = lin.phi();
  if (!std::isfinite(phi)) throw InvalidInput("subgm_run: Phi(x0) is not finite");
  std::vector<double> phis{phi};
  TraceRecord r0;
  r0.phi = phi;
  r0.xi = phi;
  r0.wall_ms = elapsed_ms();
  run.trace.push_back(r0);

  for (int k = 0;; ++k) {
    if (k >= cfg.stop.k_max) {
      run.status = RunStatus::IterCap;
      break;
    }
    const Vec g = phi_subgradient(p, lin);
    const double g2 = g.squaredNorm();
    if (g2 == 0) {
      run.status = RunStatus::StepTol;
      run.message = "zero subgradient selection";
      break;
    }
    const double t = cfg.step_fraction * phi / g2;
    const Vec x_new = lin.x - t * g;
    const double step = (x_new - lin.x).norm();
    const double expected = cfg.step_fraction * std::abs(phi) / std::sqrt(g2);
    if (std::abs(step - expected) > 1e-9 * std::max(1.0, expected)) {
      throw ContractViolation("subgm_run: step length does not match the Polyak rule");
    }
    lin = linearize_at(p, x_new);
    phi = lin.phi();
    if (!std::isfinite(phi)) throw InvalidEvaluation("subgm_run: Phi became non-finite");
    phis.push_back(phi);

    TraceRecord rec;
    rec.k = k + 1;
    rec.phi = phi;
    rec.xi = phi;
    rec.step_norm = step;
    rec.wall_ms = elapsed_ms();
    run.trace.push_back(rec);

    if (step / p.step_scale <= cfg.stop.eps1) {
      run.status = RunStatus::StepTol;
      break;
    }
    if (oscillation_stop(phis, cfg.stop)) {
      run.status = RunStatus::ObjectiveTol;
      break;
    }
  }
  run.x = lin.x;
  return run;
}

}  // namespace dcopt
