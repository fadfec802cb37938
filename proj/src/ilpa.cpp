#include "dcopt/ilpa.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace dcopt {

InexactMode parse_inexact_mode(const std::string& s) {
  if (s == "theory") return InexactMode::Theory;
  if (s == "paper") return InexactMode::Paper;
  throw InvalidInput("unknown inexact mode '" + s + "' (expected theory or paper)");
}

std::string to_string(InexactMode m) { return m == InexactMode::Theory ? "theory" : "paper"; }

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::StepTol: return "step-tol";
    case RunStatus::ObjectiveTol: return "objective-tol";
    case RunStatus::IterCap: return "iter-cap";
    case RunStatus::Aborted: return "aborted";
  }
  return "unknown";
}

double update_alpha(int k, double alpha_prev, const AlphaSchedule& s) {
  if (k >= 1 && s.period > 0 && k % s.period == 0) return std::max(alpha_prev / s.decay, s.floor);
  return alpha_prev;
}

double IlpaConfig::certificate_constant() const {
  return mode == InexactMode::Theory ? mu_value() / 2.0 : gamma_min / 2.0;
}

int IlpaConfig::max_inner() const {
  return static_cast<int>(std::ceil(std::log(gamma_max / gamma0_value()) / std::log(rho) - 1e-12));
}

void IlpaConfig::validate() const {
  if (!(rho > 1)) throw InvalidInput("IlpaConfig: rho must exceed 1");
  if (!(gamma_min > 0 && gamma_min < gamma_max)) {
    throw InvalidInput("IlpaConfig: need 0 < gamma_min < gamma_max");
  }
  if (!(mu_value() < gamma_min / 4)) throw InvalidInput("IlpaConfig: need mu < gamma_min / 4");
  const double g0 = gamma0_value();
  if (g0 < gamma_min || g0 > gamma_max) {
    throw InvalidInput("IlpaConfig: gamma0 must lie in [gamma_min, gamma_max]");
  }
  if (!(alpha.alpha0 >= 0) || !(alpha.floor >= 0) || !(alpha.decay >= 1)) {
    throw InvalidInput("IlpaConfig: invalid alpha schedule");
  }
  if (stop.k_max < 1 || stop.window < 1) throw InvalidInput("IlpaConfig: invalid stop rule");
  if (!(kink_tol >= 0 && kink_tol < 1)) throw InvalidInput("IlpaConfig: kink_tol must lie in [0,1)");
  ppa.validate();
}

bool oscillation_stop(const std::vector<double>& phi, const StopRule& rule) {
  if (rule.eps2 <= 0 || phi.empty()) return false;
  const int k = static_cast<int>(phi.size()) - 1;
  if (k < rule.kbar) return false;
  double osc = 0;
  for (int j = 1; j <= rule.window; ++j) {
    osc = std::max(osc, std::abs(phi[k] - phi[std::max(0, k - j)]));
  }
  return osc / std::max(1.0, phi[k]) <= rule.eps2;
}

InnerResult inner_gamma_loop(const ProblemInstance& p, const IlpaConfig& cfg,
                             const Linearization& lin, const Vec& xi, double alpha,
                             double op_norm, Vec& zeta) {
  const Vec u = lin.B->apply_adjoint(xi);
  const double cert = cfg.certificate_constant();
  const double tight = cfg.tight_gap;
  // Strictly positive alpha keeps the dual smooth; alpha = 0 is not used.
  const double a = std::max(alpha, 1e-300);
  // q(x^k) = Phi(x^k): a candidate must not be worse than the base point. The
  // theory-mode threshold implies this; the looser paper-mode one does not.
  const double phi_k = lin.phi();
  const double q_cap = phi_k + 1e-13 * std::max(1.0, std::abs(phi_k));

  InnerResult out;
  double gamma = cfg.gamma0_value();
  for (int j = 0;; ++j, gamma *= cfg.rho) {
    if (gamma > cfg.gamma_max * (1 + 1e-12)) {
      std::ostringstream msg;
      msg << "gamma cap exceeded: gamma=" << gamma << " > " << cfg.gamma_max << " after " << j
          << " escalations (alpha=" << alpha << ", |x|=" << lin.x.norm() << ")";
      throw GammaCapExceeded(msg.str());
    }
    if (op_norm > 0 && alpha * op_norm * op_norm > (cfg.rho - 1) * gamma) out.metric_violation = true;

    const DualSubproblem d =
        DualSubproblem::build(lin.A, lin.Fx, u, lin.x, gamma, a, -lin.theta2_G, p.theta1, p.h);
    const AcceptFn accept = [&](const PpaCandidate& c) {
      if (c.q > q_cap) return false;
      if (tight > 0) return c.gap <= tight * std::max(1.0, std::abs(c.q));
      return c.gap < cert * (c.x - lin.x).squaredNorm();
    };
    PpaResult res;
    try {
      res = ppa_solve(d, cfg.ppa, zeta, accept);
    } catch (const SubsolverFailure& e) {
      std::ostringstream msg;
      msg << e.what() << " [inner step j=" << j << ", gamma=" << gamma << "]";
      throw SubsolverFailure(msg.str(), e.best_gap());
    }
    zeta = res.zeta;
    out.ppa_iters += res.ppa_iters;
    out.newton.iters += res.newton.iters;
    out.newton.cg_iters += res.newton.cg_iters;
    out.newton.backtracks += res.newton.backtracks;
    out.newton.armijo_only += res.newton.armijo_only;

    const Vec dx = res.x - lin.x;
    const Vec ad = lin.A->apply(dx);
    const Vec ellF = lin.Fx + ad;
    const Vec ellG = lin.B == lin.A ? Vec(lin.Gx + ad) : Vec(lin.Gx + lin.B->apply(dx));
    const double qnorm2 = gamma * dx.squaredNorm() + alpha * ad.squaredNorm();
    const double t1 = p.theta1->value(ellF);
    const double model = t1 - p.theta2->value(ellG) + 0.5 * qnorm2;
    const double theta = eval_theta(p, res.x);
    const double slack = 1e-14 * std::max(1.0, std::abs(model));
    if (theta <= model + slack) {
      out.x = res.x;
      out.zeta = zeta;
      out.gamma = gamma;
      out.j = j;
      out.gap = res.gap;
      out.fallback = res.exit == PpaExit::Fallback;
      // Xi(x^k, x^{k+1}, xi^k, Q_k) with the conjugate cache identity substituted.
      const double conj = -xi.dot(lin.Gx) - lin.theta2_G;
      out.xi = t1 + ellG.dot(xi) + p.h->value(res.x) + conj + qnorm2;
      return out;
    }
  }
}

RunResult ilpa_run(const ProblemInstance& p, const IlpaConfig& cfg, const Vec& x0) {
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
  if (!std::isfinite(phi)) throw InvalidInput("ilpa_run: Phi(x0) is not finite");

  std::vector<double> phis{phi};
  TraceRecord r0;
  r0.phi = phi;
  r0.xi = phi;
  r0.wall_ms = elapsed_ms();
  run.trace.push_back(r0);

  const RandomSource base_rng(cfg.seed);
  Vec zeta = Vec::Zero(lin.Fx.size());
  double alpha = cfg.alpha.alpha0;

  for (int k = 0;; ++k) {
    if (k >= cfg.stop.k_max) {
      run.status = RunStatus::IterCap;
      break;
    }
    const Vec xi = select_xi(p, lin.Gx, cfg.kink_tol);
    // Xi(x, x, xi, Q) must collapse to Phi(x).
    {
      const PotentialPoint w = make_potential_point(p, lin, lin.x, xi, 1.0, alpha);
      const double xi0 = xi_potential(p, lin, w);
      if (std::abs(xi0 - phi) > 1e-9 * std::max(1.0, std::abs(phi))) {
        std::ostringstream msg;
        msg << "potential collapse failed at k=" << k << ": Xi=" << xi0 << ", Phi=" << phi;
        throw ContractViolation(msg.str());
      }
    }
    alpha = update_alpha(k, alpha, cfg.alpha);

    double op_norm = 0;
    if (cfg.op_norm_iters > 0 && alpha > 0) {
      RandomSource rng = base_rng.derive(static_cast<std::uint64_t>(k));
      op_norm = estimate_op_norm(*lin.A, cfg.op_norm_iters, rng);
    }
    const InnerResult in = inner_gamma_loop(p, cfg, lin, xi, alpha, op_norm, zeta);
    if (in.metric_violation) {
      if (run.metric_violations == 0) {
        run.warnings.push_back("alpha*||A||^2 exceeds (rho-1)*gamma at k=" + std::to_string(k));
      }
      ++run.metric_violations;
    }
    if (in.fallback) ++run.fallback_exits;
    run.armijo_only_steps += in.newton.armijo_only;

    const double step = (in.x - lin.x).norm();
    lin = linearize_at(p, in.x);
    const double phi_new = lin.phi();
    if (!std::isfinite(phi_new)) throw InvalidEvaluation("ilpa_run: Phi became non-finite");
    if (phi_new > phi + 1e-12 * std::max(1.0, std::abs(phi))) {
      if (run.monotonicity_violations == 0) {
        std::ostringstream msg;
        msg << std::setprecision(17) << "Phi increased at k=" << k + 1 << ": " << phi << " -> "
            << phi_new;
        run.warnings.push_back(msg.str());
      }
      ++run.monotonicity_violations;
    }
    phi = phi_new;
    phis.push_back(phi);

    TraceRecord rec;
    rec.k = k + 1;
    rec.phi = phi;
    rec.xi = in.xi;
    rec.gamma_k = in.gamma;
    rec.j_k = in.j;
    rec.step_norm = step;
    rec.dual_gap = in.gap;
    rec.ppa_iters = in.ppa_iters;
    rec.newton_iters = in.newton.iters;
    rec.cg_iters = in.newton.cg_iters;
    rec.wall_ms = elapsed_ms();
    run.trace.push_back(rec);

    if (p.lower_bound_hint && phi < *p.lower_bound_hint - 1e-6) {
      std::ostringstream msg;
      msg << "Phi=" << phi << " fell below the lower bound hint " << *p.lower_bound_hint
          << " at k=" << k + 1;
      run.status = RunStatus::Aborted;
      run.message = msg.str();
      break;
    }
    if (step / p.step_scale <= cfg.stop.eps1 && (!cfg.step_guard || cfg.step_guard(lin.x))) {
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

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace, int threads) {
  os << "# threads=" << threads << "\n";
  os << "k,phi,xi,gamma_k,j_k,step_norm,dual_gap,ppa_iters,newton_iters,cg_iters,wall_ms\n";
  os << std::setprecision(17);
  for (const auto& r : trace) {
    os << r.k << ',' << r.phi << ',' << r.xi << ',' << r.gamma_k << ',' << r.j_k << ','
       << r.step_norm << ',' << r.dual_gap << ',' << r.ppa_iters << ',' << r.newton_iters << ','
       << r.cg_iters << ',' << std::setprecision(6) << r.wall_ms << std::setprecision(17) << '\n';
  }
}

}  // namespace dcopt
