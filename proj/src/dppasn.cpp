#include "dcopt/dppasn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dcopt {

DualSubproblem DualSubproblem::build(LinearMapPtr A, Vec c, Vec u, Vec x_k, double gamma,
                                     double alpha, double C, AtomPtr theta1, AtomPtr h) {
  if (!A || !theta1 || !h) throw InvalidInput("DualSubproblem: missing component");
  if (A->out_dim() != c.size() || A->in_dim() != x_k.size() || u.size() != x_k.size() ||
      theta1->dim() != c.size() || h->dim() != x_k.size()) {
    throw InvalidInput("DualSubproblem: dimension mismatch");
  }
  if (!(gamma > 0) || !(alpha > 0)) throw InvalidInput("DualSubproblem: gamma and alpha must be positive");
  DualSubproblem d;
  d.A = std::move(A);
  d.c = std::move(c);
  d.u = std::move(u);
  d.x_k = std::move(x_k);
  d.b = d.A->apply(d.x_k) - d.c;
  d.gamma = gamma;
  d.alpha = alpha;
  d.C = C;
  d.theta1 = std::move(theta1);
  d.h = std::move(h);
  return d;
}

DualEval evaluate_dual(const DualSubproblem& d, const Vec& zeta) {
  if (zeta.size() != d.dual_dim()) throw InvalidInput("evaluate_dual: dimension mismatch");
  DualEval ev;
  ev.zeta = zeta;
  Vec w = d.A->apply_adjoint(zeta);
  w += d.u;
  ev.v2 = d.x_k - w / d.gamma;
  ev.x = d.h->prox(ev.v2, 1.0 / d.gamma);
  ev.v1 = zeta / d.alpha + d.c;
  ev.y = d.theta1->prox(ev.v1, 1.0 / d.alpha);

  const Vec dx = ev.x - d.x_k;
  ev.Ad = d.A->apply(dx);
  const Vec r = ev.Ad + d.c;  // A x - b
  ev.grad = ev.y - r;

  const double t1y = d.theta1->value(ev.y);
  const double hx = d.h->value(ev.x);
  const double yc2 = (ev.y - d.c).squaredNorm();
  const double ud = d.u.dot(dx);
  const double zg = zeta.dot(ev.grad);
  const double dx2 = 0.5 * d.gamma * dx.squaredNorm();
  ev.psi = -t1y - 0.5 * d.alpha * yc2 - hx - dx2 - ud - d.C + zg;
  ev.psi_scale = std::abs(t1y) + 0.5 * d.alpha * yc2 + std::abs(hx) + dx2 + std::abs(ud) +
                 std::abs(d.C) + std::abs(zg) +
                 zeta.lpNorm<1>() * ev.v1.lpNorm<Eigen::Infinity>();

  const double t1r = d.theta1->value(r);
  const double ad2 = ev.Ad.squaredNorm();
  ev.q = t1r + ud + hx + dx2 + 0.5 * d.alpha * ad2 + d.C;
  ev.gap = (t1r - t1y) + 0.5 * d.alpha * (ad2 - yc2) + zg;
  return ev;
}

double eval_psi(const DualSubproblem& d, const Vec& zeta) { return evaluate_dual(d, zeta).psi; }

Vec eval_grad_psi(const DualSubproblem& d, const Vec& zeta) {
  return evaluate_dual(d, zeta).grad;
}

double primal_value(const DualSubproblem& d, const Vec& x) {
  const Vec dx = x - d.x_k;
  const Vec ad = d.A->apply(dx);
  return d.theta1->value(ad + d.c) + d.u.dot(dx) + d.h->value(x) +
         0.5 * d.gamma * dx.squaredNorm() + 0.5 * d.alpha * ad.squaredNorm() + d.C;
}

PrimalPair recover_primal(const DualSubproblem& d, const Vec& zeta) {
  PrimalPair out;
  const Vec w = d.A->apply_adjoint(zeta) + d.u;
  out.x = d.h->prox(d.x_k - w / d.gamma, 1.0 / d.gamma);
  out.y = d.theta1->prox(zeta / d.alpha + d.c, 1.0 / d.alpha);
  return out;
}

void PpaConfig::validate() const {
  if (!(tau0 > 0) || !(tau_min > 0)) throw InvalidInput("PpaConfig: tau must be positive");
  if (!(tau_decay > 0 && tau_decay <= 1)) throw InvalidInput("PpaConfig: tau_decay must lie in (0,1]");
  if (!(tau_plateau >= 0) || plateau_iters < 0) throw InvalidInput("PpaConfig: invalid tau plateau");
  if (!(newton.eta > 0 && newton.eta < 1)) throw InvalidInput("PpaConfig: eta must lie in (0,1)");
  if (!(newton.beta > 0 && newton.beta < 1)) throw InvalidInput("PpaConfig: beta must lie in (0,1)");
  if (!(newton.varsigma > 0 && newton.varsigma <= 1)) {
    throw InvalidInput("PpaConfig: varsigma must lie in (0,1]");
  }
  if (!(newton.c1 > 0 && newton.c1 < newton.c2 && newton.c2 < 0.5)) {
    throw InvalidInput("PpaConfig: need 0 < c1 < c2 < 1/2");
  }
  if (max_iters < 1 || newton.max_iters < 1 || newton.cg_max_iters < 1) {
    throw InvalidInput("PpaConfig: iteration limits must be positive");
  }
}

namespace {

double prox_value(const DualEval& ev, const Vec& center, double tau) {
  return ev.psi + 0.5 * tau * (ev.zeta - center).squaredNorm();
}

Vec prox_grad(const DualEval& ev, const Vec& center, double tau) {
  return ev.grad + tau * (ev.zeta - center);
}

}  // namespace

void newton_step(const DualSubproblem& d, const Vec& center, double tau, const NewtonConfig& cfg,
                 DualEval& ev, NewtonCounters& counters) {
  const Vec g = prox_grad(ev, center, tau);
  const double gnorm = g.norm();
  if (gnorm == 0) return;

  const ProxJacobian U = d.theta1->prox_jacobian(ev.v1, 1.0 / d.alpha);
  const ProxJacobian V = d.h->prox_jacobian(ev.v2, 1.0 / d.gamma);
  const double inv_a = 1.0 / d.alpha;
  const double inv_g = 1.0 / d.gamma;
  Vec tmp_n(d.primal_dim()), tmp_n2(d.primal_dim()), tmp_m(d.dual_dim());
  auto W = [&](const Vec& in, Vec& out) {
    d.A->apply_adjoint_into(in, tmp_n);
    V.apply_into(tmp_n, tmp_n2);
    d.A->apply_into(tmp_n2, out);
    U.apply_into(in, tmp_m);
    out = tau * in + inv_a * tmp_m + inv_g * out;
  };
  const double tol = std::min(cfg.eta, std::pow(gnorm, 1.0 + cfg.varsigma));
  const Vec rhs = -g;
  const auto cg = cg_solve<double>(W, rhs, tol, cfg.cg_max_iters, tau * (1.0 - 1e-9));
  counters.cg_iters += cg.iters;
  const Vec& dir = cg.solution;

  const double slope = g.dot(dir);
  if (!(slope < 0)) {
    throw Stagnation("newton_step: CG direction is not a descent direction");
  }
  const double f0 = prox_value(ev, center, tau);
  // Round-off slack: Psi is a sum of terms that cancel near the minimizer, so
  // differences below a few ulps of the largest term carry no information.
  const double slack = 16 * std::numeric_limits<double>::epsilon() *
                       std::max({1.0, std::abs(f0), ev.psi_scale});

  double s = 1.0;
  bool have_armijo = false;
  DualEval armijo_eval;
  for (int m = 0; m <= cfg.max_backtracks; ++m, s *= cfg.beta) {
    DualEval trial = evaluate_dual(d, ev.zeta + s * dir);
    const double ft = prox_value(trial, center, tau);
    const bool armijo = ft <= f0 + cfg.c1 * s * slope + slack;
    if (armijo) {
      const double dphi = prox_grad(trial, center, tau).dot(dir);
      if (std::abs(dphi) <= cfg.c2 * std::abs(slope)) {
        counters.backtracks += m;
        ++counters.iters;
        ev = std::move(trial);
        return;
      }
      if (!have_armijo) {
        have_armijo = true;
        armijo_eval = std::move(trial);
      }
      // Psi_l is convex along the ray, so its slope only decreases as the
      // step shrinks: once it is below -c2 |slope| no shorter step can pass.
      if (dphi < 0) break;
    }
  }
  if (have_armijo) {
    counters.backtracks += cfg.max_backtracks;
    ++counters.iters;
    ++counters.armijo_only;
    ev = std::move(armijo_eval);
    return;
  }
  throw Stagnation("newton_step: no Armijo point within " + std::to_string(cfg.max_backtracks) +
                   " backtracks (gradient norm " + std::to_string(gnorm) + ")");
}

void newton_solve(const DualSubproblem& d, const Vec& center, double tau, const NewtonConfig& cfg,
                  DualEval& ev, NewtonCounters& counters,
                  const std::function<bool(const DualEval&)>& done) {
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (it > 0 && done && done(ev)) return;
    const double gnorm = prox_grad(ev, center, tau).norm();
    const double exit_tol = std::max(0.1 * tau * (ev.zeta - center).norm(), 1e-12);
    if (gnorm <= exit_tol) return;
    newton_step(d, center, tau, cfg, ev, counters);
  }
}

PpaResult ppa_solve(const DualSubproblem& d, const PpaConfig& cfg, const Vec& zeta_init,
                    const AcceptFn& accept) {
  cfg.validate();
  PpaResult res;
  DualEval ev = evaluate_dual(d, zeta_init);
  const double fallback = cfg.fallback_tol * (1.0 + d.c.norm());
  double tau = cfg.tau0;
  double best_gap = std::numeric_limits<double>::infinity();
  bool stalled_before = false;

  auto certified_at = [&](const DualEval& e) {
    return accept && accept(PpaCandidate{e.zeta, e.x, e.q, e.gap, e.grad.norm()});
  };
  // Any Newton iterate that already passes the outer test ends the solve.
  auto done = [&](const DualEval& e) {
    return certified_at(e) || e.grad.norm() <= fallback;
  };

  for (int l = 0;; ++l) {
    const double gnorm = ev.grad.norm();
    best_gap = std::min(best_gap, ev.gap);
    const bool certified = certified_at(ev);
    if (certified || gnorm <= fallback) {
      res.exit = certified ? PpaExit::Certificate : PpaExit::Fallback;
      res.zeta = std::move(ev.zeta);
      res.x = std::move(ev.x);
      res.q = ev.q;
      res.psi = ev.psi;
      res.gap = ev.gap;
      if (!certified) {
        // A small dual gradient does not pin x down when gamma is small; never
        // return a candidate worse than the base point itself.
        const double q_base = primal_value(d, d.x_k);
        if (res.q > q_base) {
          res.x = d.x_k;
          res.q = q_base;
          res.gap = q_base + res.psi;
          res.kept_base_point = true;
        }
      }
      res.grad_norm = gnorm;
      res.ppa_iters = l;
      return res;
    }
    if (l >= cfg.max_iters) {
      throw SubsolverFailure("ppa_solve: iteration cap reached (gradient norm " +
                                 std::to_string(gnorm) + ")",
                             best_gap);
    }
    const Vec center = ev.zeta;
    try {
      newton_solve(d, center, tau, cfg.newton, ev, res.newton, done);
      stalled_before = false;
    } catch (const Stagnation& e) {
      if (stalled_before) throw SubsolverFailure(std::string("ppa_solve: ") + e.what(), best_gap);
      stalled_before = true;
    }
    const double floor =
        l + 1 < cfg.plateau_iters ? std::max(cfg.tau_min, cfg.tau_plateau) : cfg.tau_min;
    tau = std::max(floor, tau * cfg.tau_decay);
  }
}

}  // namespace dcopt
