#include "dcopt/diagnostics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "dcopt/dc_suite.hpp"
#include "dcopt/matcomp.hpp"

namespace dcopt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Worst {
  double value = 0;
  std::string where;
  void see(double err, const std::string& at) {
    if (!(err <= value)) {
      value = err;
      where = at;
    }
  }
};

CheckResult finish(std::string name, const Worst& w, double tol, std::string extra = {}) {
  CheckResult r;
  r.name = std::move(name);
  r.worst = w.value;
  r.tol = tol;
  r.passed = w.value <= tol;
  std::ostringstream os;
  os << "worst " << w.value;
  if (!w.where.empty()) os << " at " << w.where;
  if (!extra.empty()) os << "; " << extra;
  r.detail = os.str();
  return r;
}

Index uniform_int(RandomSource& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
}

AtomPtr random_box(RandomSource& rng, Index n) {
  Vec lo(n), hi(n);
  for (Index i = 0; i < n; ++i) {
    lo[i] = rng.uniform(-2.0, 0.0);
    hi[i] = lo[i] + rng.uniform(0.5, 3.0);
  }
  return box_atom(std::move(lo), std::move(hi));
}

AtomPtr random_theta1(RandomSource& rng, Index m, bool allow_box) {
  std::vector<AtomPtr> blocks;
  Index left = m;
  while (left > 0) {
    const Index len = std::min(left, uniform_int(rng, 1, 5));
    const int kind = static_cast<int>(rng.uniform_index(allow_box ? 5 : 4));
    switch (kind) {
      case 0: blocks.push_back(l1_atom(len, rng.uniform(0.2, 2.0))); break;
      case 1: blocks.push_back(hinge_atom(len, rng.uniform(0.2, 2.0))); break;
      case 2: blocks.push_back(coordmax_atom(len)); break;
      case 3: blocks.push_back(zero_atom(len)); break;
      default: blocks.push_back(random_box(rng, len)); break;
    }
    left -= len;
  }
  return blocks.size() == 1 ? blocks.front() : separable_sum(std::move(blocks));
}

AtomPtr random_h(RandomSource& rng, Index n) {
  switch (rng.uniform_index(3)) {
    case 0: return zero_atom(n);
    case 1: return l1_atom(n, rng.uniform(0.1, 1.0));
    default: return random_box(rng, n);
  }
}

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

// Projects y into the domain of a box atom so envelope comparisons stay finite.
Vec into_domain(const ProxAtom& f, const Vec& y) {
  if (const auto* box = dynamic_cast<const BoxAtom*>(&f)) {
    return y.cwiseMax(box->lower()).cwiseMin(box->upper());
  }
  return y;
}

// Distance of g to the subdifferential of f at p, for the atoms with a simple
// description of it.
double subdiff_distance(const std::string& kind, const Vec& p, const Vec& g, double weight,
                        const Vec& lo, const Vec& hi, Index rows, Index cols) {
  constexpr double kTie = 1e-10;
  double dist = 0;
  if (kind == "l1") {
    for (Index i = 0; i < p.size(); ++i) {
      if (std::abs(p[i]) > kTie) {
        dist = std::max(dist, std::abs(g[i] - weight * (p[i] > 0 ? 1 : -1)));
      } else {
        dist = std::max(dist, std::max(0.0, std::abs(g[i]) - weight));
      }
    }
  } else if (kind == "hinge") {
    for (Index i = 0; i < p.size(); ++i) {
      if (p[i] > kTie) {
        dist = std::max(dist, std::abs(g[i] - weight));
      } else if (p[i] < -kTie) {
        dist = std::max(dist, std::abs(g[i]));
      } else {
        dist = std::max(dist, std::max({0.0, -g[i], g[i] - weight}));
      }
    }
  } else if (kind == "coordmax") {
    // g must lie in the simplex and be supported on the maximizers of p.
    const double pmax = p.maxCoeff();
    dist = std::abs(g.sum() - 1.0);
    for (Index i = 0; i < p.size(); ++i) {
      dist = std::max(dist, -g[i]);
      if (p[i] < pmax - kTie) dist = std::max(dist, std::abs(g[i]));
    }
  } else if (kind == "box") {
    for (Index i = 0; i < p.size(); ++i) {
      dist = std::max({dist, lo[i] - p[i], p[i] - hi[i]});
      const bool at_lo = p[i] <= lo[i] + kTie;
      const bool at_hi = p[i] >= hi[i] - kTie;
      if (!at_lo && !at_hi) dist = std::max(dist, std::abs(g[i]));
      if (at_lo && !at_hi) dist = std::max(dist, g[i]);
      if (at_hi && !at_lo) dist = std::max(dist, -g[i]);
    }
  } else if (kind == "group") {
    const Eigen::Map<const RowMajorMat> P(p.data(), rows, cols);
    const Eigen::Map<const RowMajorMat> G(g.data(), rows, cols);
    for (Index j = 0; j < cols; ++j) {
      const double nrm = P.col(j).norm();
      if (nrm > kTie) {
        dist = std::max(dist, (G.col(j) - weight * P.col(j) / nrm).norm());
      } else {
        dist = std::max(dist, std::max(0.0, G.col(j).norm() - weight));
      }
    }
  }
  return dist;
}

struct AtomCase {
  std::string kind;
  AtomPtr atom;
  double weight = 1;
  Vec lo, hi;
  Index rows = 0, cols = 0;
};

AtomCase make_case(std::string kind, AtomPtr atom, double weight = 1) {
  AtomCase c;
  c.kind = std::move(kind);
  c.atom = std::move(atom);
  c.weight = weight;
  return c;
}

std::vector<AtomCase> atom_cases(RandomSource& rng) {
  std::vector<AtomCase> cases;
  const Index n = 7;
  {
    AtomCase c = make_case("l1", nullptr, 0.7);
    c.atom = l1_atom(n, c.weight);
    cases.push_back(c);
  }
  {
    AtomCase c = make_case("hinge", nullptr, 1.3);
    c.atom = hinge_atom(n, c.weight);
    cases.push_back(c);
  }
  cases.push_back(make_case("coordmax", coordmax_atom(n)));
  {
    AtomCase c = make_case("box", nullptr);
    c.lo = Vec(n);
    c.hi = Vec(n);
    for (Index i = 0; i < n; ++i) {
      c.lo[i] = rng.uniform(-2.0, 0.0);
      c.hi[i] = c.lo[i] + rng.uniform(0.5, 3.0);
    }
    c.atom = box_atom(c.lo, c.hi);
    cases.push_back(c);
  }
  {
    AtomCase c = make_case("group", nullptr, 0.9);
    c.rows = 4;
    c.cols = 3;
    c.atom = std::make_shared<ColumnGroupL21Atom>(c.rows, c.cols, c.weight);
    cases.push_back(c);
  }
  cases.push_back(make_case("zero", zero_atom(n)));
  return cases;
}

// Draws a test point whose entries sometimes sit exactly on a kink.
Vec test_point(RandomSource& rng, Index n, double lambda) {
  Vec v = 2.0 * rng.normal_vector(n);
  if (rng.uniform() < 0.2) v[static_cast<Index>(rng.uniform_index(n))] = lambda;
  if (rng.uniform() < 0.2) v[static_cast<Index>(rng.uniform_index(n))] = 0.0;
  return v;
}

// Brute-force projection onto {x >= 0, sum x = r}: enumerate supports, solve
// the equality-constrained projection on each and keep the nearest feasible.
Vec simplex_by_enumeration(const Vec& v, double r) {
  const Index n = v.size();
  Vec best;
  double best_d = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double s = 0;
    int k = 0;
    for (Index i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        s += v[i];
        ++k;
      }
    const double shift = (s - r) / k;
    Vec x = Vec::Zero(n);
    bool ok = true;
    for (Index i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        x[i] = v[i] - shift;
        if (x[i] < -1e-14) ok = false;
      }
    if (!ok) continue;
    const double d = (x - v).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = x;
    }
  }
  return best;
}

MatcompInstance small_matcomp(RandomSource& rng, Index n1, Index n2, Index r) {
  SyntheticSpec spec;
  spec.n1 = n1;
  spec.n2 = n2;
  spec.rank = 2;
  spec.sr = 0.5;
  const Observation obs = make_synthetic(spec, rng);
  return build_instance(n1, n2, r, obs, ScadConfig{});
}

}  // namespace

DualSubproblem random_dual_subproblem(RandomSource& rng, const RandomDualOptions& opt) {
  const Index n = uniform_int(rng, 2, opt.max_primal);
  const Index m = uniform_int(rng, 1, opt.max_dual);
  Mat A = rng.normal_matrix(m, n);
  if (opt.normalize_A) A /= std::sqrt(static_cast<double>(n));
  Vec c = rng.normal_vector(m);
  Vec u = rng.normal_vector(n);
  Vec xk = rng.normal_vector(n);
  const double gamma = rng.uniform(0.5, 5.0);
  const double alpha = rng.uniform(0.1, 2.0);
  const double C = rng.normal();
  AtomPtr theta1 = random_theta1(rng, m, opt.box_in_theta1);
  AtomPtr h = random_h(rng, n);
  return DualSubproblem::build(std::make_shared<DenseMap>(std::move(A)), std::move(c),
                               std::move(u), std::move(xk), gamma, alpha, C, std::move(theta1),
                               std::move(h));
}

ReferenceSolve reference_dual_solve(const DualSubproblem& d, int max_iters) {
  const double a_norm = spectral_norm(to_dense(*d.A));
  const double L = 1.0 / d.alpha + a_norm * a_norm / d.gamma;
  const double step = 1.0 / L;
  Vec zeta = Vec::Zero(d.dual_dim());
  Vec yk = zeta;
  double t = 1;
  DualEval cur = evaluate_dual(d, zeta);
  ReferenceSolve out;
  for (int it = 1; it <= max_iters; ++it) {
    out.iters = it;
    const DualEval at_y = evaluate_dual(d, yk);
    Vec next = yk - step * at_y.grad;
    DualEval ev = evaluate_dual(d, next);
    if (ev.psi > cur.psi) {
      // Function-value restart: drop the momentum and take a plain step.
      t = 1;
      next = zeta - step * cur.grad;
      ev = evaluate_dual(d, next);
      yk = next;
    } else {
      const double t_next = 0.5 * (1 + std::sqrt(1 + 4 * t * t));
      yk = next + ((t - 1) / t_next) * (next - zeta);
      t = t_next;
    }
    zeta = std::move(next);
    cur = std::move(ev);
    if (cur.gap <= 1e-15 * (1 + std::abs(cur.q))) break;
  }
  out.zeta = cur.zeta;
  out.x = cur.x;
  out.gap = cur.gap;
  return out;
}

CheckResult check_grad_psi(int instances, std::uint64_t seed, double tol) {
  RandomSource root(seed);
  Worst w;
  for (int i = 0; i < instances; ++i) {
    RandomSource rng = root.derive(static_cast<std::uint64_t>(i));
    const DualSubproblem d = random_dual_subproblem(rng);
    const Vec zeta = rng.normal_vector(d.dual_dim());
    const Vec g = eval_grad_psi(d, zeta);
    const Vec fd = finite_diff_gradient<double>([&](const Vec& z) { return eval_psi(d, z); }, zeta,
                                                1e-6);
    const double err = (fd - g).lpNorm<Eigen::Infinity>() /
                       std::max(1.0, g.lpNorm<Eigen::Infinity>());
    w.see(err, "instance " + std::to_string(i));
  }
  return finish("grad_psi_fd", w, tol, std::to_string(instances) + " instances");
}

CheckResult check_subsolver(int instances, std::uint64_t seed, int reference_iters, double x_tol,
                            double gap_tol) {
  RandomSource root(seed);
  RandomDualOptions opt;
  opt.box_in_theta1 = false;
  opt.normalize_A = true;
  Worst wx, wgap;
  int ref_unconverged = 0;
  for (int i = 0; i < instances; ++i) {
    RandomSource rng = root.derive(static_cast<std::uint64_t>(i));
    const DualSubproblem d = random_dual_subproblem(rng, opt);
    const std::string at = "instance " + std::to_string(i);
    PpaConfig cfg;
    cfg.fallback_tol = 1e-13;
    cfg.max_iters = 500;
    // q - q* <= gap and q is gamma-strongly convex, so x is within
    // sqrt(2 gap / gamma) of the minimizer.
    const auto accept = [](const PpaCandidate& c) {
      return c.gap <= 1e-13 * (1 + std::abs(c.q)) || c.grad_norm <= 1e-12;
    };
    PpaResult res;
    try {
      res = ppa_solve(d, cfg, Vec::Zero(d.dual_dim()), accept);
    } catch (const Error& e) {
      wx.see(std::numeric_limits<double>::infinity(), at + " (" + e.what() + ")");
      continue;
    }
    const ReferenceSolve ref = reference_dual_solve(d, reference_iters);
    if (ref.gap > 1e-12 * (1 + std::abs(primal_value(d, ref.x)))) ++ref_unconverged;
    wx.see((res.x - ref.x).lpNorm<Eigen::Infinity>(), at);
    wgap.see(std::abs(res.gap) / (1 + std::abs(res.q)), at);
  }
  CheckResult r = finish("subsolver_vs_reference", wx, x_tol);
  std::ostringstream os;
  os << "; relative gap worst " << wgap.value << " (tol " << gap_tol << ")";
  if (ref_unconverged > 0) os << "; reference unconverged on " << ref_unconverged;
  r.detail += os.str();
  r.passed = r.passed && wgap.value <= gap_tol;
  return r;
}

CheckResult check_weak_duality(int instances, std::uint64_t seed) {
  RandomSource root(seed);
  Worst w;
  for (int i = 0; i < instances; ++i) {
    RandomSource rng = root.derive(static_cast<std::uint64_t>(i));
    const DualSubproblem d = random_dual_subproblem(rng);
    for (int s = 0; s < 5; ++s) {
      const DualEval ev = evaluate_dual(d, 3.0 * rng.normal_vector(d.dual_dim()));
      if (!std::isfinite(ev.q)) continue;  // x(zeta) may leave dom theta1(A . - b)
      w.see(-(ev.q + ev.psi) / (1 + std::abs(ev.q)), "instance " + std::to_string(i));
    }
  }
  return finish("weak_duality", w, 1e-10);
}

PotentialCheck check_potential(std::uint64_t seed) {
  const auto t0 = Clock::now();
  RandomSource rng(seed);
  SyntheticSpec spec;
  spec.n1 = 60;
  spec.n2 = 40;
  spec.rank = 3;
  spec.sr = 0.3;
  const Observation obs = make_synthetic(spec, rng);
  const Index r = default_rank(spec.n1, spec.n2);
  const MatcompInstance inst = build_instance(spec.n1, spec.n2, r, obs, ScadConfig{});
  IlpaConfig cfg = matcomp_ilpa_config(spec.n1, spec.n2);
  cfg.mode = InexactMode::Theory;
  cfg.tight_gap = 1e-12;
  cfg.seed = seed;
  RandomSource init_rng = rng.derive(1);
  const Vec x0 = svd_init(zero_filled(obs), r, init_rng);
  const RunResult run = ilpa_run(inst.problem, cfg, x0);

  const double coef = cfg.gamma_min / 4.0 - cfg.mu_value();
  Worst mono, sand, desc;
  const auto& tr = run.trace;
  for (std::size_t k = 1; k < tr.size(); ++k) {
    const std::string at = "k=" + std::to_string(tr[k].k);
    mono.see(tr[k].phi - tr[k - 1].phi, at);
    sand.see(std::max(tr[k].phi - tr[k].xi, tr[k].xi - tr[k - 1].phi - 1e-8), at);
    if (k + 1 < tr.size()) {
      const double s = tr[k].step_norm;
      desc.see(tr[k + 1].xi - tr[k].xi + coef * s * s - 1e-8, at);
    }
  }
  PotentialCheck out;
  out.iters = run.iters();
  const std::string extra = std::to_string(out.iters) + " iterations, " + to_string(run.status);
  out.monotone = finish("phi_monotone", mono, 0.0, extra);
  out.sandwich = finish("phi_xi_sandwich", sand, 0.0, extra);
  out.descent = finish("xi_sufficient_descent", desc, 0.0, extra);
  out.seconds = seconds_since(t0);
  return out;
}

std::vector<CheckResult> check_atoms(std::uint64_t seed, int pairs) {
  RandomSource rng(seed);
  const auto cases = atom_cases(rng);
  Worst incl, firm, env, env_min, env_grad, jac_sym, jac_psd, jac_fd, subgrad;

  for (const auto& c : cases) {
    const ProxAtom& f = *c.atom;
    const Index n = f.dim();
    for (int t = 0; t < pairs; ++t) {
      const double lambda = rng.uniform(0.1, 2.0);
      const Vec v = test_point(rng, n, lambda);
      const Vec w = test_point(rng, n, lambda);
      const Vec pv = f.prox(v, lambda);
      const Vec pw = f.prox(w, lambda);
      const std::string at = c.kind;

      // <P v - P w, v - w> >= ||P v - P w||^2.
      const Vec dp = pv - pw;
      firm.see((dp.squaredNorm() - dp.dot(v - w)) / (1 + (v - w).squaredNorm()), at);

      if (c.kind != "zero") {
        incl.see(subdiff_distance(c.kind, pv, (v - pv) / lambda, c.weight, c.lo, c.hi, c.rows,
                                  c.cols),
                 at);
      }

      // Envelope: e(v) = f(p) + ||p - v||^2/(2 lambda) <= f(y) + ||y - v||^2/(2 lambda).
      const double e = f.envelope(v, lambda);
      const double fv = f.value(v);
      if (std::isfinite(fv)) env.see(e - fv, at);
      const Vec y = into_domain(f, pv + 0.3 * rng.normal_vector(n));
      env_min.see(e - (f.value(y) + (y - v).squaredNorm() / (2 * lambda)), at);

      if (t < pairs / 10) {
        // grad e = (v - P v) / lambda.
        const Vec fd = finite_diff_gradient<double>(
            [&](const Vec& z) { return f.envelope(z, lambda); }, w, 1e-6);
        env_grad.see((fd - (w - pw) / lambda).lpNorm<Eigen::Infinity>(), at);

        const ProxJacobian J = f.prox_jacobian(w, lambda);
        Mat M(n, n);
        for (Index i = 0; i < n; ++i) M.col(i) = J.apply(Vec::Unit(n, i));
        jac_sym.see((M - M.transpose()).lpNorm<Eigen::Infinity>(), at);
        const Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()));
        const Vec ev = es.eigenvalues();
        jac_psd.see(std::max(-ev.minCoeff(), ev.maxCoeff() - 1.0), at);

        // Generic point: away from kinks the prox is differentiable.
        const Vec s = 2.0 * rng.normal_vector(n);
        const Vec dir = rng.normal_vector(n);
        const Vec dd = finite_diff_directional(
            [&](const Vec& z) { return f.prox(z, lambda); }, s, dir, 1e-7);
        jac_fd.see((dd - f.prox_jacobian(s, lambda).apply(dir)).norm() / (1 + dir.norm()), at);
      }

      // f(z) >= f(x) + <g, z - x> for the selected g at x in dom f.
      const Vec x = into_domain(f, v);
      const Vec z = into_domain(f, w);
      const Vec g = f.subgrad_select(x);
      subgrad.see(f.value(x) + g.dot(z - x) - f.value(z), at);
    }
  }

  // Simplex projection against enumeration.
  Worst simplex;
  for (Index n = 1; n <= 6; ++n) {
    for (int t = 0; t < 50; ++t) {
      const Vec v = 2.0 * rng.normal_vector(n);
      const double r = rng.uniform(0.5, 3.0);
      simplex.see((project_simplex(v, r) - simplex_by_enumeration(v, r)).lpNorm<Eigen::Infinity>(),
                  "n=" + std::to_string(n));
    }
  }

  // Moreau decomposition for l1: P_{lambda|.|}(v) + lambda Proj_{[-1,1]}(v / lambda) = v.
  Worst moreau, shift, blocks;
  const auto l1 = l1_atom(9);
  for (int t = 0; t < 100; ++t) {
    const double lambda = rng.uniform(0.1, 2.0);
    const Vec v = 2.0 * rng.normal_vector(9);
    const Vec proj = (v / lambda).cwiseMax(-1.0).cwiseMin(1.0);
    moreau.see((l1->prox(v, lambda) + lambda * proj - v).lpNorm<Eigen::Infinity>(), "l1");

    // prox of f + <c, .> at v equals prox of f at v - lambda c.
    const Vec c = rng.normal_vector(9);
    const auto shifted = linear_add(l1, c);
    shift.see((shifted->prox(v, lambda) - l1->prox(v - lambda * c, lambda)).lpNorm<Eigen::Infinity>(),
              "linear_add");

    const auto sum = separable_sum({l1_atom(4), hinge_atom(3, 0.5), coordmax_atom(2)});
    Vec expect(9);
    expect << l1_atom(4)->prox(v.head(4), lambda), hinge_atom(3, 0.5)->prox(v.segment(4, 3), lambda),
        coordmax_atom(2)->prox(v.tail(2), lambda);
    blocks.see((sum->prox(v, lambda) - expect).lpNorm<Eigen::Infinity>(), "separable");
  }

  const std::string per = std::to_string(pairs) + " pairs per atom";
  return {
      finish("prox_inclusion", incl, 1e-9, per),
      finish("firm_nonexpansive", firm, 1e-12, per),
      finish("envelope_below_f", env, 1e-12),
      finish("envelope_minimality", env_min, 1e-12),
      finish("envelope_gradient", env_grad, 1e-5),
      finish("jacobian_symmetric", jac_sym, 1e-12),
      finish("jacobian_psd_contraction", jac_psd, 1e-10),
      finish("jacobian_directional_fd", jac_fd, 1e-5),
      finish("subgradient_inequality", subgrad, 1e-10),
      finish("simplex_enumeration", simplex, 1e-12, "n <= 6"),
      finish("moreau_decomposition_l1", moreau, 1e-12),
      finish("linear_add_shift", shift, 1e-12),
      finish("separable_blockwise", blocks, 0.0),
  };
}

CheckResult check_adjoints(std::uint64_t seed) {
  RandomSource rng(seed);
  std::vector<std::pair<std::string, LinearMapPtr>> maps;
  maps.emplace_back("dense", std::make_shared<DenseMap>(rng.normal_matrix(7, 5)));
  const MatcompInstance mc = small_matcomp(rng, 12, 9, 4);
  Vec x = rng.normal_vector(mc.view.dim());
  maps.emplace_back("factor", mc.problem.F->jacobian_at(x));
  // A factor point with a zeroed column exercises the active-column path.
  for (Index i = 0; i < mc.view.n1; ++i) x[i * mc.view.r + 1] = 0;
  maps.emplace_back("factor_sparse_cols", mc.problem.F->jacobian_at(x));
  for (int id = 1; id <= 6; ++id) {
    const DcExample ex = build_example(id);
    const Vec z = rng.normal_vector(ex.instance.dim());
    maps.emplace_back("example" + std::to_string(id) + "_F", ex.instance.F->jacobian_at(z));
    maps.emplace_back("example" + std::to_string(id) + "_G", ex.instance.G->jacobian_at(z));
  }
  Worst w;
  for (const auto& [name, a] : maps) {
    for (int t = 0; t < 100; ++t) {
      const Vec u = rng.normal_vector(a->in_dim());
      const Vec v = rng.normal_vector(a->out_dim());
      const double lhs = a->apply(u).dot(v);
      const double rhs = u.dot(a->apply_adjoint(v));
      w.see(std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)), name);
    }
  }
  return finish("adjoint_identity", w, 1e-10, "100 pairs per map");
}

CheckResult check_jacobians(std::uint64_t seed) {
  RandomSource rng(seed);
  Worst w;
  auto probe = [&](const std::string& name, const SmoothMap& m, const Vec& x) {
    const Vec d = rng.normal_vector(m.in_dim());
    const Vec fd = finite_diff_directional([&](const Vec& z) { return m.eval(z); }, x, d, 1e-6);
    const Vec an = m.jacobian_at(x)->apply(d);
    w.see((fd - an).norm() / std::max(1.0, an.norm()), name);
  };
  for (int t = 0; t < 20; ++t) {
    for (int id = 1; id <= 6; ++id) {
      const DcExample ex = build_example(id);
      const Vec x = rng.uniform(0.1, 1.0) * ex.start_radius * rng.normal_vector(ex.instance.dim()) / 3;
      probe("example" + std::to_string(id) + "_F", *ex.instance.F, x);
      probe("example" + std::to_string(id) + "_G", *ex.instance.G, x);
    }
  }
  const MatcompInstance mc = small_matcomp(rng, 12, 9, 4);
  for (int t = 0; t < 20; ++t) probe("factor", *mc.problem.F, rng.normal_vector(mc.view.dim()));
  return finish("jacobian_fd", w, 1e-5, "20 points per map");
}

CheckResult check_theta2_grad(std::uint64_t seed, bool corrupt) {
  RandomSource rng(seed);
  const ScadConfig cfg;
  const Index m = 25;
  const ScadLoss loss(m, cfg.a, cfg.rho);
  const ScadLoss scalar(1, cfg.a, cfg.rho);
  Worst w;
  for (int t = 0; t < 20; ++t) {
    // Spread |z| across all three SCAD regions (thresholds scale with 1/rho).
    const Vec z = rng.normal_vector(m) * (rng.uniform(0.5, 3.0) / cfg.rho);
    Vec g = loss.subgrad_select(z);
    if (corrupt) g *= 1.01;
    // The loss is separable, so each partial is differenced on its own
    // coordinate; this keeps the round-off of the full sum out of the quotient.
    Vec fd(m);
    for (Index i = 0; i < m; ++i) {
      fd[i] = finite_diff_gradient<double>(
          [&](const Vec& v) { return scalar.value(v); }, Vec::Constant(1, z[i]), 1e-6)[0];
    }
    w.see((fd - g).lpNorm<Eigen::Infinity>() / std::max(1.0, g.lpNorm<Eigen::Infinity>()),
          "point " + std::to_string(t));
  }
  return finish("theta2_grad_fd", w, 1e-6, corrupt ? "corrupted gradient" : "");
}

std::vector<CheckResult> run_diagnostics(const DiagnosticOptions& opt) {
  std::vector<CheckResult> out;
  out.push_back(check_grad_psi(20, opt.seed));
  out.push_back(check_weak_duality(20, opt.seed + 1));
  out.push_back(check_subsolver(opt.subsolver_instances, opt.seed + 2));
  out.push_back(check_adjoints(opt.seed + 3));
  out.push_back(check_jacobians(opt.seed + 4));
  out.push_back(check_theta2_grad(opt.seed + 5, opt.corrupt_theta2_grad));
  for (auto& r : check_atoms(opt.seed + 6, 200)) out.push_back(std::move(r));
  PotentialCheck pc = check_potential(opt.seed + 7);
  out.push_back(std::move(pc.monotone));
  out.push_back(std::move(pc.sandwich));
  out.push_back(std::move(pc.descent));
  return out;
}

}  // namespace dcopt
