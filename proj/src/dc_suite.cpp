#include "dcopt/dc_suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>

namespace dcopt {

ExampleVariant parse_variant(const std::string& s) {
  if (s == "reconstructed") return ExampleVariant::Reconstructed;
  if (s == "printed") return ExampleVariant::Printed;
  throw InvalidInput("unknown example variant '" + s + "' (expected reconstructed or printed)");
}

std::string to_string(ExampleVariant v) {
  return v == ExampleVariant::Printed ? "printed" : "reconstructed";
}

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

Mat rows(Index cols, std::initializer_list<std::initializer_list<double>> r) {
  Mat m(static_cast<Index>(r.size()), cols);
  Index i = 0;
  for (const auto& row : r) {
    Index j = 0;
    for (double d : row) m(i, j++) = d;
    ++i;
  }
  return m;
}

// Example 1 building blocks: values and gradients of f_1^j, f_2^j.
struct Ex1Parts {
  double f11, f12, f13, f21, f22, f23;
  Eigen::Vector2d g11, g12, g13, g21, g22, g23;
};

Ex1Parts ex1_parts(const Vec& x) {
  const double a = x[0], b = x[1];
  const double e = 2.0 * std::exp(-a + b);
  Ex1Parts p;
  p.f11 = a * a * a * a + b * b;
  p.f12 = (2 - a) * (2 - a) + (2 - b) * (2 - b);
  p.f13 = e;
  p.f21 = a * a - 2 * a + b * b - 4 * b + 4;
  p.f22 = 2 * a * a - 5 * a + b * b - 2 * b + 4;
  p.f23 = a * a + 2 * b * b - 4 * b + 1;
  p.g11 << 4 * a * a * a, 2 * b;
  p.g12 << -2 * (2 - a), -2 * (2 - b);
  p.g13 << -e, e;
  p.g21 << 2 * a - 2, 2 * b - 4;
  p.g22 << 4 * a - 5, 2 * b - 2;
  p.g23 << 2 * a, 4 * b - 4;
  return p;
}

DcExample example1(ExampleVariant v) {
  const bool printed = v == ExampleVariant::Printed;
  DcExample ex;
  ex.instance.F = function_map(
      2, 4,
      [printed](const Vec& x) {
        const auto p = ex1_parts(x);
        const double last = printed ? p.f11 + p.f22 + p.f23 : p.f21 + p.f22 + p.f23;
        return vec({p.f11, p.f12, p.f13, last});
      },
      [printed](const Vec& x) {
        const auto p = ex1_parts(x);
        Mat J(4, 2);
        J.row(0) = p.g11.transpose();
        J.row(1) = p.g12.transpose();
        J.row(2) = p.g13.transpose();
        J.row(3) = (printed ? p.g11 + p.g22 + p.g23 : p.g21 + p.g22 + p.g23).transpose();
        return J;
      });
  ex.instance.G = function_map(
      2, 3,
      [](const Vec& x) {
        const auto p = ex1_parts(x);
        return vec({p.f21 + p.f22, p.f22 + p.f23, p.f21 + p.f23});
      },
      [](const Vec& x) {
        const auto p = ex1_parts(x);
        Mat J(3, 2);
        J.row(0) = (p.g21 + p.g22).transpose();
        J.row(1) = (p.g22 + p.g23).transpose();
        J.row(2) = (p.g21 + p.g23).transpose();
        return J;
      });
  ex.instance.theta1 = separable_sum({coordmax_atom(3), linear_atom(Vec::Ones(1))});
  ex.instance.theta2 = coordmax_atom(3);
  ex.reference_min = 2.0;
  return ex;
}

DcExample example2() {
  DcExample ex;
  const Mat F = rows(4, {{1, 0, 0, 0},
                         {0, 0, 1, 0},
                         {0, 10.1, 0, 0},
                         {0, 0, 0, 10.1},
                         {0, 4.95, 0, 4.95},
                         {0, 0, 0, 0},
                         {200, -200, 0, 0},
                         {-200, -200, 0, 0},
                         {0, 0, 0, 0},
                         {0, 0, 180, -180},
                         {0, 0, -180, -180}});
  Vec shift = Vec::Zero(11);
  shift.head(5) = vec({-1, -1, -10.1, -10.1, -9.9});
  ex.instance.F = affine_map(F, shift);
  const Mat G = rows(4, {{100, 0, 0, 0}, {0, 0, 90, 0}, {0, 4.95, 0, -4.95}, {0, -100, 0, -90}});
  ex.instance.G = affine_map(G, Vec::Zero(4));
  ex.instance.theta1 = separable_sum({l1_atom(5), coordmax_atom(3), coordmax_atom(3)});
  ex.instance.theta2 = separable_sum({l1_atom(3), linear_atom(Vec::Ones(1))});
  ex.reference_min = 0.0;
  return ex;
}

DcExample example3(ExampleVariant v) {
  DcExample ex;
  Mat F;
  Vec shift = Vec::Zero(5);
  if (v == ExampleVariant::Printed) {
    F = rows(2, {{1, 0}, {0, 0}, {200, -200}, {-200, -200}, {-1, -1}});
    shift[1] = 200;
  } else {
    F = rows(2, {{1, 0}, {0, 0}, {200, -200}, {-200, -200}, {0, 100}});
  }
  shift[0] = -1;
  ex.instance.F = affine_map(F, shift);
  ex.instance.G = affine_map(rows(2, {{100, 0}}), Vec::Zero(1));
  ex.instance.theta1 =
      separable_sum({l1_atom(1), coordmax_atom(3), linear_atom(Vec::Ones(1))});
  ex.instance.theta2 = l1_atom(1);
  ex.reference_min = 0.0;
  return ex;
}

DcExample example4(ExampleVariant v) {
  DcExample ex;
  ex.instance.F = function_map(
      2, 13,
      [](const Vec& x) {
        const double a = x[0], b = x[1], s = a * a + b * b;
        Vec y(13);
        y << a - 1, 0, 200 * (a - b), 200 * (-a - b), 10 * (s + b), 10 * (s - b),
            10 * (a + s + b - 0.5), 10 * (a + s - b - 0.5), 10 * (a - 1), 10 * (-a + 2 * b - 1),
            10 * (a - 2 * b - 1), 10 * (-a - 1), 10 * (a + s);
        return y;
      },
      [](const Vec& x) {
        const double a = x[0], b = x[1];
        Mat J(13, 2);
        J << 1, 0, 0, 0, 200, -200, -200, -200, 10 * 2 * a, 10 * (2 * b + 1), 10 * 2 * a,
            10 * (2 * b - 1), 10 * (1 + 2 * a), 10 * (2 * b + 1), 10 * (1 + 2 * a),
            10 * (2 * b - 1), 10, 0, -10, 20, 10, -20, -10, 0, 10 * (1 + 2 * a), 10 * 2 * b;
        return J;
      });
  ex.instance.G = function_map(
      2, 3,
      [](const Vec& x) {
        const double a = x[0], b = x[1];
        return vec({100 * a, 10 * b, -100 * b + 10 * (a * a + b * b)});
      },
      [](const Vec& x) {
        const double a = x[0], b = x[1];
        return rows(2, {{100, 0}, {0, 10}, {20 * a, -100 + 20 * b}});
      });
  ex.instance.theta1 = separable_sum({l1_atom(1), coordmax_atom(3), coordmax_atom(9)});
  ex.instance.theta2 = v == ExampleVariant::Printed
                           ? separable_sum({l1_atom(2), l1_atom(1)})
                           : separable_sum({l1_atom(2), linear_atom(Vec::Ones(1))});
  ex.reference_min = 0.5;
  return ex;
}

double ex5_quad(const Vec& x) {
  return 9 - 8 * x[0] - 6 * x[1] - 4 * x[2] + 4 * x[0] * x[0] + 2 * x[1] * x[1] +
         2 * x[2] * x[2];
}

Eigen::RowVector3d ex5_quad_grad(const Vec& x) {
  return Eigen::RowVector3d(-8 + 8 * x[0], -6 + 4 * x[1], -4 + 4 * x[2]);
}

DcExample example5(ExampleVariant v) {
  DcExample ex;
  const Mat lin = rows(3, {{2, 0, 0},
                           {0, 2, 0},
                           {0, 0, 2},
                           {0, 0, 0},
                           {10, 10, 20},
                           {-10, 0, 0},
                           {0, -10, 0},
                           {0, 0, -10}});
  Vec lin_shift = Vec::Zero(8);
  lin_shift[4] = -30;
  if (v == ExampleVariant::Printed) {
    ex.instance.F = affine_map(lin, lin_shift);
    ex.instance.theta1 = separable_sum({l1_atom(3), coordmax_atom(5)});
    ex.instance.G = function_map(
        3, 4,
        [](const Vec& x) {
          return vec({x[0] - x[1], x[0] - x[1], 10 * x[1], ex5_quad(x)});
        },
        [](const Vec& x) {
          Mat J = rows(3, {{1, -1, 0}, {1, -1, 0}, {0, 10, 0}, {0, 0, 0}});
          J.row(3) = ex5_quad_grad(x);
          return J;
        });
    ex.instance.theta2 = separable_sum({l1_atom(3), l1_atom(1)});
  } else {
    ex.instance.F = function_map(
        3, 9,
        [lin, lin_shift](const Vec& x) {
          Vec y(9);
          y.head(8) = lin * x + lin_shift;
          y[8] = ex5_quad(x);
          return y;
        },
        [lin](const Vec& x) {
          Mat J(9, 3);
          J.topRows(8) = lin;
          J.row(8) = ex5_quad_grad(x);
          return J;
        });
    ex.instance.theta1 =
        separable_sum({l1_atom(3), coordmax_atom(5), linear_atom(Vec::Ones(1))});
    ex.instance.G = affine_map(rows(3, {{1, -1, 0}, {1, 0, -1}}), Vec::Zero(2));
    ex.instance.theta2 = l1_atom(2);
  }
  ex.reference_min = 3.5;
  return ex;
}

DcExample example6(bool flip_g) {
  DcExample ex;
  const double sign = flip_g ? -1.0 : 1.0;
  ex.instance.F = affine_map(Mat::Identity(2, 2), Vec::Zero(2));
  ex.instance.G = function_map(
      2, 1,
      [sign](const Vec& x) {
        return vec({sign * (-2.5 * x[0] + 1.5 * x.squaredNorm())});
      },
      [sign](const Vec& x) { return rows(2, {{sign * (-2.5 + 3 * x[0]), sign * 3 * x[1]}}); });
  ex.instance.theta1 = l1_atom(2);
  ex.instance.theta2 = linear_atom(Vec::Ones(1));
  // Guard: the printed form is unbounded below.
  ex.instance.lower_bound_hint = -2.0;
  ex.reference_min = -1.125;
  return ex;
}

}  // namespace

DcExample build_example(int id, ExampleVariant variant, bool flip_g) {
  DcExample ex;
  switch (id) {
    case 1: ex = example1(variant); break;
    case 2: ex = example2(); break;
    case 3: ex = example3(variant); break;
    case 4: ex = example4(variant); break;
    case 5: ex = example5(variant); break;
    case 6: ex = example6(flip_g); break;
    default: throw InvalidInput("build_example: id must lie in 1..6");
  }
  ex.id = id;
  ex.variant = variant;
  ex.instance.h = zero_atom(ex.instance.F->in_dim());
  ex.instance.name = "example-" + std::to_string(id);
  ex.instance.validate();
  return ex;
}

double jacobian_norm(const ProblemInstance& p, const Vec& x) {
  const Mat J = to_dense(*p.F->jacobian_at(x));
  if (J.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(J);
  return svd.singularValues()(0);
}

IlpaConfig dc_ilpa_config(const ProblemInstance& p, const Vec& x0) {
  IlpaConfig cfg;
  cfg.rho = 2.0;
  cfg.gamma_max = 1e6;
  cfg.gamma_min = 0.01;
  cfg.gamma0 = 0.01;
  const double a = std::min(1e-4, 10.0 / std::max(1.0, jacobian_norm(p, x0)));
  cfg.alpha = AlphaSchedule{a, 1.0, a, 0};
  cfg.stop = StopRule{1e-7, 0.0, 10, 1000, 9};
  return cfg;
}

// --- penalty wrapper ------------------------------------------------------------

void PenaltyInstance::validate() const {
  if (n < 1) throw InvalidInput("PenaltyInstance: n must be positive");
  if (!(beta > 0)) throw InvalidInput("PenaltyInstance: beta must be positive");
  if (!f.value || !f.grad) throw InvalidInput("PenaltyInstance: f needs a value and a gradient");
  if (constraints.empty()) throw InvalidInput("PenaltyInstance: no constraints");
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& [c, d] = constraints[i];
    if (!c.value || !c.grad || !d.value || !d.grad) {
      throw InvalidInput("PenaltyInstance: constraint " + std::to_string(i) +
                         " needs values and gradients for c and d");
    }
  }
  if (box) {
    if (box->first.size() != n || box->second.size() != n) {
      throw InvalidInput("PenaltyInstance: box dimension mismatch");
    }
    if ((box->first.array() > box->second.array()).any()) {
      throw InvalidInput("PenaltyInstance: empty box");
    }
  }
}

ProblemInstance build_l1_penalty(const PenaltyInstance& pi) {
  pi.validate();
  const Index q = static_cast<Index>(pi.constraints.size());
  const auto cons = pi.constraints;
  const Index n = pi.n;
  ProblemInstance p;
  p.F = function_map(
      n, q,
      [cons](const Vec& x) {
        Vec y(static_cast<Index>(cons.size()));
        for (std::size_t i = 0; i < cons.size(); ++i) {
          y[static_cast<Index>(i)] = cons[i].first.value(x) - cons[i].second.value(x);
        }
        return y;
      },
      [cons, n](const Vec& x) {
        Mat J(static_cast<Index>(cons.size()), n);
        for (std::size_t i = 0; i < cons.size(); ++i) {
          J.row(static_cast<Index>(i)) = (cons[i].first.grad(x) - cons[i].second.grad(x)).transpose();
        }
        return J;
      });
  const SmoothScalar f = pi.f;
  p.G = function_map(
      n, 1, [f](const Vec& x) { return Vec::Constant(1, -f.value(x)); },
      [f, n](const Vec& x) {
        Mat J(1, n);
        J.row(0) = -f.grad(x).transpose();
        return J;
      });
  p.theta1 = hinge_atom(q, pi.beta);
  p.theta2 = linear_atom(Vec::Ones(1));
  p.h = pi.box ? box_atom(pi.box->first, pi.box->second) : zero_atom(n);
  p.name = pi.name;
  p.validate();
  return p;
}

double infeasibility(const PenaltyInstance& pi, const Vec& x) {
  double s = 0;
  for (const auto& [c, d] : pi.constraints) s += std::max(0.0, c.value(x) - d.value(x));
  return s;
}

IlpaConfig penalty_ilpa_config(const ProblemInstance& p, const PenaltyInstance& pi,
                               const Vec& x0) {
  IlpaConfig cfg = dc_ilpa_config(p, x0);
  const double g = std::max(0.01, std::min(jacobian_norm(p, x0), 100.0));
  cfg.gamma_min = g;
  cfg.gamma0 = g;
  cfg.stop.eps1 = 1e-6;
  cfg.step_guard = [pi](const Vec& x) { return infeasibility(pi, x) <= 1e-6; };
  return cfg;
}

PenaltyInstance demo_penalty_instance(double beta) {
  PenaltyInstance pi;
  pi.n = 1;
  pi.name = "demo-penalty";
  pi.f = {[](const Vec& x) { return x[0]; }, [](const Vec&) { return Vec::Ones(1); }};
  SmoothScalar c{[](const Vec& x) { return x[0] * x[0] - 1; },
                 [](const Vec& x) { return Vec::Constant(1, 2 * x[0]); }};
  SmoothScalar d{[](const Vec&) { return 0.0; }, [](const Vec&) { return Vec::Zero(1); }};
  pi.constraints.emplace_back(c, d);
  pi.beta = beta;
  pi.box = std::make_pair(Vec::Constant(1, -10.0), Vec::Constant(1, 10.0));
  return pi;
}

// --- benchmark -------------------------------------------------------------------

NoptTarget example_target(const DcExample& ex) {
  NoptTarget t;
  t.name = std::to_string(ex.id);
  t.problem = ex.instance;
  t.reference_min = ex.reference_min;
  t.start_radius = ex.start_radius;
  return t;
}

NoptTarget penalty_target(const PenaltyInstance& pi) {
  NoptTarget t;
  t.name = pi.name;
  t.problem = build_l1_penalty(pi);
  t.penalty = pi;
  return t;
}

NoptReport nopt_benchmark(const NoptTarget& target, const NoptOptions& opt) {
  if (opt.runs < 1) throw InvalidInput("nopt_benchmark: runs must be positive");
  const ProblemInstance& p = target.problem;
  p.validate();
  const Index n = p.dim();
  const RandomSource base(opt.seed);

  NoptReport rep;
  rep.name = target.name;
  rep.runs.resize(static_cast<std::size_t>(opt.runs));
  parallel_for(opt.runs, opt.threads, [&](int i) {
    NoptRun& run = rep.runs[static_cast<std::size_t>(i)];
    RandomSource rng = base.derive(static_cast<std::uint64_t>(i));
    run.x0.resize(n);
    for (Index j = 0; j < n; ++j) run.x0[j] = rng.uniform(-target.start_radius, target.start_radius);
    if (target.penalty && target.penalty->box) {
      run.x0 = run.x0.cwiseMax(target.penalty->box->first).cwiseMin(target.penalty->box->second);
    }
    IlpaConfig cfg = target.penalty ? penalty_ilpa_config(p, *target.penalty, run.x0)
                                    : dc_ilpa_config(p, run.x0);
    cfg.mode = opt.mode;
    cfg.seed = rng.next_u64();
    if (opt.tweak) opt.tweak(cfg);
    run.j_limit = cfg.max_inner();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const RunResult res = ilpa_run(p, cfg, run.x0);
      for (const auto& t : res.trace) run.max_j = std::max(run.max_j, t.j_k);
      run.x = res.x;
      run.theta = res.final_phi();
      run.iters = res.iters();
      run.status = res.status;
      run.monotonicity_violations = res.monotonicity_violations;
      if (res.status == RunStatus::Aborted) run.error = res.message;
    } catch (const Error& e) {
      run.gamma_cap = dynamic_cast<const GammaCapExceeded*>(&e) != nullptr;
      run.x = run.x0;
      run.theta = std::numeric_limits<double>::quiet_NaN();
      run.status = RunStatus::Aborted;
      run.error = e.what();
    }
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.infeasibility = target.penalty ? infeasibility(*target.penalty, run.x) : 0.0;
  });

  std::vector<double> thetas;
  double infeas = 0, secs = 0;
  for (const auto& r : rep.runs) {
    secs += r.seconds;
    infeas += r.infeasibility;
    rep.monotonicity_violations += r.monotonicity_violations;
    if (!r.error.empty() || !std::isfinite(r.theta)) {
      ++rep.failed_runs;
      continue;
    }
    thetas.push_back(r.theta);
  }
  std::sort(thetas.begin(), thetas.end());
  rep.mean_infeasibility = infeas / opt.runs;
  rep.mean_seconds = secs / opt.runs;
  if (thetas.empty()) {
    rep.min_theta = rep.max_theta = rep.mean_theta = std::numeric_limits<double>::quiet_NaN();
    rep.reference = target.reference_min.value_or(rep.min_theta);
    return rep;
  }
  rep.min_theta = thetas.front();
  rep.max_theta = thetas.back();
  double sum = 0;
  for (double t : thetas) sum += t;
  rep.mean_theta = sum / static_cast<double>(thetas.size());
  rep.reference = target.reference_min.value_or(rep.min_theta);
  for (const auto& r : rep.runs) {
    if (!r.error.empty() || !std::isfinite(r.theta)) continue;
    const bool feasible = !target.penalty || r.infeasibility <= 1e-6;
    if (std::abs(r.theta - rep.reference) < 1e-5 && feasible) ++rep.nopt;
  }
  return rep;
}

void write_bench_csv(std::ostream& os, const std::vector<NoptReport>& reports, bool with_time) {
  os << "example,min,max,mean,Nopt,time\n";
  os << std::setprecision(10);
  for (const auto& r : reports) {
    os << r.name << ',' << r.min_theta << ',' << r.max_theta << ',' << r.mean_theta << ','
       << r.nopt << ',';
    if (with_time) os << r.mean_seconds;
    os << '\n';
  }
}

}  // namespace dcopt
