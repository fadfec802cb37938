#include "dcopt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dcopt {

FunctionSmoothMap::FunctionSmoothMap(Index in_dim, Index out_dim, EvalFn eval, JacFn jac)
    : in_(in_dim), out_(out_dim), eval_(std::move(eval)), jac_(std::move(jac)) {
  if (in_ < 1 || out_ < 1) throw InvalidInput("FunctionSmoothMap: dimensions must be positive");
  if (!eval_ || !jac_) throw InvalidInput("FunctionSmoothMap: missing callback");
}

Vec FunctionSmoothMap::eval(const Vec& x) const {
  Vec y = eval_(x);
  if (y.size() != out_) throw InvalidInput("FunctionSmoothMap: output dimension mismatch");
  return y;
}

LinearMapPtr FunctionSmoothMap::jacobian_at(const Vec& x) const {
  Mat j = jac_(x);
  if (j.rows() != out_ || j.cols() != in_) {
    throw InvalidInput("FunctionSmoothMap: Jacobian has the wrong shape");
  }
  return std::make_shared<DenseMap>(std::move(j));
}

AffineSmoothMap::AffineSmoothMap(Mat m, Vec shift)
    : map_(std::make_shared<DenseMap>(std::move(m))), shift_(std::move(shift)) {
  if (map_->out_dim() != shift_.size()) throw InvalidInput("AffineSmoothMap: shift mismatch");
}

Vec AffineSmoothMap::eval(const Vec& x) const { return map_->matrix() * x + shift_; }

void ProblemInstance::validate() const {
  if (!theta1 || !theta2 || !F || !G || !h) throw InvalidInput("ProblemInstance: missing component");
  if (F->in_dim() != G->in_dim() || F->in_dim() != h->dim()) {
    throw InvalidInput("ProblemInstance: F, G and h disagree on the domain dimension");
  }
  if (theta1->dim() != F->out_dim()) throw InvalidInput("ProblemInstance: theta1 does not match F");
  if (theta2->dim() != G->out_dim()) throw InvalidInput("ProblemInstance: theta2 does not match G");
  if (!(step_scale > 0)) throw InvalidInput("ProblemInstance: step_scale must be positive");
}

namespace {

Vec checked_eval(const SmoothMap& m, const Vec& x, const char* which) {
  Vec y = m.eval(x);
  if (!y.allFinite()) {
    throw InvalidEvaluation(std::string("non-finite value of ") + which);
  }
  return y;
}

}  // namespace

Linearization linearize_at(const ProblemInstance& p, const Vec& x) {
  if (x.size() != p.dim()) throw InvalidInput("linearize_at: dimension mismatch");
  Linearization lin;
  lin.x = x;
  lin.Fx = checked_eval(*p.F, x, "F");
  lin.A = p.F->jacobian_at(x);
  if (p.G == p.F) {
    lin.Gx = lin.Fx;
    lin.B = lin.A;
  } else {
    lin.Gx = checked_eval(*p.G, x, "G");
    lin.B = p.G->jacobian_at(x);
  }
  lin.theta1_F = p.theta1->value(lin.Fx);
  lin.theta2_G = p.theta2->value(lin.Gx);
  lin.h_x = p.h->value(x);
  return lin;
}

double eval_theta(const ProblemInstance& p, const Vec& x) {
  const Vec fx = checked_eval(*p.F, x, "F");
  const Vec gx = p.G == p.F ? fx : checked_eval(*p.G, x, "G");
  return p.theta1->value(fx) - p.theta2->value(gx);
}

double eval_phi(const ProblemInstance& p, const Vec& x) {
  const double hx = p.h->value(x);
  if (std::isinf(hx) && hx > 0) return std::numeric_limits<double>::infinity();
  return eval_theta(p, x) + hx;
}

LinearizedValues linearize(const Linearization& lin, const Vec& s) {
  const Vec d = s - lin.x;
  LinearizedValues out;
  const Vec ad = lin.A->apply(d);
  out.ellF = lin.Fx + ad;
  out.ellG = lin.B == lin.A ? Vec(lin.Gx + ad) : Vec(lin.Gx + lin.B->apply(d));
  return out;
}

LinearizedValues linearize(const ProblemInstance& p, const Vec& x, const Vec& s) {
  return linearize(linearize_at(p, x), s);
}

Vec select_xi(const ProblemInstance& p, const Vec& Gx, double kink_tol) {
  if (!(kink_tol > 0)) return -p.theta2->subgrad_select(Gx);
  const double cut = kink_tol * std::max(1.0, Gx.lpNorm<Eigen::Infinity>());
  const Vec z = (Gx.array().abs() <= cut).select(0.0, Gx);
  return -p.theta2->subgrad_select(z);
}

PotentialPoint make_potential_point(const ProblemInstance&, const Linearization& lin,
                                    const Vec& s, const Vec& z, double gamma, double alpha) {
  PotentialPoint w;
  w.x = lin.x;
  w.s = s;
  w.z = z;
  w.gamma = gamma;
  w.alpha = alpha;
  w.conj_neg_z = -z.dot(lin.Gx) - lin.theta2_G;
  w.cache_valid = true;
  return w;
}

PotentialPoint make_potential_point(const ProblemInstance& p, const Vec& x, const Vec& s,
                                    const Vec& z, double gamma, double alpha) {
  return make_potential_point(p, linearize_at(p, x), s, z, gamma, alpha);
}

double xi_potential(const ProblemInstance& p, const Linearization& lin, const PotentialPoint& w) {
  if (!w.cache_valid) throw ContractViolation("xi_potential: conjugate cache is not valid");
  const Vec d = w.s - lin.x;
  const Vec ad = lin.A->apply(d);
  const Vec ellF = lin.Fx + ad;
  const Vec ellG = lin.B == lin.A ? Vec(lin.Gx + ad) : Vec(lin.Gx + lin.B->apply(d));
  return p.theta1->value(ellF) + ellG.dot(w.z) + p.h->value(w.s) + w.conj_neg_z +
         w.gamma * d.squaredNorm() + w.alpha * ad.squaredNorm();
}

double xi_potential(const ProblemInstance& p, const PotentialPoint& w) {
  return xi_potential(p, linearize_at(p, w.x), w);
}

}  // namespace dcopt
