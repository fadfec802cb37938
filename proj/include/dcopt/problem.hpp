#ifndef DCOPT_PROBLEM_HPP
#define DCOPT_PROBLEM_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "dcopt/atoms.hpp"
#include "dcopt/numerics.hpp"

namespace dcopt {

using LinearMapPtr = std::shared_ptr<const LinearMap>;

// A continuously differentiable map with its differential F'(x) as a LinearMap.
class SmoothMap {
 public:
  virtual ~SmoothMap() = default;
  virtual Index in_dim() const = 0;
  virtual Index out_dim() const = 0;
  virtual Vec eval(const Vec& x) const = 0;
  virtual LinearMapPtr jacobian_at(const Vec& x) const = 0;
};

using SmoothMapPtr = std::shared_ptr<const SmoothMap>;

// Small maps given by closures: the Jacobian callback returns a dense matrix.
class FunctionSmoothMap final : public SmoothMap {
 public:
  using EvalFn = std::function<Vec(const Vec&)>;
  using JacFn = std::function<Mat(const Vec&)>;

  FunctionSmoothMap(Index in_dim, Index out_dim, EvalFn eval, JacFn jac);
  Index in_dim() const override { return in_; }
  Index out_dim() const override { return out_; }
  Vec eval(const Vec& x) const override;
  LinearMapPtr jacobian_at(const Vec& x) const override;

 private:
  Index in_, out_;
  EvalFn eval_;
  JacFn jac_;
};

// x -> M x + s.
class AffineSmoothMap final : public SmoothMap {
 public:
  AffineSmoothMap(Mat m, Vec shift);
  Index in_dim() const override { return map_->in_dim(); }
  Index out_dim() const override { return map_->out_dim(); }
  Vec eval(const Vec& x) const override;
  LinearMapPtr jacobian_at(const Vec&) const override { return map_; }

 private:
  std::shared_ptr<const DenseMap> map_;
  Vec shift_;
};

inline SmoothMapPtr function_map(Index in, Index out, FunctionSmoothMap::EvalFn f,
                                 FunctionSmoothMap::JacFn j) {
  return std::make_shared<FunctionSmoothMap>(in, out, std::move(f), std::move(j));
}
inline SmoothMapPtr affine_map(Mat m, Vec shift) {
  return std::make_shared<AffineSmoothMap>(std::move(m), std::move(shift));
}

// Phi(x) = theta1(F(x)) - theta2(G(x)) + h(x).
//
// theta2 only needs a value and a subgradient selection; when it is smooth
// the selection is its gradient.
struct ProblemInstance {
  AtomPtr theta1;
  ConvexPtr theta2;
  SmoothMapPtr F;
  SmoothMapPtr G;
  AtomPtr h;
  std::optional<double> lower_bound_hint;
  // Scale in the relative step test ||x^k - x^{k-1}|| / step_scale.
  double step_scale = 1.0;
  std::string name;

  Index dim() const { return F->in_dim(); }
  // Throws InvalidInput on inconsistent dimensions or missing parts.
  void validate() const;
};

// Everything about the problem that depends only on the base point x.
struct Linearization {
  Vec x;
  Vec Fx;
  Vec Gx;
  LinearMapPtr A;  // F'(x)
  LinearMapPtr B;  // G'(x)
  double theta1_F = 0;
  double theta2_G = 0;
  double h_x = 0;

  double phi() const { return theta1_F - theta2_G + h_x; }
  double theta() const { return theta1_F - theta2_G; }
};

Linearization linearize_at(const ProblemInstance& p, const Vec& x);

double eval_phi(const ProblemInstance& p, const Vec& x);
// The DC part Theta(x) = theta1(F(x)) - theta2(G(x)).
double eval_theta(const ProblemInstance& p, const Vec& x);

struct LinearizedValues {
  Vec ellF;
  Vec ellG;
};

// ell_F(x, s) = F(x) + F'(x)(s - x), likewise for G.
LinearizedValues linearize(const ProblemInstance& p, const Vec& x, const Vec& s);
LinearizedValues linearize(const Linearization& lin, const Vec& s);

// A point of the potential Xi. The metric is gamma I + alpha A*A with A = F'(x).
struct PotentialPoint {
  Vec x;
  Vec s;
  Vec z;
  double gamma = 0;
  double alpha = 0;
  // theta2*(-z), valid when z was selected from d(-theta2)(G(x)).
  double conj_neg_z = 0;
  bool cache_valid = false;
};

// Selection xi in d(-theta2)(G(x)), i.e. minus the theta2 selection.
// With kink_tol > 0, entries of G(x) within kink_tol * max(1, ||G(x)||_inf) of
// zero are treated as zero before the selection.
Vec select_xi(const ProblemInstance& p, const Vec& Gx, double kink_tol = 0.0);

// Builds w = (x, s, z, Q) and fills the conjugate cache via
// theta2(G(x)) + theta2*(-z) = -<z, G(x)>.
PotentialPoint make_potential_point(const ProblemInstance& p, const Vec& x, const Vec& s,
                                    const Vec& z, double gamma, double alpha);
PotentialPoint make_potential_point(const ProblemInstance& p, const Linearization& lin,
                                    const Vec& s, const Vec& z, double gamma, double alpha);

double xi_potential(const ProblemInstance& p, const PotentialPoint& w);
double xi_potential(const ProblemInstance& p, const Linearization& lin, const PotentialPoint& w);

}  // namespace dcopt

#endif  // DCOPT_PROBLEM_HPP
