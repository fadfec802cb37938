#ifndef DCOPT_ATOMS_HPP
#define DCOPT_ATOMS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <vector>

#include "dcopt/errors.hpp"
#include "dcopt/numerics.hpp"

namespace dcopt {

// ---------------------------------------------------------------------------
// Closed-form prox kernels. Each operates on any dense Eigen expression and
// returns a plain object of the same scalar type.
// ---------------------------------------------------------------------------

// Soft threshold: sign(v_i) max(|v_i| - lambda, 0).
template <typename Derived>
typename Derived::PlainObject prox_l1(const Eigen::MatrixBase<Derived>& v,
                                      typename Derived::Scalar lambda) {
  using S = typename Derived::Scalar;
  return v.unaryExpr([lambda](S t) {
    const S a = std::abs(t) - lambda;
    return a > S(0) ? (t > S(0) ? a : -a) : S(0);
  });
}

// Column-wise radial shrinkage c * max(1 - lambda / ||c||, 0).
template <typename Derived>
typename Derived::PlainObject prox_group_l21(const Eigen::MatrixBase<Derived>& m,
                                             typename Derived::Scalar lambda) {
  using S = typename Derived::Scalar;
  typename Derived::PlainObject out = m;
  for (Index j = 0; j < out.cols(); ++j) {
    const S nrm = out.col(j).norm();
    if (nrm <= lambda) {
      out.col(j).setZero();
    } else {
      out.col(j) *= S(1) - lambda / nrm;
    }
  }
  return out;
}

// Prox of lambda * beta * sum max(y_i, 0).
template <typename Derived>
typename Derived::PlainObject prox_hinge_sum(const Eigen::MatrixBase<Derived>& v,
                                             typename Derived::Scalar lambda,
                                             typename Derived::Scalar beta) {
  using S = typename Derived::Scalar;
  const S t = lambda * beta;
  return v.unaryExpr([t](S x) { return x <= S(0) ? x : (x <= t ? S(0) : x - t); });
}

// Euclidean projection onto {y >= 0, sum y = radius} by sort and threshold.
template <typename Derived>
typename Derived::PlainObject project_simplex(const Eigen::MatrixBase<Derived>& v,
                                              typename Derived::Scalar radius) {
  using S = typename Derived::Scalar;
  const Index n = v.size();
  typename Derived::PlainObject out(v.rows(), v.cols());
  if (n == 0) return out;
  std::vector<S> u(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = v(i);
  std::sort(u.begin(), u.end(), std::greater<S>());
  S cumsum = 0;
  S theta = 0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[static_cast<std::size_t>(j)];
    const S t = (cumsum - radius) / S(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > S(0)) theta = t;
  }
  for (Index i = 0; i < n; ++i) out(i) = std::max(v(i) - theta, S(0));
  return out;
}

// Prox of lambda * max_i y_i, i.e. v minus the projection of v onto the
// simplex of radius lambda (max is the support function of the unit simplex).
template <typename Derived>
typename Derived::PlainObject prox_coordmax(const Eigen::MatrixBase<Derived>& v,
                                            typename Derived::Scalar lambda) {
  return v - project_simplex(v, lambda);
}

template <typename Derived, typename DerivedL, typename DerivedU>
typename Derived::PlainObject prox_box(const Eigen::MatrixBase<Derived>& v,
                                       const Eigen::MatrixBase<DerivedL>& lower,
                                       const Eigen::MatrixBase<DerivedU>& upper) {
  if (v.size() != lower.size() || v.size() != upper.size()) {
    throw InvalidInput("prox_box: dimension mismatch");
  }
  if ((lower.array() > upper.array()).any()) {
    throw InvalidInput("prox_box: lower bound exceeds upper bound");
  }
  return v.cwiseMax(lower).cwiseMin(upper);
}

// ---------------------------------------------------------------------------
// Atom interfaces.
// ---------------------------------------------------------------------------

// A symmetric element of the Clarke Jacobian of a prox map at a fixed point,
// applied as an operator.
class ProxJacobian {
 public:
  using Apply = std::function<void(const Eigen::Ref<const Vec>&, Eigen::Ref<Vec>)>;

  ProxJacobian() = default;
  ProxJacobian(Index dim, Apply apply) : dim_(dim), apply_(std::move(apply)) {}

  static ProxJacobian diagonal(Vec diag);
  static ProxJacobian zero(Index dim);
  static ProxJacobian identity(Index dim);

  Index dim() const { return dim_; }
  void apply_into(const Eigen::Ref<const Vec>& d, Eigen::Ref<Vec> out) const { apply_(d, out); }
  Vec apply(const Eigen::Ref<const Vec>& d) const {
    Vec out(dim_);
    apply_(d, out);
    return out;
  }

 private:
  Index dim_ = 0;
  Apply apply_;
};

// Finite convex function with a deterministic B-subgradient selection.
class ConvexFunction {
 public:
  virtual ~ConvexFunction() = default;

  virtual Index dim() const = 0;
  virtual double value(const Eigen::Ref<const Vec>& v) const = 0;
  virtual void subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const = 0;
  // True when the function is continuously differentiable, in which case the
  // selection is the gradient.
  virtual bool smooth() const { return false; }

  Vec subgrad_select(const Eigen::Ref<const Vec>& v) const {
    Vec out(dim());
    subgrad_select_into(v, out);
    return out;
  }
};

// Closed proper convex function with a closed-form prox.
class ProxAtom : public ConvexFunction {
 public:
  // prox_{lambda f}(v) = argmin f(y) + ||y - v||^2 / (2 lambda).
  virtual void prox_into(const Eigen::Ref<const Vec>& v, double lambda,
                         Eigen::Ref<Vec> out) const = 0;
  virtual bool has_jacobian() const { return true; }
  virtual ProxJacobian prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const = 0;

  Vec prox(const Eigen::Ref<const Vec>& v, double lambda) const {
    Vec out(dim());
    prox_into(v, lambda, out);
    return out;
  }
  // Moreau envelope evaluated through the prox point.
  double envelope(const Eigen::Ref<const Vec>& v, double lambda) const {
    const Vec p = prox(v, lambda);
    return value(p) + (p - v).squaredNorm() / (2.0 * lambda);
  }
};

using AtomPtr = std::shared_ptr<const ProxAtom>;
using ConvexPtr = std::shared_ptr<const ConvexFunction>;

Vec prox_jacobian_apply(const ProxAtom& atom, const Eigen::Ref<const Vec>& v, double lambda,
                        const Eigen::Ref<const Vec>& d);
inline Vec subgrad_select(const ConvexFunction& f, const Eigen::Ref<const Vec>& v) {
  return f.subgrad_select(v);
}

// ---------------------------------------------------------------------------
// Concrete atoms.
// ---------------------------------------------------------------------------

class ZeroAtom final : public ProxAtom {
 public:
  explicit ZeroAtom(Index n) : n_(n) {}
  Index dim() const override { return n_; }
  double value(const Eigen::Ref<const Vec>&) const override { return 0.0; }
  void subgrad_select_into(const Eigen::Ref<const Vec>&, Eigen::Ref<Vec> out) const override {
    out.setZero();
  }
  bool smooth() const override { return true; }
  void prox_into(const Eigen::Ref<const Vec>& v, double, Eigen::Ref<Vec> out) const override {
    out = v;
  }
  ProxJacobian prox_jacobian(const Eigen::Ref<const Vec>&, double) const override {
    return ProxJacobian::identity(n_);
  }

 private:
  Index n_;
};

// weight * ||y||_1. Subgradient sign(0) := +1; Jacobian 0 at |v_i| = lambda.
class L1Atom final : public ProxAtom {
 public:
  explicit L1Atom(Index n, double weight = 1.0);
  Index dim() const override { return n_; }
  double value(const Eigen::Ref<const Vec>& v) const override;
  void subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const override;
  void prox_into(const Eigen::Ref<const Vec>& v, double lambda, Eigen::Ref<Vec> out) const override;
  ProxJacobian prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const override;

 private:
  Index n_;
  double weight_;
};

// beta * sum max(y_i, 0). Subgradient at 0 is 1; Jacobian 0 on [0, lambda beta].
class HingeSumAtom final : public ProxAtom {
 public:
  HingeSumAtom(Index n, double beta);
  Index dim() const override { return n_; }
  double value(const Eigen::Ref<const Vec>& v) const override;
  void subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const override;
  void prox_into(const Eigen::Ref<const Vec>& v, double lambda, Eigen::Ref<Vec> out) const override;
  ProxJacobian prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const override;
  double beta() const { return beta_; }

 private:
  Index n_;
  double beta_;
};

// max_i y_i. Subgradient picks the smallest maximizing index.
class CoordMaxAtom final : public ProxAtom {
 public:
  explicit CoordMaxAtom(Index n);
  Index dim() const override { return n_; }
  double value(const Eigen::Ref<const Vec>& v) const override;
  void subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const override;
  void prox_into(const Eigen::Ref<const Vec>& v, double lambda, Eigen::Ref<Vec> out) const override;
  ProxJacobian prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const override;

 private:
  Index n_;
};

// Indicator of [lower, upper].
class BoxAtom final : public ProxAtom {
 public:
  BoxAtom(Vec lower, Vec upper);
  Index dim() const override { return lower_.size(); }
  double value(const Eigen::Ref<const Vec>& v) const override;
  // Zero inside; outside the box the normal-cone element sign(v - clamp(v)).
  void subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const override;
  void prox_into(const Eigen::Ref<const Vec>& v, double lambda, Eigen::Ref<Vec> out) const override;
  ProxJacobian prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const override;
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

 private:
  Vec lower_, upper_;
};

// weight * sum_j ||M_{:,j}||_2 for a rows x cols matrix stored row-major in
// the argument vector (entry (i, j) at i * cols + j). Subgradient at a zero
// column is zero.
class ColumnGroupL21Atom final : public ProxAtom {
 public:
  ColumnGroupL21Atom(Index rows, Index cols, double weight);
  Index dim() const override { return rows_ * cols_; }
  double value(const Eigen::Ref<const Vec>& v) const override;
  void subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const override;
  void prox_into(const Eigen::Ref<const Vec>& v, double lambda, Eigen::Ref<Vec> out) const override;
  ProxJacobian prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const override;

 private:
  Index rows_, cols_;
  double weight_;
};

// ---------------------------------------------------------------------------
// Combinators.
// ---------------------------------------------------------------------------

// f(y_1, ..., y_p) = sum f_i(y_i) over consecutive blocks.
class SeparableSum final : public ProxAtom {
 public:
  explicit SeparableSum(std::vector<AtomPtr> blocks);
  Index dim() const override { return dim_; }
  double value(const Eigen::Ref<const Vec>& v) const override;
  void subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const override;
  void prox_into(const Eigen::Ref<const Vec>& v, double lambda, Eigen::Ref<Vec> out) const override;
  bool has_jacobian() const override;
  ProxJacobian prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const override;
  bool smooth() const override;

  const std::vector<AtomPtr>& blocks() const { return blocks_; }
  const std::vector<Index>& offsets() const { return offsets_; }

 private:
  std::vector<AtomPtr> blocks_;
  std::vector<Index> offsets_;
  Index dim_ = 0;
};

// f(y) + <c, y>.
class LinearAdd final : public ProxAtom {
 public:
  LinearAdd(AtomPtr inner, Vec c);
  Index dim() const override { return inner_->dim(); }
  double value(const Eigen::Ref<const Vec>& v) const override;
  void subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const override;
  void prox_into(const Eigen::Ref<const Vec>& v, double lambda, Eigen::Ref<Vec> out) const override;
  bool has_jacobian() const override { return inner_->has_jacobian(); }
  ProxJacobian prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const override;
  bool smooth() const override { return inner_->smooth(); }

 private:
  AtomPtr inner_;
  Vec c_;
};

// f(a y + s) for a nonzero scalar a and shift vector s.
class AffinePrecompose final : public ProxAtom {
 public:
  AffinePrecompose(AtomPtr inner, double scale, Vec shift);
  Index dim() const override { return inner_->dim(); }
  double value(const Eigen::Ref<const Vec>& v) const override;
  void subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const override;
  void prox_into(const Eigen::Ref<const Vec>& v, double lambda, Eigen::Ref<Vec> out) const override;
  bool has_jacobian() const override { return inner_->has_jacobian(); }
  ProxJacobian prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const override;
  bool smooth() const override { return inner_->smooth(); }

 private:
  AtomPtr inner_;
  double scale_;
  Vec shift_;
};

// Convenience factories.
inline AtomPtr zero_atom(Index n) { return std::make_shared<ZeroAtom>(n); }
inline AtomPtr l1_atom(Index n, double weight = 1.0) { return std::make_shared<L1Atom>(n, weight); }
inline AtomPtr hinge_atom(Index n, double beta) { return std::make_shared<HingeSumAtom>(n, beta); }
inline AtomPtr coordmax_atom(Index n) { return std::make_shared<CoordMaxAtom>(n); }
inline AtomPtr box_atom(Vec lo, Vec hi) {
  return std::make_shared<BoxAtom>(std::move(lo), std::move(hi));
}
inline AtomPtr linear_atom(Vec c) {
  const Index n = c.size();
  return std::make_shared<LinearAdd>(zero_atom(n), std::move(c));
}
inline AtomPtr separable_sum(std::vector<AtomPtr> blocks) {
  return std::make_shared<SeparableSum>(std::move(blocks));
}
inline AtomPtr linear_add(AtomPtr f, Vec c) {
  return std::make_shared<LinearAdd>(std::move(f), std::move(c));
}
inline AtomPtr affine_precompose(AtomPtr f, double scale, Vec shift) {
  return std::make_shared<AffinePrecompose>(std::move(f), scale, std::move(shift));
}

}  // namespace dcopt

#endif  // DCOPT_ATOMS_HPP
