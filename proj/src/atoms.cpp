#include "dcopt/atoms.hpp"

#include <cmath>
#include <limits>

namespace dcopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_lambda(double lambda) {
  if (!(lambda > 0)) throw InvalidInput("prox parameter must be positive");
}

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMapMut = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

ProxJacobian ProxJacobian::diagonal(Vec diag) {
  const Index n = diag.size();
  return ProxJacobian(
      n, [diag](const Eigen::Ref<const Vec>& d, Eigen::Ref<Vec> out) { out = diag.cwiseProduct(d); });
}

ProxJacobian ProxJacobian::zero(Index dim) {
  return ProxJacobian(
      dim, [](const Eigen::Ref<const Vec>&, Eigen::Ref<Vec> out) { out.setZero(); });
}

ProxJacobian ProxJacobian::identity(Index dim) {
  return ProxJacobian(
      dim, [](const Eigen::Ref<const Vec>& d, Eigen::Ref<Vec> out) { out = d; });
}

Vec prox_jacobian_apply(const ProxAtom& atom, const Eigen::Ref<const Vec>& v, double lambda,
                        const Eigen::Ref<const Vec>& d) {
  if (!atom.has_jacobian()) {
    throw UnsupportedOperation("prox_jacobian_apply: atom provides no Jacobian");
  }
  return atom.prox_jacobian(v, lambda).apply(d);
}

// --- L1 -------------------------------------------------------------------

L1Atom::L1Atom(Index n, double weight) : n_(n), weight_(weight) {
  if (!(weight > 0)) throw InvalidInput("L1Atom: weight must be positive");
}

double L1Atom::value(const Eigen::Ref<const Vec>& v) const { return weight_ * v.lpNorm<1>(); }

void L1Atom::subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const {
  for (Index i = 0; i < n_; ++i) out[i] = v[i] < 0 ? -weight_ : weight_;
}

void L1Atom::prox_into(const Eigen::Ref<const Vec>& v, double lambda, Eigen::Ref<Vec> out) const {
  check_lambda(lambda);
  out = prox_l1(v, lambda * weight_);
}

ProxJacobian L1Atom::prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const {
  check_lambda(lambda);
  const double t = lambda * weight_;
  Vec diag(n_);
  for (Index i = 0; i < n_; ++i) diag[i] = std::abs(v[i]) > t ? 1.0 : 0.0;
  return ProxJacobian::diagonal(std::move(diag));
}

// --- hinge ----------------------------------------------------------------

HingeSumAtom::HingeSumAtom(Index n, double beta) : n_(n), beta_(beta) {
  if (!(beta > 0)) throw InvalidInput("HingeSumAtom: beta must be positive");
}

double HingeSumAtom::value(const Eigen::Ref<const Vec>& v) const {
  return beta_ * v.cwiseMax(0.0).sum();
}

void HingeSumAtom::subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const {
  for (Index i = 0; i < n_; ++i) out[i] = v[i] >= 0 ? beta_ : 0.0;
}

void HingeSumAtom::prox_into(const Eigen::Ref<const Vec>& v, double lambda,
                             Eigen::Ref<Vec> out) const {
  check_lambda(lambda);
  out = prox_hinge_sum(v, lambda, beta_);
}

ProxJacobian HingeSumAtom::prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const {
  check_lambda(lambda);
  const double t = lambda * beta_;
  Vec diag(n_);
  for (Index i = 0; i < n_; ++i) diag[i] = (v[i] < 0 || v[i] > t) ? 1.0 : 0.0;
  return ProxJacobian::diagonal(std::move(diag));
}

// --- coordinate max ---------------------------------------------------------

CoordMaxAtom::CoordMaxAtom(Index n) : n_(n) {
  if (n < 1) throw InvalidInput("CoordMaxAtom: dimension must be positive");
}

double CoordMaxAtom::value(const Eigen::Ref<const Vec>& v) const { return v.maxCoeff(); }

void CoordMaxAtom::subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const {
  Index best = 0;
  for (Index i = 1; i < n_; ++i)
    if (v[i] > v[best]) best = i;
  out.setZero();
  out[best] = 1.0;
}

void CoordMaxAtom::prox_into(const Eigen::Ref<const Vec>& v, double lambda,
                             Eigen::Ref<Vec> out) const {
  check_lambda(lambda);
  out = prox_coordmax(v, lambda);
}

ProxJacobian CoordMaxAtom::prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const {
  check_lambda(lambda);
  const Vec p = project_simplex(v, lambda);
  // I - J_proj with J_proj = I_S - ones_S ones_S^T / |S| on the support S.
  Vec mask(n_);
  for (Index i = 0; i < n_; ++i) mask[i] = p[i] > 0 ? 1.0 : 0.0;
  const double s = mask.sum();
  return ProxJacobian(
      n_,
      [mask, s](const Eigen::Ref<const Vec>& d, Eigen::Ref<Vec> out) {
        const double avg = s > 0 ? mask.dot(d) / s : 0.0;
        out = d - mask.cwiseProduct(d) + avg * mask;
      });
}

// --- box ------------------------------------------------------------------

BoxAtom::BoxAtom(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) throw InvalidInput("BoxAtom: dimension mismatch");
  if ((lower_.array() > upper_.array()).any()) {
    throw InvalidInput("BoxAtom: lower bound exceeds upper bound");
  }
}

double BoxAtom::value(const Eigen::Ref<const Vec>& v) const {
  for (Index i = 0; i < v.size(); ++i)
    if (v[i] < lower_[i] || v[i] > upper_[i]) return kInf;
  return 0.0;
}

void BoxAtom::subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const {
  for (Index i = 0; i < v.size(); ++i) {
    out[i] = v[i] > upper_[i] ? 1.0 : (v[i] < lower_[i] ? -1.0 : 0.0);
  }
}

void BoxAtom::prox_into(const Eigen::Ref<const Vec>& v, double, Eigen::Ref<Vec> out) const {
  out = prox_box(v, lower_, upper_);
}

ProxJacobian BoxAtom::prox_jacobian(const Eigen::Ref<const Vec>& v, double) const {
  Vec diag(v.size());
  for (Index i = 0; i < v.size(); ++i) diag[i] = (v[i] > lower_[i] && v[i] < upper_[i]) ? 1.0 : 0.0;
  return ProxJacobian::diagonal(std::move(diag));
}

// --- column group l21 -------------------------------------------------------

ColumnGroupL21Atom::ColumnGroupL21Atom(Index rows, Index cols, double weight)
    : rows_(rows), cols_(cols), weight_(weight) {
  if (!(weight > 0)) throw InvalidInput("ColumnGroupL21Atom: weight must be positive");
}

double ColumnGroupL21Atom::value(const Eigen::Ref<const Vec>& v) const {
  RowMajorMap m(v.data(), rows_, cols_);
  return weight_ * m.colwise().norm().sum();
}

void ColumnGroupL21Atom::subgrad_select_into(const Eigen::Ref<const Vec>& v,
                                             Eigen::Ref<Vec> out) const {
  RowMajorMap m(v.data(), rows_, cols_);
  RowMajorMapMut o(out.data(), rows_, cols_);
  const Eigen::RowVectorXd norms = m.colwise().norm();
  for (Index j = 0; j < cols_; ++j) {
    if (norms[j] > 0) {
      o.col(j) = (weight_ / norms[j]) * m.col(j);
    } else {
      o.col(j).setZero();
    }
  }
}

void ColumnGroupL21Atom::prox_into(const Eigen::Ref<const Vec>& v, double lambda,
                                   Eigen::Ref<Vec> out) const {
  check_lambda(lambda);
  RowMajorMap m(v.data(), rows_, cols_);
  RowMajorMapMut o(out.data(), rows_, cols_);
  const double t = lambda * weight_;
  const Eigen::RowVectorXd norms = m.colwise().norm();
  Eigen::RowVectorXd scale(cols_);
  for (Index j = 0; j < cols_; ++j) scale[j] = norms[j] > t ? 1.0 - t / norms[j] : 0.0;
  o = m.array().rowwise() * scale.array();
}

ProxJacobian ColumnGroupL21Atom::prox_jacobian(const Eigen::Ref<const Vec>& v,
                                               double lambda) const {
  check_lambda(lambda);
  const double t = lambda * weight_;
  RowMajorMap m(v.data(), rows_, cols_);
  const Eigen::RowVectorXd norms = m.colwise().norm();
  // Per active column c: (1 - t/||c||) I + (t/||c||^3) c c^T; zero otherwise.
  Eigen::RowVectorXd diag_scale(cols_), rank1_scale(cols_);
  for (Index j = 0; j < cols_; ++j) {
    if (norms[j] > t) {
      diag_scale[j] = 1.0 - t / norms[j];
      rank1_scale[j] = t / (norms[j] * norms[j] * norms[j]);
    } else {
      diag_scale[j] = 0.0;
      rank1_scale[j] = 0.0;
    }
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c = m;
  const Index rows = rows_, cols = cols_;
  return ProxJacobian(
      rows * cols,
      [c = std::move(c), diag_scale, rank1_scale, rows, cols](const Eigen::Ref<const Vec>& d,
                                                              Eigen::Ref<Vec> out) {
        RowMajorMap dm(d.data(), rows, cols);
        RowMajorMapMut om(out.data(), rows, cols);
        const Eigen::RowVectorXd proj = (c.array() * dm.array()).colwise().sum();
        const Eigen::RowVectorXd coef = proj.cwiseProduct(rank1_scale);
        om = (dm.array().rowwise() * diag_scale.array()) + (c.array().rowwise() * coef.array());
      });
}

// --- separable sum ----------------------------------------------------------

SeparableSum::SeparableSum(std::vector<AtomPtr> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw InvalidInput("SeparableSum: no blocks");
  for (const auto& b : blocks_) {
    if (!b) throw InvalidInput("SeparableSum: null block");
    offsets_.push_back(dim_);
    dim_ += b->dim();
  }
}

double SeparableSum::value(const Eigen::Ref<const Vec>& v) const {
  double s = 0.0;
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    s += blocks_[i]->value(v.segment(offsets_[i], blocks_[i]->dim()));
  return s;
}

void SeparableSum::subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Index n = blocks_[i]->dim();
    blocks_[i]->subgrad_select_into(v.segment(offsets_[i], n), out.segment(offsets_[i], n));
  }
}

void SeparableSum::prox_into(const Eigen::Ref<const Vec>& v, double lambda,
                             Eigen::Ref<Vec> out) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Index n = blocks_[i]->dim();
    blocks_[i]->prox_into(v.segment(offsets_[i], n), lambda, out.segment(offsets_[i], n));
  }
}

bool SeparableSum::has_jacobian() const {
  return std::all_of(blocks_.begin(), blocks_.end(), [](const AtomPtr& b) { return b->has_jacobian(); });
}

bool SeparableSum::smooth() const {
  return std::all_of(blocks_.begin(), blocks_.end(), [](const AtomPtr& b) { return b->smooth(); });
}

ProxJacobian SeparableSum::prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const {
  std::vector<ProxJacobian> parts;
  parts.reserve(blocks_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    parts.push_back(blocks_[i]->prox_jacobian(v.segment(offsets_[i], blocks_[i]->dim()), lambda));
  auto apply = [parts = std::move(parts), offsets = offsets_](const Eigen::Ref<const Vec>& d,
                                                              Eigen::Ref<Vec> out) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const Index n = parts[i].dim();
      parts[i].apply_into(d.segment(offsets[i], n), out.segment(offsets[i], n));
    }
  };
  return ProxJacobian(dim_, std::move(apply));
}

// --- linear add ---------------------------------------------------------------

LinearAdd::LinearAdd(AtomPtr inner, Vec c) : inner_(std::move(inner)), c_(std::move(c)) {
  if (!inner_ || inner_->dim() != c_.size()) throw InvalidInput("LinearAdd: dimension mismatch");
}

double LinearAdd::value(const Eigen::Ref<const Vec>& v) const { return inner_->value(v) + c_.dot(v); }

void LinearAdd::subgrad_select_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const {
  inner_->subgrad_select_into(v, out);
  out += c_;
}

void LinearAdd::prox_into(const Eigen::Ref<const Vec>& v, double lambda, Eigen::Ref<Vec> out) const {
  check_lambda(lambda);
  const Vec shifted = v - lambda * c_;
  inner_->prox_into(shifted, lambda, out);
}

ProxJacobian LinearAdd::prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const {
  check_lambda(lambda);
  const Vec shifted = v - lambda * c_;
  return inner_->prox_jacobian(shifted, lambda);
}

// --- affine precomposition ----------------------------------------------------

AffinePrecompose::AffinePrecompose(AtomPtr inner, double scale, Vec shift)
    : inner_(std::move(inner)), scale_(scale), shift_(std::move(shift)) {
  if (!inner_ || inner_->dim() != shift_.size()) {
    throw InvalidInput("AffinePrecompose: dimension mismatch");
  }
  if (scale_ == 0.0) throw InvalidInput("AffinePrecompose: scale must be nonzero");
}

double AffinePrecompose::value(const Eigen::Ref<const Vec>& v) const {
  return inner_->value(scale_ * v + shift_);
}

void AffinePrecompose::subgrad_select_into(const Eigen::Ref<const Vec>& v,
                                           Eigen::Ref<Vec> out) const {
  inner_->subgrad_select_into(scale_ * v + shift_, out);
  out *= scale_;
}

// prox_{lambda f(a . + s)}(v) = (prox_{lambda a^2 f}(a v + s) - s) / a.
void AffinePrecompose::prox_into(const Eigen::Ref<const Vec>& v, double lambda,
                                 Eigen::Ref<Vec> out) const {
  check_lambda(lambda);
  const Vec inner_arg = scale_ * v + shift_;
  inner_->prox_into(inner_arg, lambda * scale_ * scale_, out);
  out = (out - shift_) / scale_;
}

ProxJacobian AffinePrecompose::prox_jacobian(const Eigen::Ref<const Vec>& v, double lambda) const {
  check_lambda(lambda);
  return inner_->prox_jacobian(scale_ * v + shift_, lambda * scale_ * scale_);
}

}  // namespace dcopt
