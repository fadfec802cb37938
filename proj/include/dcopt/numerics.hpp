#ifndef DCOPT_NUMERICS_HPP
#define DCOPT_NUMERICS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>

#include "dcopt/errors.hpp"

namespace dcopt {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A linear map between Euclidean spaces together with its adjoint.
class LinearMap {
 public:
  virtual ~LinearMap() = default;

  virtual Index in_dim() const = 0;
  virtual Index out_dim() const = 0;
  virtual void apply_into(const Eigen::Ref<const Vec>& u, Eigen::Ref<Vec> out) const = 0;
  virtual void apply_adjoint_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const = 0;

  Vec apply(const Eigen::Ref<const Vec>& u) const {
    Vec out(out_dim());
    apply_into(u, out);
    return out;
  }
  Vec apply_adjoint(const Eigen::Ref<const Vec>& v) const {
    Vec out(in_dim());
    apply_adjoint_into(v, out);
    return out;
  }
};

class DenseMap final : public LinearMap {
 public:
  explicit DenseMap(Mat m) : m_(std::move(m)) {}
  Index in_dim() const override { return m_.cols(); }
  Index out_dim() const override { return m_.rows(); }
  void apply_into(const Eigen::Ref<const Vec>& u, Eigen::Ref<Vec> out) const override {
    out.noalias() = m_ * u;
  }
  void apply_adjoint_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const override {
    out.noalias() = m_.transpose() * v;
  }
  const Mat& matrix() const { return m_; }

 private:
  Mat m_;
};

class IdentityMap final : public LinearMap {
 public:
  explicit IdentityMap(Index n) : n_(n) {}
  Index in_dim() const override { return n_; }
  Index out_dim() const override { return n_; }
  void apply_into(const Eigen::Ref<const Vec>& u, Eigen::Ref<Vec> out) const override { out = u; }
  void apply_adjoint_into(const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) const override {
    out = v;
  }

 private:
  Index n_;
};

// Materializes a LinearMap column by column. Intended for tests and small maps.
Mat to_dense(const LinearMap& a);

// Reproducible random stream. All randomness in the library flows through
// this type; the generator is mt19937_64 and every distribution is derived
// from its raw 64-bit output so sequences match across platforms.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();
  Vec normal_vector(Index n);
  Mat normal_matrix(Index rows, Index cols);

  // Independent stream for task `stream` (splitmix64 over seed and stream id).
  RandomSource derive(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Runs body(i) for i in [0, count) on up to `threads` workers. Tasks are
// claimed in index order; the first exception is rethrown after all workers
// finish.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

enum class NoiseKind { I, II, III, IV, V };

NoiseKind parse_noise_kind(const std::string& s);
std::string to_string(NoiseKind k);

// I: N(0, 10^2); II: 2 t_4; III: standard Cauchy; IV: N(0, s^2), s ~ U(1,5);
// V: Laplace with density exp(-|u|)/2.
Vec sample_noise(NoiseKind kind, Index count, RandomSource& rng);

template <typename Scalar>
struct CgResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solution;
  Scalar residual_norm = 0;
  int iters = 0;
};

// Conjugate gradient for a self-adjoint positive definite operator `w`
// (callable as w(in, out)). Stops when ||W x - rhs|| <= tol (absolute).
// Throws IndefiniteOperator when a search direction p has <p, Wp> <=
// min_curvature * ||p||^2 (min_curvature = 0 flags non-positive curvature).
// On hitting max_iter the last iterate is returned: it has the smallest
// W-norm error of all iterates and is always a descent direction for the
// quadratic model, unlike the smallest-residual iterate.
template <typename Scalar, typename Op>
CgResult<Scalar> cg_solve(const Op& w, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& rhs,
                          Scalar tol, int max_iter, Scalar min_curvature = Scalar(0)) {
  using V = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (!rhs.allFinite()) throw InvalidInput("cg_solve: non-finite right-hand side");
  if (tol < 0) throw InvalidInput("cg_solve: negative tolerance");
  if (max_iter < 1) throw InvalidInput("cg_solve: max_iter must be positive");

  const Index n = rhs.size();
  CgResult<Scalar> res;
  res.solution = V::Zero(n);
  V r = rhs;
  Scalar rr = r.squaredNorm();
  res.residual_norm = std::sqrt(rr);
  if (res.residual_norm <= tol) return res;

  V p = r;
  V wp(n);
  for (int it = 1; it <= max_iter; ++it) {
    w(p, wp);
    if (!wp.allFinite()) throw InvalidInput("cg_solve: operator produced non-finite values");
    const Scalar pwp = p.dot(wp);
    const Scalar pp = p.squaredNorm();
    if (!(pwp > min_curvature * pp) || pwp <= 0) {
      throw IndefiniteOperator("cg_solve: curvature " + std::to_string(pwp) +
                               " along a direction of squared norm " + std::to_string(pp));
    }
    const Scalar step = rr / pwp;
    res.solution.noalias() += step * p;
    r.noalias() -= step * wp;
    const Scalar rr_new = r.squaredNorm();
    res.iters = it;
    res.residual_norm = std::sqrt(rr_new);
    if (res.residual_norm <= tol) return res;
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return res;
}

inline CgResult<double> cg_solve(const LinearMap& w, const Vec& rhs, double tol, int max_iter) {
  return cg_solve<double>(
      [&w](const Vec& in, Vec& out) { w.apply_into(in, out); }, rhs, tol, max_iter);
}

// Power iteration on A*A. The returned value is the largest ||A v|| seen over
// unit iterates v, so it never exceeds ||A|| beyond round-off and is
// nondecreasing in `iters`.
double estimate_op_norm(const LinearMap& a, int iters, RandomSource& rng);

// Central differences; component i = (f(x + h e_i) - f(x - h e_i)) / (2h).
template <typename Scalar, typename F>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> finite_diff_gradient(
    const F& f, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x, Scalar step) {
  if (!(step > 0)) throw InvalidInput("finite_diff_gradient: step must be positive");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g(x.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    const Scalar xi = xp[i];
    xp[i] = xi + step;
    const Scalar fp = f(xp);
    xp[i] = xi - step;
    const Scalar fm = f(xp);
    xp[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw InvalidEvaluation("finite_diff_gradient: non-finite evaluation at component " +
                              std::to_string(i));
    }
    g[i] = (fp - fm) / (2 * step);
  }
  return g;
}

// Directional central difference of a vector-valued map.
template <typename F>
Vec finite_diff_directional(const F& f, const Vec& x, const Vec& d, double step) {
  const Vec fp = f(Vec(x + step * d));
  const Vec fm = f(Vec(x - step * d));
  if (!fp.allFinite() || !fm.allFinite()) {
    throw InvalidEvaluation("finite_diff_directional: non-finite evaluation");
  }
  return (fp - fm) / (2 * step);
}

inline double relative_error(const Vec& a, const Vec& b) {
  const double scale = std::max({a.norm(), b.norm(), std::numeric_limits<double>::min()});
  return (a - b).norm() / scale;
}

}  // namespace dcopt

#endif  // DCOPT_NUMERICS_HPP
