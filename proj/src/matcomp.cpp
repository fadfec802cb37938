#include "dcopt/matcomp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace dcopt {

// --- SCAD ---------------------------------------------------------------------

void ScadConfig::validate() const {
  if (!(a > 1)) throw InvalidInput("ScadConfig: a must exceed 1");
  if (!(rho > 0)) throw InvalidInput("ScadConfig: rho must be positive");
  if (!(c_lambda > 0)) throw InvalidInput("ScadConfig: c_lambda must be positive");
}

double scad_theta(double s, double a) {
  if (s <= 2.0 / (a + 1)) return 0.0;
  if (s <= 2.0 * a / (a + 1)) {
    const double t = (a + 1) * s - 2;
    return t * t / (4 * (a * a - 1));
  }
  return s - 1;
}

Vec vartheta2_grad(const Vec& z, const ScadConfig& cfg) {
  const double a = cfg.a, rho = cfg.rho;
  return z.unaryExpr([a, rho](double t) {
    const double g = std::clamp(((a + 1) * rho * std::abs(t) - 2) / (2 * (a - 1)), 0.0, 1.0);
    return t < 0 ? -g : (t > 0 ? g : 0.0);
  });
}

ScadLoss::ScadLoss(Index m, double a, double rho) : m_(m), a_(a), rho_(rho) {
  if (!(a > 1) || !(rho > 0)) throw InvalidInput("ScadLoss: need a > 1 and rho > 0");
}

double ScadLoss::value(const Eigen::Ref<const Vec>& z) const {
  double s = 0;
  for (Index i = 0; i < z.size(); ++i) s += scad_theta(rho_ * std::abs(z[i]), a_);
  return s / rho_;
}

void ScadLoss::subgrad_select_into(const Eigen::Ref<const Vec>& z, Eigen::Ref<Vec> out) const {
  const double a = a_, rho = rho_;
  for (Index i = 0; i < z.size(); ++i) {
    const double t = z[i];
    const double g = std::clamp(((a + 1) * rho * std::abs(t) - 2) / (2 * (a - 1)), 0.0, 1.0);
    out[i] = t < 0 ? -g : (t > 0 ? g : 0.0);
  }
}

// --- sampling -----------------------------------------------------------------

SamplingScheme parse_scheme(const std::string& s) {
  if (s == "S1" || s == "s1") return SamplingScheme::S1;
  if (s == "S2" || s == "s2") return SamplingScheme::S2;
  throw InvalidInput("unknown sampling scheme '" + s + "' (expected S1 or S2)");
}

std::string to_string(SamplingScheme s) { return s == SamplingScheme::S1 ? "S1" : "S2"; }

Vec band_marginals(Index n, SamplingScheme scheme) {
  if (n < 1) throw InvalidInput("band_marginals: n must be positive");
  const double w1 = scheme == SamplingScheme::S1 ? 2.0 : 3.0;
  const double w2 = scheme == SamplingScheme::S1 ? 4.0 : 9.0;
  Vec p(n);
  const double n10 = static_cast<double>(n) / 10.0;
  const double n5 = static_cast<double>(n) / 5.0;
  for (Index k = 1; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    p[k - 1] = kk <= n10 ? w1 : (kk <= n5 ? w2 : 1.0);
  }
  return p / p.sum();
}

Index SamplingModel::m() const {
  return static_cast<Index>(std::llround(sr * static_cast<double>(n1) * static_cast<double>(n2)));
}

namespace {

std::vector<double> cumulative(const Vec& p) {
  std::vector<double> c(static_cast<std::size_t>(p.size()));
  double s = 0;
  for (Index i = 0; i < p.size(); ++i) {
    s += p[i];
    c[static_cast<std::size_t>(i)] = s;
  }
  return c;
}

Index draw(const std::vector<double>& cdf, RandomSource& rng) {
  const double u = rng.uniform() * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto idx = static_cast<Index>(it - cdf.begin());
  return std::min<Index>(idx, static_cast<Index>(cdf.size()) - 1);
}

}  // namespace

std::vector<Entry> sample_indices(const SamplingModel& model, RandomSource& rng) {
  if (model.n1 < 1 || model.n2 < 1) throw InvalidInput("sample_indices: empty matrix");
  if (!(model.sr > 0 && model.sr <= 1)) throw InvalidInput("sample_indices: sr must lie in (0,1]");
  const auto rows = cumulative(band_marginals(model.n1, model.scheme));
  const auto cols = cumulative(band_marginals(model.n2, model.scheme));
  const Index m = model.m();
  std::vector<Entry> omega(static_cast<std::size_t>(m));
  for (auto& e : omega) {
    e.i = draw(rows, rng);
    e.j = draw(cols, rng);
  }
  return omega;
}

Observation observe(const Mat& truth, std::vector<Entry> omega, NoiseKind noise,
                    double outlier_fraction, RandomSource& rng, bool keep_truth) {
  if (!(outlier_fraction >= 0 && outlier_fraction <= 1)) {
    throw InvalidInput("observe: outlier fraction must lie in [0,1]");
  }
  Observation obs;
  obs.n1 = truth.rows();
  obs.n2 = truth.cols();
  obs.noise_kind = noise;
  obs.outlier_fraction = outlier_fraction;
  const Index m = static_cast<Index>(omega.size());
  obs.b.resize(m);
  for (Index t = 0; t < m; ++t) {
    const Entry& e = omega[static_cast<std::size_t>(t)];
    if (e.i < 0 || e.i >= obs.n1 || e.j < 0 || e.j >= obs.n2) {
      throw InvalidInput("observe: sample index out of range");
    }
    obs.b[t] = truth(e.i, e.j);
  }
  const auto count = static_cast<Index>(std::floor(outlier_fraction * static_cast<double>(m)));
  // Partial Fisher-Yates: the first `count` slots form a uniform subset.
  std::vector<Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index t = 0; t < count; ++t) {
    const auto pick = t + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(m - t)));
    std::swap(perm[static_cast<std::size_t>(t)], perm[static_cast<std::size_t>(pick)]);
  }
  const Vec w = sample_noise(noise, count, rng);
  for (Index t = 0; t < count; ++t) obs.b[perm[static_cast<std::size_t>(t)]] += w[t];
  obs.omega = std::move(omega);
  if (keep_truth) obs.ground_truth = truth;
  return obs;
}

Observation make_synthetic(const SyntheticSpec& spec, RandomSource& rng) {
  if (spec.n1 < 1 || spec.n2 < 1 || spec.rank < 1) throw InvalidInput("make_synthetic: bad sizes");
  const Mat L = rng.normal_matrix(spec.n1, spec.rank);
  const Mat R = rng.normal_matrix(spec.n2, spec.rank);
  const Mat M = L * R.transpose();
  SamplingModel model{spec.n1, spec.n2, spec.scheme, spec.sr};
  auto omega = sample_indices(model, rng);
  return observe(M, std::move(omega), spec.noise, spec.outlier_fraction, rng);
}

// --- factorization model --------------------------------------------------------

Vec pack_factors(const Mat& U, const Mat& V) {
  if (U.cols() != V.cols()) throw InvalidInput("pack_factors: rank mismatch");
  const Index r = U.cols();
  Vec x((U.rows() + V.rows()) * r);
  Eigen::Map<RowMajorMat>(x.data(), U.rows(), r) = U;
  Eigen::Map<RowMajorMat>(x.data() + U.rows() * r, V.rows(), r) = V;
  return x;
}

Mat factors_product(const Vec& x, const FactorView& view) {
  if (x.size() != view.dim()) throw InvalidInput("factors_product: dimension mismatch");
  return view.U(x) * view.V(x).transpose();
}

namespace {

std::vector<Index> nonzero_columns(const Eigen::Map<const RowMajorMat>& m) {
  std::vector<Index> cols;
  for (Index c = 0; c < m.cols(); ++c) {
    if (m.col(c).squaredNorm() > 0) cols.push_back(c);
  }
  return cols;
}

RowMajorMat gather(const Eigen::Map<const RowMajorMat>& m, const std::vector<Index>& cols) {
  RowMajorMat out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = m.col(cols[c]);
  return out;
}

void check_omega(const std::vector<Entry>& omega, const FactorView& view) {
  for (const auto& e : omega) {
    if (e.i < 0 || e.i >= view.n1 || e.j < 0 || e.j >= view.n2) {
      throw InvalidInput("sampling index out of range");
    }
  }
}

}  // namespace

FactorJacobian::FactorJacobian(const FactorView& view, EntryList omega, const Vec& x)
    : view_(view), omega_(std::move(omega)) {
  if (x.size() != view_.dim()) throw InvalidInput("FactorJacobian: dimension mismatch");
  const auto U = view_.U(x);
  const auto V = view_.V(x);
  active_u_ = nonzero_columns(U);
  active_v_ = nonzero_columns(V);
  Uc_ = gather(U, active_u_);
  Vc_ = gather(V, active_v_);
}

void FactorJacobian::apply_into(const Eigen::Ref<const Vec>& hk, Eigen::Ref<Vec> out) const {
  const Eigen::Map<const RowMajorMat> H(hk.data(), view_.n1, view_.r);
  const Eigen::Map<const RowMajorMat> K(hk.data() + view_.n1 * view_.r, view_.n2, view_.r);
  const Index qv = static_cast<Index>(active_v_.size());
  const Index qu = static_cast<Index>(active_u_.size());
  const Index q = qv + qu;
  if (q == 0) {
    out.setZero();
    return;
  }
  // out_t = [H_v U_u](i_t) . [V_v K_u](j_t)
  RowMajorMat P(view_.n1, q), Q(view_.n2, q);
  for (Index c = 0; c < qv; ++c) {
    P.col(c) = H.col(active_v_[static_cast<std::size_t>(c)]);
    Q.col(c) = Vc_.col(c);
  }
  for (Index c = 0; c < qu; ++c) {
    P.col(qv + c) = Uc_.col(c);
    Q.col(qv + c) = K.col(active_u_[static_cast<std::size_t>(c)]);
  }
  const auto& om = *omega_;
  if (use_dense(q)) {
    const RowMajorMat D = P * Q.transpose();
    for (std::size_t t = 0; t < om.size(); ++t) out[static_cast<Index>(t)] = D(om[t].i, om[t].j);
    return;
  }
  const double* pp = P.data();
  const double* qp = Q.data();
  const Index m = static_cast<Index>(om.size());
  for (Index t = 0; t < m; ++t) {
    const Entry& e = om[static_cast<std::size_t>(t)];
    out[t] = Eigen::Map<const Vec>(pp + e.i * q, q).dot(Eigen::Map<const Vec>(qp + e.j * q, q));
  }
}

void FactorJacobian::apply_adjoint_into(const Eigen::Ref<const Vec>& w,
                                        Eigen::Ref<Vec> out) const {
  const auto& om = *omega_;
  const Index m = static_cast<Index>(om.size());
  const Index qv = static_cast<Index>(active_v_.size());
  const Index qu = static_cast<Index>(active_u_.size());
  RowMajorMat SV, StU;
  if (use_dense(qu + qv)) {
    RowMajorMat S = RowMajorMat::Zero(view_.n1, view_.n2);
    for (Index t = 0; t < m; ++t) {
      const Entry& e = om[static_cast<std::size_t>(t)];
      S(e.i, e.j) += w[t];
    }
    SV.noalias() = S * Vc_;
    StU.noalias() = S.transpose() * Uc_;
  } else {
    SV = RowMajorMat::Zero(view_.n1, qv);
    StU = RowMajorMat::Zero(view_.n2, qu);
    accumulate_adjoint(w, SV, StU);
  }
  out.setZero();
  Eigen::Map<RowMajorMat> H(out.data(), view_.n1, view_.r);
  Eigen::Map<RowMajorMat> K(out.data() + view_.n1 * view_.r, view_.n2, view_.r);
  for (Index c = 0; c < qv; ++c) H.col(active_v_[static_cast<std::size_t>(c)]) = SV.col(c);
  for (Index c = 0; c < qu; ++c) K.col(active_u_[static_cast<std::size_t>(c)]) = StU.col(c);
}

bool FactorJacobian::use_dense(Index q) const {
  // Dense products win on large, densely sampled grids with many active columns.
  const double cells = static_cast<double>(view_.n1) * static_cast<double>(view_.n2);
  return q >= 32 && cells >= 4e5 && static_cast<double>(omega_->size()) >= 0.05 * cells;
}

void FactorJacobian::accumulate_adjoint(const Eigen::Ref<const Vec>& w, RowMajorMat& SV,
                                        RowMajorMat& StU) const {
  const auto& om = *omega_;
  const Index m = static_cast<Index>(om.size());
  const Index qv = SV.cols();
  const Index qu = StU.cols();
  double* sv = SV.data();
  double* su = StU.data();
  const double* vc = Vc_.data();
  const double* uc = Uc_.data();
  for (Index t = 0; t < m; ++t) {
    const Entry& e = om[static_cast<std::size_t>(t)];
    const double wt = w[t];
    double* a = sv + e.i * qv;
    const double* b = vc + e.j * qv;
    for (Index c = 0; c < qv; ++c) a[c] += wt * b[c];
    double* a2 = su + e.j * qu;
    const double* b2 = uc + e.i * qu;
    for (Index c = 0; c < qu; ++c) a2[c] += wt * b2[c];
  }
}

FactorResidualMap::FactorResidualMap(const FactorView& view, EntryList omega, Vec b)
    : view_(view), omega_(std::move(omega)), b_(std::move(b)) {
  if (static_cast<Index>(omega_->size()) != b_.size()) {
    throw InvalidInput("FactorResidualMap: |omega| must equal the observation count");
  }
  check_omega(*omega_, view_);
}

Vec FactorResidualMap::eval(const Vec& x) const {
  if (x.size() != view_.dim()) throw InvalidInput("FactorResidualMap: dimension mismatch");
  const auto U = view_.U(x);
  const auto V = view_.V(x);
  std::vector<Index> both;
  for (Index c = 0; c < view_.r; ++c) {
    if (U.col(c).squaredNorm() > 0 && V.col(c).squaredNorm() > 0) both.push_back(c);
  }
  const RowMajorMat Uc = gather(U, both);
  const RowMajorMat Vc = gather(V, both);
  const auto& om = *omega_;
  Vec out(b_.size());
  for (Index t = 0; t < b_.size(); ++t) {
    const Entry& e = om[static_cast<std::size_t>(t)];
    out[t] = (both.empty() ? 0.0 : Uc.row(e.i).dot(Vc.row(e.j))) - b_[t];
  }
  return out;
}

LinearMapPtr FactorResidualMap::jacobian_at(const Vec& x) const {
  return std::make_shared<FactorJacobian>(view_, omega_, x);
}

Index default_rank(Index n1, Index n2) {
  return std::max<Index>(1, std::min<Index>(100, std::min(n1, n2) / 2));
}

MatcompInstance build_instance(Index n1, Index n2, Index r, const Observation& obs,
                               const ScadConfig& cfg) {
  cfg.validate();
  if (n1 < 1 || n2 < 1 || r < 1) throw InvalidInput("build_instance: sizes must be positive");
  if (obs.n1 != n1 || obs.n2 != n2) throw InvalidInput("build_instance: observation size mismatch");
  if (static_cast<Index>(obs.omega.size()) != obs.b.size()) {
    throw InvalidInput("build_instance: |omega| must equal the observation count");
  }
  if (obs.b.size() == 0) throw InvalidInput("build_instance: no observations");
  MatcompInstance inst;
  inst.view = FactorView{n1, n2, r};
  inst.lambda = cfg.c_lambda * obs.b.norm();
  if (!(inst.lambda > 0)) throw InvalidInput("build_instance: lambda must be positive (b = 0?)");
  auto omega = std::make_shared<const std::vector<Entry>>(obs.omega);
  auto F = std::make_shared<FactorResidualMap>(inst.view, omega, obs.b);
  const Index m = obs.b.size();
  inst.problem.theta1 = l1_atom(m);
  inst.problem.theta2 = std::make_shared<ScadLoss>(m, cfg.a, cfg.rho);
  inst.problem.F = F;
  inst.problem.G = F;
  inst.problem.h = separable_sum({std::make_shared<ColumnGroupL21Atom>(n1, r, inst.lambda),
                                  std::make_shared<ColumnGroupL21Atom>(n2, r, inst.lambda)});
  inst.problem.step_scale = 1.0 + obs.b.norm();
  inst.problem.name = "matcomp";
  inst.problem.validate();
  return inst;
}

IlpaConfig matcomp_ilpa_config(Index n1, Index n2) {
  IlpaConfig cfg;
  cfg.rho = 2.0;
  cfg.gamma_min = std::max(10.0, static_cast<double>(std::max(n1, n2)) / 100.0);
  cfg.gamma_max = 1e6;
  cfg.gamma0 = cfg.gamma_min;
  cfg.stop = StopRule{5e-6, 5e-4, 10, 2000, 9};
  cfg.op_norm_iters = 5;
  // A proximal term kept away from zero keeps the Newton systems well conditioned;
  // it is released only when the proximal iterations stall.
  cfg.ppa.tau_decay = 0.3;
  cfg.ppa.tau_plateau = 1e-2;
  cfg.ppa.plateau_iters = 50;
  cfg.ppa.max_iters = 500;
  return cfg;
}

SubgmConfig matcomp_subgm_config() { return SubgmConfig{}; }

Mat zero_filled(const Observation& obs) {
  Mat M = Mat::Zero(obs.n1, obs.n2);
  for (std::size_t t = 0; t < obs.omega.size(); ++t) {
    M(obs.omega[t].i, obs.omega[t].j) = obs.b[static_cast<Index>(t)];
  }
  return M;
}

namespace {

Mat orthonormal_basis(const Mat& Y) {
  Eigen::HouseholderQR<Mat> qr(Y);
  return qr.householderQ() * Mat::Identity(Y.rows(), Y.cols());
}

struct Triplets {
  Mat U;
  Vec s;
  Mat V;
};

Triplets top_singular(const Mat& M, Index r, RandomSource& rng) {
  const Index n1 = M.rows(), n2 = M.cols();
  const Index k = std::min({r, n1, n2});
  const Index l = std::min<Index>(k + 10, std::min(n1, n2));
  Triplets out;
  if (std::min(n1, n2) <= 2 * l) {
    Eigen::BDCSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = svd.matrixU().leftCols(k);
    out.s = svd.singularValues().head(k);
    out.V = svd.matrixV().leftCols(k);
    return out;
  }
  Mat Q = orthonormal_basis(M * rng.normal_matrix(n2, l));
  for (int pass = 0; pass < 2; ++pass) {
    const Mat Z = orthonormal_basis(M.transpose() * Q);
    Q = orthonormal_basis(M * Z);
  }
  const Mat B = Q.transpose() * M;
  Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.U = Q * svd.matrixU().leftCols(k);
  out.s = svd.singularValues().head(k);
  out.V = svd.matrixV().leftCols(k);
  return out;
}

}  // namespace

Vec svd_init(const Mat& M, Index r, RandomSource& rng) {
  if (r < 1 || r > std::min(M.rows(), M.cols())) throw InvalidInput("svd_init: invalid rank");
  const Triplets t = top_singular(M, r, rng);
  const Vec root = t.s.cwiseSqrt();
  return pack_factors(t.U * root.asDiagonal(), t.V * root.asDiagonal());
}

Vec svd_init_singular_values(const Mat& M, Index r, RandomSource& rng) {
  if (r < 1 || r > std::min(M.rows(), M.cols())) throw InvalidInput("svd_init: invalid rank");
  return top_singular(M, r, rng).s;
}

// --- metrics ------------------------------------------------------------------

double metric_re(const Vec& x, const FactorView& view, const Mat& truth) {
  const double denom = truth.norm();
  if (!(denom > 0)) throw UndefinedMetric("metric_re: ground truth is zero");
  return (factors_product(x, view) - truth).norm() / denom;
}

double metric_nmae(const Vec& x, const FactorView& view, const std::vector<Triplet>& holdout,
                   double r_min, double r_max) {
  if (holdout.empty()) throw UndefinedMetric("metric_nmae: empty holdout set");
  if (!(r_max > r_min)) throw InvalidInput("metric_nmae: need r_max > r_min");
  const auto U = view.U(x);
  const auto V = view.V(x);
  double s = 0;
  for (const auto& t : holdout) {
    if (t.user < 0 || t.user >= view.n1 || t.item < 0 || t.item >= view.n2) {
      throw InvalidInput("metric_nmae: holdout index out of range");
    }
    s += std::abs(U.row(t.user).dot(V.row(t.item)) - t.rating);
  }
  return s / (static_cast<double>(holdout.size()) * (r_max - r_min));
}

int report_rank(const Vec& x, const FactorView& view) {
  const auto U = view.U(x);
  const auto V = view.V(x);
  Vec prod(view.r);
  for (Index c = 0; c < view.r; ++c) prod[c] = U.col(c).norm() * V.col(c).norm();
  const double mx = prod.size() ? prod.maxCoeff() : 0.0;
  if (!(mx > 0)) return 0;
  return static_cast<int>((prod.array() > 1e-8 * mx).count());
}

// --- triplets -----------------------------------------------------------------

std::vector<Triplet> read_triplets(std::istream& in) {
  std::vector<Triplet> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    long long user = 0, item = 0;
    double rating = 0;
    std::string extra;
    if (!(ss >> user >> item >> rating)) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 'user item rating'", lineno);
    }
    if (ss >> extra) {
      throw ParseError("line " + std::to_string(lineno) + ": unexpected trailing field '" + extra + "'",
                       lineno);
    }
    if (user < 1 || item < 1) {
      throw ParseError("line " + std::to_string(lineno) + ": indices are 1-based", lineno);
    }
    if (!std::isfinite(rating)) {
      throw ParseError("line " + std::to_string(lineno) + ": rating is not finite", lineno);
    }
    out.push_back(Triplet{static_cast<Index>(user - 1), static_cast<Index>(item - 1), rating});
  }
  return out;
}

std::vector<Triplet> read_triplets_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open triplet file '" + path + "'");
  return read_triplets(in);
}

CompletionSplit split_known(const std::vector<Triplet>& known, SamplingScheme scheme, double sr,
                            RandomSource& rng) {
  if (known.empty()) throw InvalidInput("split_known: no ratings");
  if (!(sr > 0 && sr <= 1)) throw InvalidInput("split_known: sr must lie in (0,1]");
  CompletionSplit split;
  for (const auto& t : known) {
    split.n1 = std::max(split.n1, t.user + 1);
    split.n2 = std::max(split.n2, t.item + 1);
  }
  const Vec pr = band_marginals(split.n1, scheme);
  const Vec pc = band_marginals(split.n2, scheme);
  Vec w(static_cast<Index>(known.size()));
  for (std::size_t e = 0; e < known.size(); ++e) {
    w[static_cast<Index>(e)] = pr[known[e].user] * pc[known[e].item];
  }
  const auto cdf = cumulative(w);
  const auto m = static_cast<Index>(std::llround(sr * static_cast<double>(known.size())));
  std::vector<char> drawn(known.size(), 0);
  split.obs.n1 = split.n1;
  split.obs.n2 = split.n2;
  split.obs.outlier_fraction = 0;
  split.obs.b.resize(std::max<Index>(m, 0));
  for (Index t = 0; t < m; ++t) {
    const Index e = draw(cdf, rng);
    drawn[static_cast<std::size_t>(e)] = 1;
    const Triplet& tr = known[static_cast<std::size_t>(e)];
    split.obs.omega.push_back(Entry{tr.user, tr.item});
    split.obs.b[t] = tr.rating;
  }
  for (std::size_t e = 0; e < known.size(); ++e) {
    if (!drawn[e]) split.holdout.push_back(known[e]);
  }
  return split;
}

// --- runs ---------------------------------------------------------------------

SolverKind parse_solver(const std::string& s) {
  if (s == "ilpa") return SolverKind::Ilpa;
  if (s == "subgm") return SolverKind::Subgm;
  throw InvalidInput("unknown solver '" + s + "' (expected ilpa or subgm)");
}

std::string to_string(SolverKind s) { return s == SolverKind::Ilpa ? "ilpa" : "subgm"; }

MatcompRun solve_observation(const Observation& obs, const MatcompRunOptions& opt,
                             std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const Index r = opt.rank > 0 ? opt.rank : default_rank(obs.n1, obs.n2);
  const MatcompInstance inst = build_instance(obs.n1, obs.n2, r, obs, opt.scad);
  RandomSource init_rng = RandomSource(seed).derive(1);
  const Vec x0 = svd_init(zero_filled(obs), r, init_rng);
  MatcompRun out;
  out.view = inst.view;
  out.lambda = inst.lambda;
  if (opt.solver == SolverKind::Ilpa) {
    IlpaConfig cfg = matcomp_ilpa_config(obs.n1, obs.n2);
    cfg.mode = opt.mode;
    cfg.seed = seed;
    if (opt.tweak_ilpa) opt.tweak_ilpa(cfg);
    out.run = ilpa_run(inst.problem, cfg, x0);
  } else {
    SubgmConfig cfg = matcomp_subgm_config();
    if (opt.tweak_subgm) opt.tweak_subgm(cfg);
    out.run = subgm_run(inst.problem, cfg, x0);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.rank = report_rank(out.run.x, inst.view);
  if (obs.ground_truth) out.re = metric_re(out.run.x, inst.view, *obs.ground_truth);
  return out;
}

MatcompRun run_synthetic(const SyntheticSpec& spec, const MatcompRunOptions& opt,
                         std::uint64_t seed) {
  RandomSource data_rng = RandomSource(seed).derive(0);
  const Observation obs = make_synthetic(spec, data_rng);
  return solve_observation(obs, opt, seed);
}

MatcompRun run_completion(const std::vector<Triplet>& known, const CompletionOptions& copt,
                          const MatcompRunOptions& opt, std::uint64_t seed) {
  std::vector<Triplet> shifted = known;
  for (auto& t : shifted) t.rating -= copt.shift;
  RandomSource split_rng = RandomSource(seed).derive(0);
  const CompletionSplit split = split_known(shifted, copt.scheme, copt.sr, split_rng);
  if (split.holdout.empty()) throw UndefinedMetric("run_completion: every rating was sampled; holdout is empty");
  MatcompRun out = solve_observation(split.obs, opt, seed);
  out.nmae = metric_nmae(out.run.x, out.view, split.holdout, copt.r_min, copt.r_max);
  return out;
}

}  // namespace dcopt
