#ifndef DCOPT_MATCOMP_HPP
#define DCOPT_MATCOMP_HPP

#include <cstdint>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dcopt/ilpa.hpp"
#include "dcopt/numerics.hpp"
#include "dcopt/problem.hpp"
#include "dcopt/subgm.hpp"

namespace dcopt {

using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ---------------------------------------------------------------------------
// SCAD loss
// ---------------------------------------------------------------------------

struct ScadConfig {
  double a = 4.0;
  double rho = 0.01;
  double c_lambda = 0.06;

  void validate() const;
};

// 0 for s <= 2/(a+1); ((a+1)s - 2)^2 / (4(a^2-1)) up to 2a/(a+1); s - 1 beyond.
double scad_theta(double s, double a);

// Componentwise sign(z) clip(((a+1) rho |z| - 2) / (2(a-1)), 0, 1).
Vec vartheta2_grad(const Vec& z, const ScadConfig& cfg);

// z -> (1/rho) sum theta_a(rho |z_i|). Continuously differentiable.
class ScadLoss final : public ConvexFunction {
 public:
  ScadLoss(Index m, double a, double rho);
  Index dim() const override { return m_; }
  double value(const Eigen::Ref<const Vec>& z) const override;
  void subgrad_select_into(const Eigen::Ref<const Vec>& z, Eigen::Ref<Vec> out) const override;
  bool smooth() const override { return true; }

 private:
  Index m_;
  double a_, rho_;
};

// ---------------------------------------------------------------------------
// Sampling and observations
// ---------------------------------------------------------------------------

enum class SamplingScheme { S1, S2 };
SamplingScheme parse_scheme(const std::string& s);
std::string to_string(SamplingScheme s);

// Band probabilities over 1-based k: weight w1 for k <= n/10, w2 for
// n/10 < k <= n/5, 1 otherwise, normalized to sum 1. S1 uses (2, 4), S2 (3, 9).
Vec band_marginals(Index n, SamplingScheme scheme);

struct Entry {
  Index i = 0;
  Index j = 0;
  bool operator==(const Entry& o) const { return i == o.i && j == o.j; }
};

struct SamplingModel {
  Index n1 = 0;
  Index n2 = 0;
  SamplingScheme scheme = SamplingScheme::S1;
  double sr = 0.25;

  Index m() const;
};

// m i.i.d. draws (with replacement) from pi_kl = p_k p_l.
std::vector<Entry> sample_indices(const SamplingModel& model, RandomSource& rng);

struct Observation {
  Index n1 = 0;
  Index n2 = 0;
  std::vector<Entry> omega;
  Vec b;
  std::optional<Mat> ground_truth;
  NoiseKind noise_kind = NoiseKind::V;
  double outlier_fraction = 0.3;
};

// b_t = M(i_t, j_t) + w_t with w supported on floor(fraction m) positions
// chosen uniformly without replacement.
Observation observe(const Mat& truth, std::vector<Entry> omega, NoiseKind noise,
                    double outlier_fraction, RandomSource& rng, bool keep_truth = true);

struct SyntheticSpec {
  Index n1 = 1000;
  Index n2 = 1000;
  Index rank = 10;
  double sr = 0.25;
  SamplingScheme scheme = SamplingScheme::S1;
  NoiseKind noise = NoiseKind::V;
  double outlier_fraction = 0.3;
};

// M* = M_L M_R^T with standard normal factors, then sampling and noise.
Observation make_synthetic(const SyntheticSpec& spec, RandomSource& rng);

// ---------------------------------------------------------------------------
// Factorization model
// ---------------------------------------------------------------------------

// x stacks U (n1 x r) and V (n2 x r), each row-major.
struct FactorView {
  Index n1, n2, r;
  Eigen::Map<const RowMajorMat> U(const Vec& x) const {
    return Eigen::Map<const RowMajorMat>(x.data(), n1, r);
  }
  Eigen::Map<const RowMajorMat> V(const Vec& x) const {
    return Eigen::Map<const RowMajorMat>(x.data() + n1 * r, n2, r);
  }
  Index dim() const { return (n1 + n2) * r; }
};

Vec pack_factors(const Mat& U, const Mat& V);
Mat factors_product(const Vec& x, const FactorView& view);

// Index set with shared ownership so maps and Jacobians can reference it.
using EntryList = std::shared_ptr<const std::vector<Entry>>;

// (H, K) -> A(H V^T + U K^T) at a fixed (U, V). Only columns where U or V is
// nonzero contribute, so the cost scales with the active rank.
class FactorJacobian final : public LinearMap {
 public:
  FactorJacobian(const FactorView& view, EntryList omega, const Vec& x);
  Index in_dim() const override { return view_.dim(); }
  Index out_dim() const override { return static_cast<Index>(omega_->size()); }
  void apply_into(const Eigen::Ref<const Vec>& hk, Eigen::Ref<Vec> out) const override;
  void apply_adjoint_into(const Eigen::Ref<const Vec>& w, Eigen::Ref<Vec> out) const override;

 private:
  bool use_dense(Index q) const;
  void accumulate_adjoint(const Eigen::Ref<const Vec>& w, RowMajorMat& SV, RowMajorMat& StU) const;

  FactorView view_;
  EntryList omega_;
  std::vector<Index> active_u_, active_v_;
  RowMajorMat Uc_, Vc_;  // compacted active columns
};

// F(x) = A(U V^T) - b.
class FactorResidualMap final : public SmoothMap {
 public:
  FactorResidualMap(const FactorView& view, EntryList omega, Vec b);
  Index in_dim() const override { return view_.dim(); }
  Index out_dim() const override { return b_.size(); }
  Vec eval(const Vec& x) const override;
  LinearMapPtr jacobian_at(const Vec& x) const override;

 private:
  FactorView view_;
  EntryList omega_;
  Vec b_;
};

struct MatcompInstance {
  ProblemInstance problem;
  FactorView view;
  double lambda = 0;
};

// Default rank min(100, floor(min(n1, n2) / 2)).
Index default_rank(Index n1, Index n2);

// ||A(U V^T) - b||_1 - theta2(A(U V^T) - b) + lambda (||U||_{2,1} + ||V||_{2,1}).
MatcompInstance build_instance(Index n1, Index n2, Index r, const Observation& obs,
                               const ScadConfig& cfg);

IlpaConfig matcomp_ilpa_config(Index n1, Index n2);
SubgmConfig matcomp_subgm_config();

// Zero-filled observation matrix (duplicates: last write wins).
Mat zero_filled(const Observation& obs);

// (U1 S^{1/2}, V1 S^{1/2}) from the top r singular triplets of M, using
// randomized subspace iteration (2 power passes, oversampling 10); small
// matrices use a dense SVD.
Vec svd_init(const Mat& M, Index r, RandomSource& rng);

// Top singular values as computed by the same routine, for diagnostics.
Vec svd_init_singular_values(const Mat& M, Index r, RandomSource& rng);

double metric_re(const Vec& x, const FactorView& view, const Mat& truth);

struct Triplet {
  Index user = 0;  // 0-based
  Index item = 0;  // 0-based
  double rating = 0;
};

double metric_nmae(const Vec& x, const FactorView& view, const std::vector<Triplet>& holdout,
                   double r_min, double r_max);
int report_rank(const Vec& x, const FactorView& view);

// "user item rating" per line, 1-based, whitespace or comma separated;
// blank lines and '#' comments are skipped.
std::vector<Triplet> read_triplets(std::istream& in);
std::vector<Triplet> read_triplets_file(const std::string& path);

struct CompletionSplit {
  Index n1 = 0;
  Index n2 = 0;
  Observation obs;
  std::vector<Triplet> holdout;
};

// Draws round(sr * |known|) entries with replacement from the known ratings,
// weighted by the scheme's band marginals; known entries never drawn form the
// holdout set.
CompletionSplit split_known(const std::vector<Triplet>& known, SamplingScheme scheme, double sr,
                            RandomSource& rng);

// ---------------------------------------------------------------------------
// End-to-end runs
// ---------------------------------------------------------------------------

enum class SolverKind { Ilpa, Subgm };
SolverKind parse_solver(const std::string& s);
std::string to_string(SolverKind s);

struct MatcompRunOptions {
  SolverKind solver = SolverKind::Ilpa;
  InexactMode mode = InexactMode::Paper;
  ScadConfig scad;
  Index rank = 0;  // 0 selects default_rank
  // Optional hooks applied to the solver configuration.
  std::function<void(IlpaConfig&)> tweak_ilpa;
  std::function<void(SubgmConfig&)> tweak_subgm;
};

struct MatcompRun {
  RunResult run;
  FactorView view{0, 0, 0};
  double lambda = 0;
  double seconds = 0;  // initialization plus solve
  int rank = 0;
  std::optional<double> re;
  std::optional<double> nmae;
};

// Builds the instance, starts from svd_init (stream 1 of `seed`) and runs the
// chosen solver. RE is filled when the observation carries the ground truth.
MatcompRun solve_observation(const Observation& obs, const MatcompRunOptions& opt,
                             std::uint64_t seed);

// make_synthetic from stream 0 of `seed`, then solve_observation.
MatcompRun run_synthetic(const SyntheticSpec& spec, const MatcompRunOptions& opt,
                         std::uint64_t seed);

struct CompletionOptions {
  SamplingScheme scheme = SamplingScheme::S1;
  double sr = 0.25;
  double r_min = 1;
  double r_max = 5;
  double shift = 0;  // subtracted from every rating before the split
};

// split_known on the shifted ratings (stream 0 of `seed`), solve, NMAE over
// the holdout.
MatcompRun run_completion(const std::vector<Triplet>& known, const CompletionOptions& copt,
                          const MatcompRunOptions& opt, std::uint64_t seed);

}  // namespace dcopt

#endif  // DCOPT_MATCOMP_HPP
