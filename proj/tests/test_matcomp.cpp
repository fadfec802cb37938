#include <gtest/gtest.h>

#include <sstream>

#include "dcopt/diagnostics.hpp"
#include "dcopt/matcomp.hpp"

using namespace dcopt;

TEST(Scad, BreakpointValues) {
  EXPECT_DOUBLE_EQ(scad_theta(0.0, 4.0), 0.0);
  EXPECT_DOUBLE_EQ(scad_theta(0.4, 4.0), 0.0);
  EXPECT_NEAR(scad_theta(1.6, 4.0), 0.6, 1e-15);
  EXPECT_NEAR(scad_theta(2.0, 4.0), 1.0, 1e-15);
  // Continuity at both breakpoints.
  EXPECT_NEAR(scad_theta(0.4 + 1e-9, 4.0), 0.0, 1e-15);
  EXPECT_NEAR(scad_theta(1.6 + 1e-9, 4.0), scad_theta(1.6 - 1e-9, 4.0), 1e-8);
}

TEST(Scad, GradientRegions) {
  ScadConfig cfg;  // a = 4, rho = 0.01: kinks at |z| = 40 and 160
  const Vec z = (Vec(6) << 10, -39, 100, -100, 160, -1000).finished();
  const Vec g = vartheta2_grad(z, cfg);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[1], 0.0);
  EXPECT_NEAR(g[2], (5 * 0.01 * 100 - 2) / 6.0, 1e-15);
  EXPECT_NEAR(g[3], -g[2], 1e-15);
  EXPECT_NEAR(g[4], 1.0, 1e-15);
  EXPECT_EQ(g[5], -1.0);
}

TEST(Scad, LossBelowL1) {
  const ScadLoss loss(1, 4.0, 0.01);
  for (double z = -500; z <= 500; z += 0.5) {
    const Vec v = Vec::Constant(1, z);
    EXPECT_LE(loss.value(v), std::abs(z) + 1e-12);
    EXPECT_GE(loss.value(v), 0.0);
  }
}

TEST(Scad, LossGradientMatchesFiniteDifferences) {
  const auto r = check_theta2_grad(3);
  EXPECT_TRUE(r.passed) << r.detail;
  EXPECT_FALSE(check_theta2_grad(3, true).passed);
}

TEST(Sampling, BandMarginals) {
  const Vec p = band_marginals(10, SamplingScheme::S1);
  EXPECT_NEAR(p.sum(), 1.0, 1e-15);
  EXPECT_NEAR(p[0], 2.0 / 14, 1e-15);
  EXPECT_NEAR(p[1], 4.0 / 14, 1e-15);
  for (Index k = 2; k < 10; ++k) EXPECT_NEAR(p[k], 1.0 / 14, 1e-15);
  const Vec q = band_marginals(10, SamplingScheme::S2);
  EXPECT_NEAR(q[0] / q[5], 3.0, 1e-12);
  EXPECT_NEAR(q[1] / q[5], 9.0, 1e-12);
  EXPECT_THROW(band_marginals(0, SamplingScheme::S1), InvalidInput);
}

TEST(Sampling, EmpiricalMarginalsMatch) {
  SamplingModel model{20, 30, SamplingScheme::S2, 0.5};
  RandomSource rng(4);
  Vec rows = Vec::Zero(20), cols = Vec::Zero(30);
  const int reps = 200;
  Index total = 0;
  for (int t = 0; t < reps; ++t) {
    const auto omega = sample_indices(model, rng);
    EXPECT_EQ(static_cast<Index>(omega.size()), model.m());
    for (const auto& e : omega) rows[e.i] += 1, cols[e.j] += 1;
    total += static_cast<Index>(omega.size());
  }
  rows /= static_cast<double>(total);
  cols /= static_cast<double>(total);
  EXPECT_LE((rows - band_marginals(20, SamplingScheme::S2)).lpNorm<Eigen::Infinity>(), 0.005);
  EXPECT_LE((cols - band_marginals(30, SamplingScheme::S2)).lpNorm<Eigen::Infinity>(), 0.005);
}

TEST(Sampling, ObservationKeepsDuplicates) {
  const Mat truth = Mat::Constant(3, 3, 2.0);
  std::vector<Entry> omega{{0, 0}, {0, 0}, {2, 1}};
  RandomSource rng(1);
  const auto obs = observe(truth, omega, NoiseKind::V, 0.0, rng);
  EXPECT_EQ(obs.omega.size(), 3u);
  EXPECT_EQ(obs.b, Vec::Constant(3, 2.0));
  EXPECT_THROW(observe(truth, {{3, 0}}, NoiseKind::V, 0.0, rng), InvalidInput);
  EXPECT_THROW(observe(truth, omega, NoiseKind::V, 1.5, rng), InvalidInput);
}

TEST(Sampling, OutlierCount) {
  const Mat truth = Mat::Zero(10, 10);
  std::vector<Entry> omega;
  for (Index i = 0; i < 10; ++i) omega.push_back({i, i});
  RandomSource rng(2);
  const auto obs = observe(truth, omega, NoiseKind::I, 0.3, rng);
  EXPECT_EQ((obs.b.array() != 0).count(), 3);
}

TEST(SvdInit, RankOneExact) {
  RandomSource rng(5);
  const Vec a = rng.normal_vector(8), b = rng.normal_vector(6);
  const Mat M = a * b.transpose();
  const Vec x = svd_init(M, 1, rng);
  const FactorView view{8, 6, 1};
  EXPECT_LE((factors_product(x, view) - M).norm(), 1e-12 * M.norm());
}

TEST(SvdInit, SingularValuesMatchDenseSvd) {
  RandomSource rng(6);
  // Small enough for the dense path: exact for any spectrum.
  const Mat M = rng.normal_matrix(30, 20);
  const Eigen::JacobiSVD<Mat> svd(M);
  const Vec s = svd_init_singular_values(M, 5, rng);
  EXPECT_LE((s - svd.singularValues().head(5)).norm(), 1e-12 * svd.singularValues()[0]);
}

TEST(SvdInit, RandomizedPathOnDecayingSpectrum) {
  RandomSource rng(6);
  const Eigen::HouseholderQR<Mat> q1(rng.normal_matrix(50, 40)), q2(rng.normal_matrix(40, 40));
  Vec sigma(40);
  for (Index i = 0; i < 40; ++i) sigma[i] = std::pow(0.5, static_cast<double>(i));
  const Mat Q1 = q1.householderQ() * Mat::Identity(50, 40);
  const Mat Q2 = q2.householderQ() * Mat::Identity(40, 40);
  const Mat M = Q1 * sigma.asDiagonal() * Q2.transpose();
  const Vec s = svd_init_singular_values(M, 5, rng);
  EXPECT_LE((s - sigma.head(5)).norm(), 1e-8);
}

TEST(SvdInit, LargeMatrixUsesRandomizedPath) {
  RandomSource rng(7);
  const Mat L = rng.normal_matrix(400, 3), R = rng.normal_matrix(300, 3);
  const Mat M = L * R.transpose();
  const Vec x = svd_init(M, 3, rng);
  EXPECT_LE((factors_product(x, FactorView{400, 300, 3}) - M).norm(), 1e-9 * M.norm());
}

TEST(SvdInit, ZeroMatrixAndInvalidRank) {
  RandomSource rng(8);
  EXPECT_EQ(svd_init(Mat::Zero(5, 4), 2, rng).norm(), 0.0);
  EXPECT_THROW(svd_init(Mat::Zero(5, 4), 5, rng), InvalidInput);
}

TEST(Metrics, RelativeErrorAndNmae) {
  const Mat U = (Mat(2, 1) << 1, 2).finished();
  const Mat V = (Mat(3, 1) << 1, 0, -1).finished();
  const Vec x = pack_factors(U, V);
  const FactorView view{2, 3, 1};
  EXPECT_EQ(metric_re(x, view, U * V.transpose()), 0.0);
  const std::vector<Triplet> exact{{0, 0, 1}, {1, 2, -2}};
  EXPECT_EQ(metric_nmae(x, view, exact, 1, 5), 0.0);
  const std::vector<Triplet> off{{0, 0, 2}, {1, 1, 1}};
  EXPECT_DOUBLE_EQ(metric_nmae(x, view, off, 1, 5), 1.0 / 4);
  EXPECT_THROW(metric_nmae(x, view, {}, 1, 5), UndefinedMetric);
  EXPECT_THROW(metric_re(x, view, Mat::Zero(2, 3)), UndefinedMetric);
  EXPECT_EQ(report_rank(x, view), 1);
  EXPECT_EQ(report_rank(Vec::Zero(5), view), 0);
}

TEST(Triplets, ParseAndErrors) {
  std::istringstream ok("# header\n1 2 3.5\n\n2,1,4\n");
  const auto t = read_triplets(ok);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].user, 0);
  EXPECT_EQ(t[0].item, 1);
  EXPECT_EQ(t[0].rating, 3.5);
  EXPECT_EQ(t[1].user, 1);

  std::istringstream bad("1 1 3\n1 x 2\n");
  try {
    read_triplets(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  std::istringstream zero("0 1 3\n");
  EXPECT_THROW(read_triplets(zero), ParseError);
  std::istringstream extra("1 1 3 4\n");
  EXPECT_THROW(read_triplets(extra), ParseError);
  EXPECT_THROW(read_triplets_file("/nonexistent/ratings.txt"), IoError);
}

TEST(FactorMaps, AdjointsAndJacobians) {
  EXPECT_TRUE(check_adjoints(21).passed);
  EXPECT_TRUE(check_jacobians(22).passed);
}

TEST(FactorMaps, DensePathMatchesSparse) {
  // Many observations relative to n1 n2 exercise the dense product path.
  RandomSource rng(9);
  const FactorView view{6, 5, 2};
  std::vector<Entry> full;
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 5; ++j) full.push_back({i, j});
  full.push_back({0, 0});
  const Vec x = rng.normal_vector(view.dim());
  const FactorJacobian J(view, std::make_shared<const std::vector<Entry>>(full), x);
  const Vec hk = rng.normal_vector(view.dim());
  const Mat U = view.U(x), V = view.V(x), H = view.U(hk), K = view.V(hk);
  const Mat D = H * V.transpose() + U * K.transpose();
  const Vec out = J.apply(hk);
  for (std::size_t t = 0; t < full.size(); ++t) {
    EXPECT_NEAR(out[static_cast<Index>(t)], D(full[t].i, full[t].j), 1e-12);
  }
}

TEST(FactorMaps, ZeroFactorsGiveMinusB) {
  const Vec b = (Vec(2) << 1.5, -2).finished();
  const FactorResidualMap F(FactorView{3, 3, 2},
                            std::make_shared<const std::vector<Entry>>(std::vector<Entry>{{0, 1}, {2, 2}}),
                            b);
  EXPECT_EQ(F.eval(Vec::Zero(12)), -b);
}

TEST(Matcomp, DefaultRank) {
  EXPECT_EQ(default_rank(1000, 1000), 100);
  EXPECT_EQ(default_rank(60, 40), 20);
  EXPECT_EQ(default_rank(5, 4), 2);
}

TEST(Matcomp, NoiselessRecovery) {
  SyntheticSpec spec;
  spec.n1 = 60;
  spec.n2 = 50;
  spec.rank = 2;
  spec.sr = 0.5;
  spec.outlier_fraction = 0.0;
  MatcompRunOptions opt;
  opt.rank = 5;
  const auto res = run_synthetic(spec, opt, 3);
  ASSERT_TRUE(res.re.has_value());
  EXPECT_LE(*res.re, 1e-3);
  EXPECT_EQ(res.rank, 2);
}

TEST(Matcomp, ImprovesOnSpectralInitWithOutliers) {
  SyntheticSpec spec;
  spec.n1 = 80;
  spec.n2 = 60;
  spec.rank = 3;
  spec.sr = 0.4;
  MatcompRunOptions opt;
  opt.rank = 3;
  const auto res = run_synthetic(spec, opt, 4);
  RandomSource data = RandomSource(4).derive(0);
  const auto obs = make_synthetic(spec, data);
  RandomSource init = RandomSource(4).derive(1);
  const double re0 = metric_re(svd_init(zero_filled(obs), 3, init), res.view, *obs.ground_truth);
  EXPECT_LE(*res.re, 0.1);
  EXPECT_LT(*res.re, 0.5 * re0);
}

TEST(Matcomp, SmallRatingCompletion) {
  RandomSource rng(10);
  Vec u(30), v(20);
  for (auto& e : u) e = rng.uniform(0.0, 2.0);
  for (auto& e : v) e = rng.uniform(0.0, 2.0);
  std::vector<Triplet> known;
  for (Index i = 0; i < 30; ++i)
    for (Index j = 0; j < 20; ++j) known.push_back({i, j, 1.0 + u[i] * v[j]});
  CompletionOptions copt;
  copt.sr = 0.6;
  MatcompRunOptions opt;
  opt.rank = 3;
  const auto res = run_completion(known, copt, opt, 1);
  ASSERT_TRUE(res.nmae.has_value());
  EXPECT_LE(*res.nmae, 0.05);
}

TEST(Matcomp, Determinism) {
  SyntheticSpec spec;
  spec.n1 = 30;
  spec.n2 = 25;
  spec.rank = 2;
  MatcompRunOptions opt;
  const auto a = run_synthetic(spec, opt, 7), b = run_synthetic(spec, opt, 7);
  EXPECT_EQ(a.run.x, b.run.x);
  EXPECT_EQ(a.run.trace.size(), b.run.trace.size());
}

TEST(Matcomp, SolverNames) {
  EXPECT_EQ(parse_solver("subgm"), SolverKind::Subgm);
  EXPECT_EQ(to_string(SolverKind::Ilpa), "ilpa");
  EXPECT_THROW(parse_solver("admm"), InvalidInput);
  EXPECT_EQ(parse_scheme("S2"), SamplingScheme::S2);
  EXPECT_THROW(parse_scheme("S3"), InvalidInput);
}
