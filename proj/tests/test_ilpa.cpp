#include <gtest/gtest.h>

#include <sstream>

#include "dcopt/ilpa.hpp"

using namespace dcopt;

namespace {

ProblemInstance l1_problem(Index n) {
  ProblemInstance p;
  p.theta1 = l1_atom(n);
  p.theta2 = zero_atom(n);
  p.F = affine_map(Mat::Identity(n, n), Vec::Zero(n));
  p.G = p.F;
  p.h = zero_atom(n);
  return p;
}

IlpaConfig small_config() {
  IlpaConfig cfg;
  cfg.gamma_min = 1.0;
  cfg.stop.eps2 = 0;
  cfg.stop.eps1 = 1e-10;
  cfg.stop.k_max = 500;
  return cfg;
}

}  // namespace

TEST(AlphaSchedule, UpdatesOnPeriod) {
  EXPECT_NEAR(update_alpha(3, 0.5), 0.5 / 1.2, 1e-15);
  EXPECT_EQ(update_alpha(4, 0.5), 0.5);
  EXPECT_EQ(update_alpha(0, 0.5), 0.5);
  EXPECT_EQ(update_alpha(6, 1e-3), 1e-3);
  EXPECT_EQ(update_alpha(6, 1.1e-3), 1e-3);
}

TEST(StopRule, Oscillation) {
  StopRule r;
  r.kbar = 2;
  r.window = 2;
  r.eps2 = 1e-3;
  EXPECT_FALSE(oscillation_stop({5, 4}, r));
  EXPECT_TRUE(oscillation_stop({5, 3, 3, 3}, r));
  EXPECT_FALSE(oscillation_stop({5, 4, 3}, r));
  // Relative to max(1, phi): small values use the absolute difference.
  EXPECT_TRUE(oscillation_stop({0.0, 1e-4, 2e-4}, r));
  r.eps2 = 0;
  EXPECT_FALSE(oscillation_stop({3, 3, 3, 3}, r));
}

TEST(IlpaConfig, MaxInnerAndValidation) {
  IlpaConfig cfg;
  EXPECT_EQ(cfg.max_inner(), 17);  // ceil(log2(1e5))
  cfg.gamma0 = 1e6 / 4;
  EXPECT_EQ(cfg.max_inner(), 2);
  cfg = IlpaConfig{};
  cfg.rho = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = IlpaConfig{};
  cfg.mu = cfg.gamma_min / 2;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = IlpaConfig{};
  cfg.gamma0 = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = IlpaConfig{};
  cfg.kink_tol = -1;
  EXPECT_THROW(cfg.validate(), InvalidInput);
}

TEST(IlpaConfig, CertificateConstant) {
  IlpaConfig cfg;
  EXPECT_EQ(cfg.certificate_constant(), 5.0);
  cfg.mode = InexactMode::Theory;
  EXPECT_EQ(cfg.certificate_constant(), 10.0 / 16.0);
  EXPECT_EQ(parse_inexact_mode("theory"), InexactMode::Theory);
  EXPECT_THROW(parse_inexact_mode("exact"), InvalidInput);
}

TEST(Ilpa, L1NormConvergesToZero) {
  const auto p = l1_problem(3);
  for (auto mode : {InexactMode::Paper, InexactMode::Theory}) {
    auto cfg = small_config();
    cfg.mode = mode;
    const auto run = ilpa_run(p, cfg, Vec(Eigen::Vector3d(1, -2, 3)));
    EXPECT_EQ(run.status, RunStatus::StepTol) << run.message;
    EXPECT_LE(run.x.lpNorm<Eigen::Infinity>(), 1e-8);
    EXPECT_EQ(run.monotonicity_violations, 0);
  }
}

TEST(Ilpa, ConsistentL1SystemIsSolved) {
  RandomSource rng(5);
  const Mat A = rng.normal_matrix(5, 8);
  const Vec x_true = rng.normal_vector(8);
  ProblemInstance p = l1_problem(8);
  p.theta1 = l1_atom(5);
  p.F = affine_map(A, -A * x_true);
  p.G = affine_map(Mat::Identity(8, 8), Vec::Zero(8));
  auto cfg = small_config();
  cfg.stop.k_max = 2000;
  const auto run = ilpa_run(p, cfg, Vec::Zero(8));
  EXPECT_LE((A * run.x - A * x_true).lpNorm<1>(), 1e-6);
  for (std::size_t k = 1; k < run.trace.size(); ++k) {
    EXPECT_LE(run.trace[k].phi, run.trace[k - 1].phi + 1e-12);
  }
}

TEST(Ilpa, DcDifferenceOfNorms) {
  // ||x||_1 - ||x/2||_1 = ||x||_1 / 2.
  ProblemInstance p = l1_problem(4);
  p.theta2 = l1_atom(4);
  p.G = affine_map(0.5 * Mat::Identity(4, 4), Vec::Zero(4));
  const auto run = ilpa_run(p, small_config(), Vec::Constant(4, 2.0));
  EXPECT_LE(run.x.lpNorm<Eigen::Infinity>(), 1e-8);
  EXPECT_NEAR(run.final_phi(), 0.0, 1e-8);
}

TEST(Ilpa, TraceRecordsPotentialSandwich) {
  auto cfg = small_config();
  cfg.mode = InexactMode::Theory;
  const auto run = ilpa_run(l1_problem(3), cfg, Vec(Eigen::Vector3d(1, -2, 3)));
  ASSERT_GE(run.trace.size(), 3u);
  for (std::size_t k = 1; k < run.trace.size(); ++k) {
    EXPECT_LE(run.trace[k].phi, run.trace[k].xi + 1e-12);
    EXPECT_LE(run.trace[k].xi, run.trace[k - 1].phi + 1e-12);
  }
}

TEST(Ilpa, IterationCap) {
  auto cfg = small_config();
  cfg.stop.k_max = 2;
  const auto run = ilpa_run(l1_problem(3), cfg, Vec(Eigen::Vector3d(10, -20, 30)));
  EXPECT_EQ(run.status, RunStatus::IterCap);
  EXPECT_EQ(run.iters(), 2);
}

TEST(Ilpa, RejectsInvalidStart) {
  ProblemInstance p = l1_problem(2);
  p.h = box_atom(Vec::Zero(2), Vec::Ones(2));
  EXPECT_THROW(ilpa_run(p, small_config(), Vec::Constant(2, 5.0)), InvalidInput);
  EXPECT_THROW(ilpa_run(p, small_config(), Vec::Zero(3)), InvalidInput);
}

TEST(Ilpa, TraceCsvHeader) {
  std::vector<TraceRecord> trace(2);
  trace[1].k = 1;
  trace[1].phi = 0.25;
  std::ostringstream os;
  write_trace_csv(os, trace, 3);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# threads=3");
  std::getline(is, line);
  EXPECT_EQ(line, "k,phi,xi,gamma_k,j_k,step_norm,dual_gap,ppa_iters,newton_iters,cg_iters,wall_ms");
  std::getline(is, line);
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 7), "1,0.25,");
}
