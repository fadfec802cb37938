#include <gtest/gtest.h>

#include "dcopt/subgm.hpp"

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

SubgmConfig capped(int k_max) {
  SubgmConfig cfg;
  cfg.stop.k_max = k_max;
  cfg.stop.eps1 = 0;
  cfg.stop.eps2 = 0;
  return cfg;
}

}  // namespace

TEST(Subgm, AbsoluteValueContractsGeometrically) {
  const auto run = subgm_run(l1_problem(1), capped(10), Vec::Ones(1));
  ASSERT_EQ(run.trace.size(), 11u);
  for (int k = 0; k <= 10; ++k) {
    EXPECT_NEAR(run.trace[static_cast<std::size_t>(k)].phi, std::pow(0.95, k), 1e-15);
  }
  EXPECT_EQ(run.status, RunStatus::IterCap);
}

TEST(Subgm, MatchesHandWrittenPolyakIteration) {
  const Vec x0 = (Vec(4) << 1.0, -0.3, 2.0, -0.01).finished();
  Vec x = x0;
  for (int k = 0; k < 10; ++k) {
    const Vec g = x.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
    x -= 0.05 * x.lpNorm<1>() / g.squaredNorm() * g;
  }
  const auto run = subgm_run(l1_problem(4), capped(10), x0);
  EXPECT_LE((run.x - x).norm(), 1e-14);
  EXPECT_NEAR(run.final_phi(), x.lpNorm<1>(), 1e-14);
}

TEST(Subgm, SubgradientAssembly) {
  // Phi(x) = ||x||_1 - ||2x||_1 with h = <c, x>.
  ProblemInstance p = l1_problem(2);
  p.theta2 = l1_atom(2);
  p.G = affine_map(2 * Mat::Identity(2, 2), Vec::Zero(2));
  const Vec c = Eigen::Vector2d(0.5, -1);
  p.h = linear_atom(c);
  const Vec x = Eigen::Vector2d(1, -2);
  const Vec g = phi_subgradient(p, linearize_at(p, x));
  EXPECT_LE((g - (Vec(Eigen::Vector2d(1, -1)) - 2 * Vec(Eigen::Vector2d(1, -1)) + c)).norm(), 1e-15);
}

TEST(Subgm, StopsOnZeroSubgradient) {
  ProblemInstance p = l1_problem(1);
  p.theta1 = zero_atom(1);
  const auto run = subgm_run(p, capped(10), Vec::Ones(1));
  EXPECT_EQ(run.status, RunStatus::StepTol);
  EXPECT_EQ(run.iters(), 0);
}

TEST(Subgm, ConfigValidation) {
  SubgmConfig cfg;
  cfg.step_fraction = 0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
}
