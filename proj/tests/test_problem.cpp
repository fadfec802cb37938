#include <gtest/gtest.h>

#include "dcopt/problem.hpp"

using namespace dcopt;

namespace {

// theta1 = ||.||_1 on F(x) = (x0^2, x0 x1), theta2 = ||.||_1 on G(x) = x, h = 0.
ProblemInstance toy() {
  ProblemInstance p;
  p.theta1 = l1_atom(2);
  p.theta2 = l1_atom(2);
  p.F = function_map(
      2, 2, [](const Vec& x) { return Vec(Eigen::Vector2d(x[0] * x[0], x[0] * x[1])); },
      [](const Vec& x) {
        Mat j(2, 2);
        j << 2 * x[0], 0, x[1], x[0];
        return j;
      });
  p.G = affine_map(Mat::Identity(2, 2), Vec::Zero(2));
  p.h = zero_atom(2);
  return p;
}

}  // namespace

TEST(Problem, ValidateRejectsMismatch) {
  ProblemInstance p = toy();
  EXPECT_NO_THROW(p.validate());
  p.theta1 = l1_atom(3);
  EXPECT_THROW(p.validate(), InvalidInput);
  p = toy();
  p.h.reset();
  EXPECT_THROW(p.validate(), InvalidInput);
  p = toy();
  p.step_scale = 0;
  EXPECT_THROW(p.validate(), InvalidInput);
}

TEST(Problem, PhiValue) {
  const ProblemInstance p = toy();
  const Vec x = Eigen::Vector2d(1, -2);
  // ||(1, -2)||_1 - ||(1, -2)||_1 = 0.
  EXPECT_DOUBLE_EQ(eval_phi(p, x), 0.0);
  EXPECT_DOUBLE_EQ(p.theta2->value(x), 3.0);
  const Vec y = Eigen::Vector2d(2, 1);
  EXPECT_DOUBLE_EQ(eval_phi(p, y), 4 + 2 - 3);
}

TEST(Problem, LinearizeAtBasePointIsExact) {
  const ProblemInstance p = toy();
  const Vec x = Eigen::Vector2d(0.3, -1.1);
  const auto lv = linearize(p, x, x);
  EXPECT_EQ(lv.ellF, p.F->eval(x));
  EXPECT_EQ(lv.ellG, x);
}

TEST(Problem, LinearizeIsExactForAffineMaps) {
  RandomSource rng(1);
  ProblemInstance p = toy();
  const Mat m = rng.normal_matrix(2, 2);
  const Vec c = rng.normal_vector(2);
  p.F = affine_map(m, c);
  const Vec x = rng.normal_vector(2), s = rng.normal_vector(2);
  EXPECT_LE((linearize(p, x, s).ellF - (m * s + c)).norm(), 1e-14);
}

TEST(Problem, LinearizationErrorIsSecondOrder) {
  const ProblemInstance p = toy();
  const Vec x = Eigen::Vector2d(0.5, 0.2);
  const Vec d = Eigen::Vector2d(1, -1);
  const double e1 = (linearize(p, x, x + 1e-2 * d).ellF - p.F->eval(x + 1e-2 * d)).norm();
  const double e2 = (linearize(p, x, x + 1e-3 * d).ellF - p.F->eval(x + 1e-3 * d)).norm();
  EXPECT_NEAR(e1 / e2, 100.0, 1e-6);
}

TEST(Problem, PotentialAtDiagonalEqualsPhi) {
  const ProblemInstance p = toy();
  RandomSource rng(2);
  for (int t = 0; t < 20; ++t) {
    const Vec x = rng.normal_vector(2);
    const Vec xi = select_xi(p, p.G->eval(x));
    const auto w = make_potential_point(p, x, x, xi, 5.0, 0.5);
    EXPECT_NEAR(xi_potential(p, w), eval_phi(p, x), 1e-13);
  }
}

TEST(Problem, PotentialBoundsPhiAtSecondArgument) {
  // Xi(x, s, xi) >= Phi(s) whenever the quadratic terms dominate the
  // linearization error; gamma = 100 is ample on this box.
  const ProblemInstance p = toy();
  RandomSource rng(3);
  for (int t = 0; t < 50; ++t) {
    const Vec x = rng.normal_vector(2);
    const Vec s = x + 0.1 * rng.normal_vector(2);
    const auto w = make_potential_point(p, x, s, select_xi(p, p.G->eval(x)), 100.0, 0.0);
    EXPECT_GE(xi_potential(p, w), eval_phi(p, s) - 1e-12);
  }
}

TEST(Problem, SelectXiKinkTolerance) {
  const ProblemInstance p = toy();
  const Vec g = Eigen::Vector2d(1e-12, -2);
  EXPECT_EQ(select_xi(p, g), Vec(Eigen::Vector2d(-1, 1)));
  // Within the band the entry is treated as zero; the l1 selection at 0 is +1.
  EXPECT_EQ(select_xi(p, Vec(Eigen::Vector2d(-1e-12, -2)), 1e-8), Vec(Eigen::Vector2d(-1, 1)));
  EXPECT_EQ(select_xi(p, Vec(Eigen::Vector2d(-1e-12, -2))), Vec(Eigen::Vector2d(1, 1)));
}

TEST(Problem, PotentialNeedsCache) {
  const ProblemInstance p = toy();
  PotentialPoint w;
  w.x = w.s = w.z = Vec::Zero(2);
  EXPECT_THROW(xi_potential(p, w), ContractViolation);
}

TEST(Problem, NonFiniteMapValueThrows) {
  ProblemInstance p = toy();
  p.F = function_map(
      2, 2, [](const Vec&) { return Vec::Constant(2, std::nan("")); },
      [](const Vec&) { return Mat::Zero(2, 2); });
  EXPECT_THROW(linearize_at(p, Vec::Zero(2)), InvalidEvaluation);
}

TEST(Problem, FunctionMapShapeChecks) {
  const auto bad = function_map(
      2, 3, [](const Vec& x) { return x; }, [](const Vec&) { return Mat::Zero(3, 2); });
  EXPECT_THROW(bad->eval(Vec::Zero(2)), InvalidInput);
  const auto badj = function_map(
      2, 2, [](const Vec& x) { return x; }, [](const Vec&) { return Mat::Zero(1, 2); });
  EXPECT_THROW(badj->jacobian_at(Vec::Zero(2)), InvalidInput);
}
