#include <gtest/gtest.h>

#include "dcopt/diagnostics.hpp"
#include "dcopt/dppasn.hpp"

using namespace dcopt;

namespace {

struct Quadratic {
  DualSubproblem d;
  Mat A;
  Vec a;
};

// theta1 = <a, .> and h = 0, so q is a strongly convex quadratic.
Quadratic quadratic_instance(std::uint64_t seed, Index n, Index m) {
  RandomSource rng(seed);
  Quadratic out;
  out.A = rng.normal_matrix(m, n) / std::sqrt(static_cast<double>(n));
  out.a = rng.normal_vector(m);
  out.d = DualSubproblem::build(std::make_shared<DenseMap>(out.A), rng.normal_vector(m),
                                rng.normal_vector(n), rng.normal_vector(n), 2.0, 0.7, 0.0,
                                linear_atom(out.a), zero_atom(n));
  return out;
}

AcceptFn gap_below(double tol) {
  return [tol](const PpaCandidate& c) { return c.gap <= tol * (1 + std::abs(c.q)); };
}

}  // namespace

TEST(DualSubproblem, BuildRejectsBadInput) {
  const auto A = std::make_shared<DenseMap>(Mat::Identity(2, 3));
  EXPECT_THROW(DualSubproblem::build(A, Vec::Zero(3), Vec::Zero(3), Vec::Zero(3), 1, 1, 0,
                                     l1_atom(2), zero_atom(3)),
               InvalidInput);
  EXPECT_THROW(DualSubproblem::build(A, Vec::Zero(2), Vec::Zero(3), Vec::Zero(3), 0, 1, 0,
                                     l1_atom(2), zero_atom(3)),
               InvalidInput);
  EXPECT_THROW(DualSubproblem::build(nullptr, Vec::Zero(2), Vec::Zero(3), Vec::Zero(3), 1, 1, 0,
                                     l1_atom(2), zero_atom(3)),
               InvalidInput);
}

TEST(DualSubproblem, GradientMatchesFiniteDifferences) {
  const auto r = check_grad_psi(30, 101);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(DualSubproblem, WeakDuality) {
  const auto r = check_weak_duality(30, 102);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(DualSubproblem, RecoverWithZeroH) {
  RandomSource rng(7);
  const Mat A = rng.normal_matrix(4, 5);
  const Vec u = rng.normal_vector(5), xk = rng.normal_vector(5), zeta = rng.normal_vector(4);
  const auto d = DualSubproblem::build(std::make_shared<DenseMap>(A), rng.normal_vector(4), u, xk,
                                       3.0, 0.5, 0.0, l1_atom(4), zero_atom(5));
  const auto pp = recover_primal(d, zeta);
  EXPECT_LE((pp.x - (xk - (A.transpose() * zeta + u) / 3.0)).norm(), 1e-13);
  EXPECT_LE((pp.y - prox_l1(zeta / 0.5 + d.c, 2.0)).norm(), 1e-13);
  const auto ev = evaluate_dual(d, zeta);
  EXPECT_LE((ev.x - pp.x).norm(), 1e-13);
  EXPECT_NEAR(ev.q, primal_value(d, pp.x), 1e-12 * (1 + std::abs(ev.q)));
  EXPECT_NEAR(ev.gap, ev.q + ev.psi, 1e-10 * (1 + ev.psi_scale));
}

TEST(Ppa, QuadraticMatchesLinearSystem) {
  const auto qi = quadratic_instance(3, 12, 8);
  const auto& d = qi.d;
  const Mat H = d.gamma * Mat::Identity(12, 12) + d.alpha * qi.A.transpose() * qi.A;
  const Vec x_star = d.x_k - H.llt().solve(qi.A.transpose() * qi.a + d.u);
  const auto res = ppa_solve(d, PpaConfig{}, Vec::Zero(8), gap_below(1e-13));
  EXPECT_EQ(res.exit, PpaExit::Certificate);
  EXPECT_LE((res.x - x_star).norm(), 1e-6 * (1 + x_star.norm()));
  EXPECT_LE(res.newton.iters, 10);
}

TEST(Ppa, NewtonSolvesQuadraticProximalProblemQuickly) {
  const auto qi = quadratic_instance(4, 10, 6);
  DualEval ev = evaluate_dual(qi.d, Vec::Zero(6));
  NewtonCounters counters;
  newton_solve(qi.d, Vec::Zero(6), 1.0, NewtonConfig{}, ev, counters);
  EXPECT_LE(counters.iters, 3);
  EXPECT_EQ(counters.armijo_only, 0);
}

TEST(Ppa, WarmStartAtSolutionExitsImmediately) {
  RandomSource rng(9);
  RandomDualOptions opt;
  opt.box_in_theta1 = false;
  opt.normalize_A = true;
  const auto d = random_dual_subproblem(rng, opt);
  const auto ref = reference_dual_solve(d, 100000);
  const auto res = ppa_solve(d, PpaConfig{}, ref.zeta, gap_below(1e-9));
  EXPECT_EQ(res.ppa_iters, 0);
  EXPECT_EQ(res.exit, PpaExit::Certificate);
}

TEST(Ppa, FallbackOnNeverAcceptingCriterion) {
  const auto qi = quadratic_instance(5, 6, 4);
  PpaConfig cfg;
  cfg.fallback_tol = 1e-8;
  const auto res = ppa_solve(qi.d, cfg, Vec::Zero(4), [](const PpaCandidate&) { return false; });
  EXPECT_EQ(res.exit, PpaExit::Fallback);
  EXPECT_LE(res.grad_norm, 1e-8 * (1 + qi.d.c.norm()));
}

TEST(Ppa, IterationCapThrows) {
  RandomSource rng(6);
  const auto d = random_dual_subproblem(rng);
  PpaConfig cfg;
  cfg.max_iters = 2;
  cfg.fallback_tol = 1e-300;
  EXPECT_THROW(ppa_solve(d, cfg, Vec::Zero(d.dual_dim()), [](const PpaCandidate&) { return false; }),
               SubsolverFailure);
}

TEST(Ppa, ConfigValidation) {
  PpaConfig cfg;
  cfg.newton.eta = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = PpaConfig{};
  cfg.newton.beta = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
}

class SubsolverSeeds : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(SubsolverSeeds, AgreesWithReferenceSolver) {
  const auto r = check_subsolver(10, GetParam());
  EXPECT_TRUE(r.passed) << r.detail;
}

INSTANTIATE_TEST_SUITE_P(Seeds, SubsolverSeeds, ::testing::Values(1u, 2u, 3u));
