#include <gtest/gtest.h>

#include <sstream>

#include "dcopt/dc_suite.hpp"

using namespace dcopt;

TEST(Examples, Example1AtOptimum) {
  const auto ex = build_example(1);
  const Vec x = Eigen::Vector2d(1, 1);
  const Vec fx = ex.instance.F->eval(x);
  EXPECT_NEAR(fx[0], 2.0, 1e-15);
  EXPECT_NEAR(fx[1], 2.0, 1e-15);
  EXPECT_NEAR(fx[2], 2.0, 1e-15);
  EXPECT_NEAR(eval_phi(ex.instance, x), 2.0, 1e-14);
  EXPECT_EQ(*ex.reference_min, 2.0);
}

TEST(Examples, Example6IsL1MinusQuadratic) {
  const auto ex = build_example(6);
  RandomSource rng(1);
  for (int t = 0; t < 10; ++t) {
    const Vec x = rng.normal_vector(2);
    EXPECT_NEAR(ex.instance.theta1->value(ex.instance.F->eval(x)), x.lpNorm<1>(), 1e-14);
    EXPECT_NEAR(eval_phi(ex.instance, x),
                x.lpNorm<1>() + 2.5 * x[0] - 1.5 * x.squaredNorm(), 1e-12);
  }
  const auto flipped = build_example(6, ExampleVariant::Reconstructed, true);
  const Vec x = Eigen::Vector2d(0.3, -0.2);
  EXPECT_NEAR(eval_phi(flipped.instance, x),
              x.lpNorm<1>() - 2.5 * x[0] + 1.5 * x.squaredNorm(), 1e-12);
}

TEST(Examples, AllBuildAndValidate) {
  for (int id = 1; id <= 6; ++id) {
    for (auto v : {ExampleVariant::Reconstructed, ExampleVariant::Printed}) {
      const auto ex = build_example(id, v);
      EXPECT_EQ(ex.id, id);
      EXPECT_NO_THROW(ex.instance.validate());
    }
  }
  EXPECT_THROW(build_example(7), InvalidInput);
  EXPECT_EQ(parse_variant("printed"), ExampleVariant::Printed);
  EXPECT_THROW(parse_variant("original"), InvalidInput);
}

TEST(Examples, JacobianNorm) {
  ProblemInstance p = build_example(6).instance;
  EXPECT_NEAR(jacobian_norm(p, Vec::Zero(2)), 1.0, 1e-14);
}

TEST(Penalty, ValuesAndInfeasibility) {
  const auto pi = demo_penalty_instance(10.0);
  const auto p = build_l1_penalty(pi);
  const Vec x2 = Vec::Constant(1, 2.0);
  EXPECT_NEAR(eval_phi(p, x2), 32.0, 1e-13);
  EXPECT_NEAR(infeasibility(pi, x2), 3.0, 1e-15);
  const Vec xf = Vec::Constant(1, 0.5);
  EXPECT_NEAR(eval_phi(p, xf), 0.5, 1e-15);
  EXPECT_EQ(infeasibility(pi, xf), 0.0);
  EXPECT_TRUE(std::isinf(eval_phi(p, Vec::Constant(1, 11.0))));
}

TEST(Penalty, ConfigUsesJacobianNormForGamma) {
  const auto pi = demo_penalty_instance();
  const auto p = build_l1_penalty(pi);
  const auto cfg = penalty_ilpa_config(p, pi, Vec::Constant(1, 3.0));
  EXPECT_NEAR(cfg.gamma_min, 6.0, 1e-12);
  EXPECT_TRUE(cfg.step_guard(Vec::Constant(1, 0.0)));
  EXPECT_FALSE(cfg.step_guard(Vec::Constant(1, 2.0)));
  const auto tiny = penalty_ilpa_config(p, pi, Vec::Constant(1, 0.0));
  EXPECT_EQ(tiny.gamma_min, 0.01);
}

TEST(Nopt, Example1FindsReference) {
  NoptOptions opt;
  opt.runs = 10;
  opt.seed = 3;
  const auto rep = nopt_benchmark(example_target(build_example(1)), opt);
  EXPECT_EQ(rep.failed_runs, 0);
  EXPECT_GE(rep.nopt, 9);
  EXPECT_NEAR(rep.min_theta, 2.0, 1e-5);
  EXPECT_EQ(rep.monotonicity_violations, 0);
  for (const auto& r : rep.runs) EXPECT_LE(r.max_j, r.j_limit);
}

TEST(Nopt, PenaltyDemo) {
  NoptOptions opt;
  opt.runs = 10;
  const auto rep = nopt_benchmark(penalty_target(demo_penalty_instance()), opt);
  EXPECT_EQ(rep.nopt, 10);
  EXPECT_NEAR(rep.min_theta, -1.0, 1e-5);
  EXPECT_LE(rep.mean_infeasibility, 1e-6);
}

TEST(Nopt, DeterministicAcrossThreads) {
  NoptOptions one;
  one.runs = 6;
  one.seed = 11;
  NoptOptions many = one;
  many.threads = 3;
  const auto target = example_target(build_example(3));
  const auto a = nopt_benchmark(target, one), b = nopt_benchmark(target, many);
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) EXPECT_EQ(a.runs[i].x, b.runs[i].x);
}

TEST(Nopt, Example6HitsLowerBoundGuard) {
  NoptOptions opt;
  opt.runs = 3;
  const auto rep = nopt_benchmark(example_target(build_example(6)), opt);
  EXPECT_EQ(rep.failed_runs, 3);
  for (const auto& r : rep.runs) {
    EXPECT_EQ(r.status, RunStatus::Aborted);
    EXPECT_NE(r.error.find("lower bound"), std::string::npos) << r.error;
  }
}

TEST(BenchCsv, TimeColumnOptional) {
  NoptReport r;
  r.name = "example-1";
  r.min_theta = 2;
  r.max_theta = 2;
  r.mean_theta = 2;
  r.nopt = 100;
  r.mean_seconds = 0.5;
  std::ostringstream with, without;
  write_bench_csv(with, {r}, true);
  write_bench_csv(without, {r}, false);
  EXPECT_EQ(with.str().rfind("example,min,max,mean,Nopt,time\nexample-1,2,2,2,100,", 0), 0u);
  EXPECT_EQ(without.str().back(), '\n');
  EXPECT_EQ(without.str().at(without.str().size() - 2), ',');
  EXPECT_NE(with.str(), without.str());
}
