#include <gtest/gtest.h>

#include "dcopt/atoms.hpp"
#include "dcopt/diagnostics.hpp"

using namespace dcopt;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// argmin over a grid of phi(y) + (y - v)^2 / (2 lambda).
template <typename F>
double grid_argmin(const F& phi, double v, double lambda, double step = 1e-6) {
  double best = v, best_val = std::numeric_limits<double>::infinity();
  const double lo = v - 5.0, hi = v + 5.0;
  // Coarse pass, then a fine pass around the coarse minimizer.
  for (double y = lo; y <= hi; y += 1e-3) {
    const double val = phi(y) + (y - v) * (y - v) / (2 * lambda);
    if (val < best_val) best_val = val, best = y;
  }
  const double c = best;
  for (double y = c - 2e-3; y <= c + 2e-3; y += step) {
    const double val = phi(y) + (y - v) * (y - v) / (2 * lambda);
    if (val < best_val) best_val = val, best = y;
  }
  return best;
}

}  // namespace

TEST(ProxL1, ClosedForm) {
  EXPECT_EQ(prox_l1(vec({3, -0.5}), 1.0), vec({2, 0}));
  RandomSource rng(1);
  const Vec v = rng.normal_vector(5);
  EXPECT_LE((prox_l1(v, 1e-14) - v).norm(), 1e-13);
}

TEST(ProxL1, MatchesGridMinimization) {
  RandomSource rng(2);
  const Vec v = 2.0 * rng.normal_vector(3);
  const Vec p = prox_l1(v, 0.7);
  for (Index i = 0; i < 3; ++i) {
    const double g = grid_argmin([](double y) { return 0.7 * std::abs(y); }, v[i], 1.0);
    EXPECT_NEAR(p[i], g, 2e-6);
  }
}

TEST(ProxGroup, RadialShrinkage) {
  Mat m(2, 1);
  m << 2, 0;
  EXPECT_LE((prox_group_l21(m, 1.0) - Mat(Eigen::Vector2d(1, 0))).norm(), 1e-15);
  Mat small(2, 1);
  small << 0.3, 0.4;
  EXPECT_EQ(prox_group_l21(small, 1.0), Mat::Zero(2, 1));
}

TEST(ProxGroup, MatchesRadialScalarProblem) {
  RandomSource rng(3);
  const Mat m = rng.normal_matrix(4, 3);
  const Mat p = prox_group_l21(m, 0.3);
  for (Index j = 0; j < 3; ++j) {
    // Along the column direction the problem is 0.3 t + (t - ||c||)^2 / 2, t >= 0.
    const double nrm = m.col(j).norm();
    const double t = grid_argmin([](double y) { return y < 0 ? 1e9 : 0.3 * y; }, nrm, 1.0);
    EXPECT_NEAR(p.col(j).norm(), t, 2e-6);
    EXPECT_LE((p.col(j) / p.col(j).norm() - m.col(j) / nrm).norm(), 1e-12);
  }
}

TEST(ProxHinge, Regions) {
  EXPECT_EQ(prox_hinge_sum(vec({-3}), 1.0, 1.0)[0], -3);
  EXPECT_EQ(prox_hinge_sum(vec({0.5}), 1.0, 1.0)[0], 0);
  EXPECT_EQ(prox_hinge_sum(vec({2}), 1.0, 1.0)[0], 1);
  const double g = grid_argmin([](double y) { return std::max(0.0, y); }, 2.0, 1.0);
  EXPECT_NEAR(g, 1.0, 2e-6);
}

TEST(ProjectSimplex, Examples) {
  EXPECT_LE((project_simplex(vec({0.3, 0.3}), 1.0) - vec({0.5, 0.5})).norm(), 1e-15);
  EXPECT_LE((project_simplex(vec({2, 0}), 1.0) - vec({1, 0})).norm(), 1e-15);
}

TEST(ProxCoordMax, Examples) {
  EXPECT_LE((prox_coordmax(vec({0, 0}), 1.0) - vec({-0.5, -0.5})).norm(), 1e-15);
  EXPECT_LE((prox_coordmax(vec({10, 0}), 1.0) - vec({9, 0})).norm(), 1e-15);
  RandomSource rng(4);
  const Vec v = rng.normal_vector(4);
  EXPECT_LE((prox_coordmax(v, 1e-14) - v).norm(), 1e-13);
}

TEST(ProxCoordMax, MatchesTwoDimensionalGrid) {
  const Vec v = vec({10, 0});
  double best = std::numeric_limits<double>::infinity();
  Vec arg(2);
  for (double a = 8; a <= 10; a += 1e-3)
    for (double b = -1; b <= 1; b += 1e-3) {
      const double val = std::max(a, b) + 0.5 * ((a - 10) * (a - 10) + b * b);
      if (val < best) best = val, arg = vec({a, b});
    }
  EXPECT_LE((prox_coordmax(v, 1.0) - arg).lpNorm<Eigen::Infinity>(), 2e-3);
}

TEST(ProxBox, ClampAndErrors) {
  EXPECT_EQ(prox_box(vec({5}), vec({-1}), vec({1}))[0], 1);
  const Vec inside = vec({0.2, -0.3});
  EXPECT_EQ(prox_box(inside, vec({-1, -1}), vec({1, 1})), inside);
  EXPECT_THROW(prox_box(vec({0}), vec({1}), vec({0})), InvalidInput);
  EXPECT_THROW(prox_box(vec({0, 0}), vec({1}), vec({2})), InvalidInput);
}

TEST(Atoms, InvalidParameters) {
  EXPECT_THROW(L1Atom(3, 0.0), InvalidInput);
  EXPECT_THROW(HingeSumAtom(3, -1.0), InvalidInput);
  EXPECT_THROW(l1_atom(2)->prox(Vec::Zero(2), 0.0), InvalidInput);
  EXPECT_THROW(affine_precompose(l1_atom(2), 0.0, Vec::Zero(2)), InvalidInput);
}

TEST(Atoms, SubgradientTieBreaks) {
  EXPECT_EQ(l1_atom(3)->subgrad_select(vec({2, -1, 0})), vec({1, -1, 1}));
  EXPECT_EQ(coordmax_atom(3)->subgrad_select(vec({3, 3, 1})), vec({1, 0, 0}));
}

TEST(Atoms, CoordMaxGradientAtDifferentiablePoint) {
  const Vec v = vec({0.1, 0.7, -0.2});
  const auto f = coordmax_atom(3);
  const Vec fd = finite_diff_gradient<double>([&](const Vec& z) { return f->value(z); }, v, 1e-6);
  EXPECT_LE((fd - f->subgrad_select(v)).norm(), 1e-8);
}

TEST(Atoms, JacobianPatterns) {
  const Vec d = vec({1, 1});
  EXPECT_EQ(l1_atom(2)->prox_jacobian(vec({3, -0.5}), 1.0).apply(d), vec({1, 0}));
  const auto box = box_atom(vec({-1, -1}), vec({1, 1}));
  EXPECT_EQ(box->prox_jacobian(vec({0.2, 0.4}), 1.0).apply(d), d);
}

TEST(Atoms, GroupJacobianMatchesDirectionalDifference) {
  RandomSource rng(5);
  const ColumnGroupL21Atom g(4, 3, 0.5);
  Vec v = 3.0 * rng.normal_vector(12);
  const Vec d = rng.normal_vector(12);
  const Vec fd = finite_diff_directional([&](const Vec& z) { return g.prox(z, 1.0); }, v, d, 1e-7);
  EXPECT_LE((fd - g.prox_jacobian(v, 1.0).apply(d)).norm(), 1e-5 * (1 + d.norm()));
}

TEST(Atoms, EnvelopeIdentity) {
  RandomSource rng(6);
  const auto f = hinge_atom(4, 1.5);
  const Vec v = rng.normal_vector(4);
  const Vec p = f->prox(v, 0.8);
  EXPECT_DOUBLE_EQ(f->envelope(v, 0.8), f->value(p) + (p - v).squaredNorm() / 1.6);
}

TEST(Atoms, AffinePrecomposeProx) {
  // prox of |2y + 1| at v by grid.
  const auto f = affine_precompose(l1_atom(1), 2.0, vec({1}));
  const double v = 0.7;
  const double g = grid_argmin([](double y) { return std::abs(2 * y + 1); }, v, 0.3);
  EXPECT_NEAR(f->prox(vec({v}), 0.3)[0], g, 2e-6);
}

TEST(Atoms, SeparableSumDimensionsAndValue) {
  const auto s = separable_sum({l1_atom(2), zero_atom(1), hinge_atom(2, 2.0)});
  EXPECT_EQ(s->dim(), 5);
  EXPECT_DOUBLE_EQ(s->value(vec({1, -2, 7, 1, -1})), 3 + 0 + 2);
  EXPECT_FALSE(s->smooth());
  EXPECT_TRUE(separable_sum({zero_atom(2), linear_atom(vec({1}))})->smooth());
}

// The full property battery shared with the check subcommand.
TEST(AtomProperties, Battery) {
  for (const auto& r : check_atoms(11, 1000)) {
    EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
  }
}

TEST(AtomProperties, OtherSeed) {
  for (const auto& r : check_atoms(12345, 300)) {
    EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
  }
}
