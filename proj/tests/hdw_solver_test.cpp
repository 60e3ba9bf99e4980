#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ghm/hdw_solver.hpp"
#include "support.hpp"

using namespace ghm;

namespace {

FormValue dx(int n, MultiIndex i, double c = 1.0) { return FormValue::monomial(n, i, c); }
Expression x(int i) { return Expression::coordinate(i); }

FormValue obstructed() { return dx(4, {0, 1, 2}) + dx(4, {0, 1, 3}); }

}  // namespace

TEST(Obstruction, Condition) {
  EXPECT_TRUE(obstruction_check(3, 3));
  EXPECT_FALSE(obstruction_check(4, 3));
  EXPECT_TRUE(obstruction_check(7, 2));
  EXPECT_THROW(obstruction_check(2, 3), InvalidArgument);
  EXPECT_THROW(obstruction_check(3, 1), InvalidArgument);
}

TEST(HatMapTest, Shapes) {
  auto h = assemble_hatmap(dx(3, {0, 1, 2}));
  ASSERT_EQ(h.rows.size(), 3u);
  EXPECT_EQ(h.rows[0], (MultiIndex{0, 1}));
  EXPECT_EQ(h.rows[1], (MultiIndex{0, 2}));
  EXPECT_EQ(h.rows[2], (MultiIndex{1, 2}));
  Eigen::Vector3d v(1.5, -2.0, 0.25);
  Eigen::VectorXd img = h.matrix * v;
  EXPECT_EQ(img(2), 1.5);   // (2,3): X^1
  EXPECT_EQ(img(1), 2.0);   // (1,3): -X^2
  EXPECT_EQ(img(0), 0.25);  // (1,2): X^3

  auto s = assemble_hatmap(dx(2, {0, 1}));
  EXPECT_EQ(s.matrix(0, 0), 0.0);
  EXPECT_EQ(s.matrix(1, 0), 1.0);
  EXPECT_EQ(s.matrix(0, 1), -1.0);
  EXPECT_EQ(s.matrix(1, 1), 0.0);

  auto o = assemble_hatmap(obstructed());
  EXPECT_EQ(o.matrix.rows(), 6);
  EXPECT_EQ(o.rows[5], (MultiIndex{2, 3}));
  EXPECT_EQ(o.matrix.row(5).norm(), 0.0);
}

TEST(HatMapTest, MatchesInteriorProduct) {
  Sampler rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    int n = rng.integer(2, 6);
    int k = rng.integer(1, n);
    auto w = test::random_value<Covariant>(rng, n, k);
    auto v = test::random_vector(rng, n);
    auto h = assemble_hatmap(w);
    Eigen::VectorXd img = h.matrix * Eigen::Map<Eigen::VectorXd>(v.data(), n);
    Eigen::VectorXd oracle = coefficient_vector(interior_vector(v, w), h.rows);
    EXPECT_LE((img - oracle).norm(), 1e-14);
  }
}

TEST(Solve, FlatNambu) {
  int n = 3;
  std::vector<Expression> hams{x(0), x(1)};
  FormField sigma = hamiltonian_form(hams, n);
  std::vector<double> p{0.3, 0.1, -0.4};
  auto r = solve_hdw(lift(dx(3, {0, 1, 2})), sigma, p);
  ASSERT_TRUE(r.x);
  EXPECT_NEAR((*r.x)[0], 0.0, 1e-15);
  EXPECT_NEAR((*r.x)[1], 0.0, 1e-15);
  EXPECT_NEAR((*r.x)[2], -1.0, 1e-15);
  EXPECT_TRUE(r.unique);
  EXPECT_TRUE(r.consistent);
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_TRUE(r.surjectivity_possible);
}

TEST(Solve, ObstructedIsInconsistent) {
  auto r = solve_hdw(obstructed(), dx(4, {2, 3}));
  EXPECT_FALSE(r.consistent);
  EXPECT_FALSE(r.unique);
  EXPECT_NEAR(r.residual, 1.0, 1e-14);
  EXPECT_FALSE(r.surjectivity_possible);
}

TEST(Solve, HarmonicOscillator) {
  int n = 2;
  Expression h = (pow(x(0), 2.0) + pow(x(1), 2.0)) / 2.0;
  std::vector<Expression> hams{h};
  std::vector<double> p{0.7, -0.2};
  auto r = solve_hdw(lift(dx(2, {0, 1})), hamiltonian_form(hams, n), p);
  ASSERT_TRUE(r.unique);
  EXPECT_NEAR((*r.x)[0], 0.2, 1e-15);
  EXPECT_NEAR((*r.x)[1], 0.7, 1e-15);
}

TEST(Kernel, Examples) {
  auto k1 = kernel_basis(dx(3, {0, 1}));
  ASSERT_EQ(k1.size(), 1u);
  EXPECT_NEAR(std::abs(k1[0][2]), 1.0, 1e-14);
  EXPECT_TRUE(kernel_basis(dx(3, {0, 1, 2})).empty());

  FormField w(4, 3);
  w.add(MultiIndex{0, 1, 3}, x(3));
  std::vector<double> p{0.2, 0.3, 0.4, 1.0};
  auto k3 = kernel_basis(w, p);
  ASSERT_EQ(k3.size(), 1u);
  EXPECT_NEAR(std::abs(k3[0][2]), 1.0, 1e-14);
}

TEST(Solve, KernelShiftsStillSolve) {
  Sampler rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 4;
    FormValue w = dx(n, {0, 1, 2}).scaled(rng.uniform(0.5, 2)) + dx(n, {0, 1, 3}).scaled(rng.uniform(0.5, 2));
    // sigma in the image: sigma = -i_Y w for random Y.
    auto y = test::random_vector(rng, n);
    FormValue sigma = -interior_vector(y, w);
    auto r = solve_hdw(w, sigma);
    ASSERT_TRUE(r.consistent);
    EXPECT_LE(max_abs(interior_vector(*r.x, w) + sigma), 1e-9);
    for (auto kv : kernel_basis(w)) {
      VectorValue shifted = *r.x;
      for (int i = 0; i < n; ++i) shifted[i] += kv[i];
      EXPECT_LE(max_abs(interior_vector(shifted, w) + sigma), 1e-9);
    }
  }
}

TEST(Solve, DenseSigmaInconsistentWhenObstructed) {
  Sampler rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    FormValue sigma(4, 2);
    for (const auto& i : combinations(4, 2))
      sigma.add(i, (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(0.5, 1.0));
    auto r = solve_hdw(obstructed(), sigma);
    EXPECT_GT(r.residual, 0.1);
    EXPECT_FALSE(r.consistent);
  }
}

TEST(Solve, SolutionsAnnihilateHamiltonians) {
  Sampler rng(24);
  int n = 3;
  FormField w = lift(dx(n, {0, 1, 2}));
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Expression> hams{test::random_polynomial(rng, n, 2, 4), test::random_polynomial(rng, n, 2, 4)};
    auto p = test::random_vector(rng, n);
    auto sigma = hamiltonian_form(hams, n);
    if (max_abs(evaluate(sigma, p)) < 1e-3) continue;
    auto r = solve_hdw(w, sigma, p);
    ASSERT_TRUE(r.consistent);
    for (const auto& h : hams) {
      auto grad = evaluate(gradient(h, n), p);
      double s = 0;
      for (int i = 0; i < n; ++i) s += (*r.x)[i] * grad[i];
      EXPECT_LE(std::abs(s), 1e-9);
    }
  }
}
