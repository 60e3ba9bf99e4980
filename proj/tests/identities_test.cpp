#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ghm/identities.hpp"
#include "support.hpp"

using namespace ghm;

namespace {

Expression x(int i) { return Expression::coordinate(i); }
Expression c(double v) { return Expression::constant(v); }

MultiVectorField mv(int n, MultiIndex i, Expression coeff = c(1)) { return MultiVectorField::monomial(n, i, coeff); }
FormField form(int n, MultiIndex i, Expression coeff = c(1)) { return FormField::monomial(n, i, coeff); }

// (1/x4)(d_21 + d_43)
MultiVectorField fourdim_bivector() { return mv(4, {0, 1}, -1.0 / x(3)) + mv(4, {2, 3}, -1.0 / x(3)); }

MultiVectorField oscillator_j() { return mv(6, {0, 1, 2}) + mv(6, {3, 4, 5}); }

PointSet sample(Box box, int count, std::uint64_t seed) { return Sampler(seed).points(box, count); }

// Brute-force local Jacobi oracle: sum over all m of J^{i m T} d_m J^{j l T} + cyclic, T = trailing axes.
double brute_jacobi_k(const MultiVectorField& j, const std::vector<double>& p) {
  int n = j.dimension(), k = j.degree();
  test::Dense jd = test::to_dense(evaluate(j, p));
  std::vector<test::Dense> dj;
  for (int m = 0; m < n; ++m) {
    MultiVectorField f(n, k);
    for (const auto& [idx, coeff] : j.terms()) f.add(idx, differentiate(coeff, m));
    dj.push_back(test::to_dense(evaluate(f, p)));
  }
  std::vector<int> tail;
  for (int a = n - (k - 2); a < n; ++a) tail.push_back(a);
  auto at = [&](const test::Dense& d, int a, int b) {
    std::vector<int> t{a, b};
    t.insert(t.end(), tail.begin(), tail.end());
    return d.at(t);
  };
  double worst = 0;
  test::for_each_tuple(n, 3, [&](const std::vector<int>& t) {
    int i = t[0], jj = t[1], l = t[2];
    double s = 0;
    for (int m = 0; m < n; ++m)
      s += at(jd, i, m) * at(dj[m], jj, l) + at(jd, jj, m) * at(dj[m], l, i) + at(jd, l, m) * at(dj[m], i, jj);
    worst = std::max(worst, std::abs(s));
  });
  return worst;
}

// {f,g,h} = -i_df i_dg i_dh J
Expression bracket(const MultiVectorField& j, const Expression& f, const Expression& g, const Expression& h) {
  int n = j.dimension();
  FormField a = wedge(wedge(differential(h, n), differential(g, n)), differential(f, n));
  auto r = contract(a, j);
  return -r[MultiIndex()];
}

}  // namespace

TEST(Jacobi, ConstantTensorIsZero) {
  auto pts = sample(uniform_box(4, -1, 1), 5, 1);
  auto r = jacobi_residual(mv(4, {0, 1}, c(2)) + mv(4, {1, 3}, c(-1)), pts);
  EXPECT_EQ(r.max_residual, 0.0);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.samples, 5);
}

TEST(Jacobi, FourDimensionalFailure) {
  for (double x4 : {0.5, 1.0, 2.0}) {
    std::vector<double> p{0.3, -0.2, 0.7, x4};
    EXPECT_NEAR(jacobi_cyclic_sum(fourdim_bivector(), p, 2, 0, 1), -1.0 / (x4 * x4 * x4), 1e-12);
  }
  PointSet pts{{0.1, 0.2, 0.3, 1.0}};
  auto r = jacobi_residual(fourdim_bivector(), pts);
  EXPECT_NEAR(r.max_residual, 1.0, 1e-12);
  EXPECT_FALSE(r.pass);
  PointSet pts2{{0.1, 0.2, 0.3, 2.0}};
  EXPECT_NEAR(jacobi_residual(fourdim_bivector(), pts2).max_residual, 0.125, 1e-12);
}

TEST(Jacobi, LiePoissonSatisfies) {
  // so(3) bracket scaled by a function of the spectator x4.
  Expression s = 1.0 + pow(x(3), 2.0);
  MultiVectorField j = mv(4, {0, 1}, x(2) * s) + mv(4, {0, 2}, -x(1) * s) + mv(4, {1, 2}, x(0) * s);
  auto r = jacobi_residual(j, sample(uniform_box(4, -2, 2), 20, 2));
  EXPECT_LE(r.max_residual, 1e-12);
}

TEST(JacobiK, AdaptedCoordinates) {
  auto pts = sample(uniform_box(4, -1, 1), 10, 3);
  EXPECT_EQ(jacobi_k_residual(mv(3, {0, 1, 2}), true, sample(uniform_box(3, -1, 1), 4, 3)).max_residual, 0.0);
  EXPECT_THROW(jacobi_k_residual(mv(3, {0, 1, 2}), false, pts), InvalidArgument);

  // J = N ^ script-J with Casimir x4 and a Jacobi-satisfying script-J.
  Expression s = 1.0 + pow(x(3), 2.0);
  MultiVectorField j2 = mv(4, {0, 1}, x(2) * s) + mv(4, {0, 2}, -x(1) * s) + mv(4, {1, 2}, x(0) * s);
  std::vector<Expression> cs{x(3)};
  VectorField n4(4, c(0));
  n4[3] = c(1);
  auto j = build_poisson_k(j2, cs, {n4}, pts);
  EXPECT_LE(jacobi_k_residual(j, true, pts).max_residual, 1e-12);
  EXPECT_LE(jacobi_k_residual(j, cs, pts).max_residual, 1e-12);
}

TEST(JacobiK, MatchesBruteForceScan) {
  MultiVectorField j = mv(4, {0, 1, 2}, x(0)) + mv(4, {0, 1, 3}, x(1));
  auto pts = sample(uniform_box(4, -1, 1), 10, 4);
  auto r = jacobi_k_residual(j, true, pts);
  double oracle = 0;
  for (const auto& p : pts) oracle = std::max(oracle, brute_jacobi_k(j, p));
  EXPECT_NEAR(r.max_residual, oracle, 1e-14);

  MultiVectorField j3 = j + mv(4, {0, 2, 3}, x(2)) + mv(4, {1, 2, 3}, x(0));
  auto r3 = jacobi_k_residual(j3, true, pts);
  oracle = 0;
  for (const auto& p : pts) oracle = std::max(oracle, brute_jacobi_k(j3, p));
  EXPECT_NEAR(r3.max_residual, oracle, 1e-14);
  EXPECT_GT(oracle, 0.1);
}

TEST(FundamentalIdentity, CanonicalNambuSatisfies) {
  auto r = fundamental_identity_residual(mv(3, {0, 1, 2}), sample(uniform_box(3, -1, 1), 2, 5));
  EXPECT_EQ(r.max_residual, 0.0);
  EXPECT_TRUE(r.pass);
  // FI implies the local Jacobi condition.
  EXPECT_EQ(jacobi_k_residual(mv(3, {0, 1, 2}), true, sample(uniform_box(3, -1, 1), 2, 5)).max_residual, 0.0);
}

TEST(FundamentalIdentity, OscillatorFails) {
  PointSet pts{{0.1, 0.2, 0.3, 0.4, 0.5, 0.6}};
  EXPECT_EQ(fundamental_identity_b(oscillator_j(), pts[0], {0, 1, 2, 3, 4, 5}), 1.0);
  auto r = fundamental_identity_residual(oscillator_j(), pts);
  EXPECT_GE(r.max_residual, 1.0);
  EXPECT_EQ(r.part, "FIb");
  EXPECT_FALSE(r.pass);
  // Reduction by G = G1 + G2 still satisfies Jacobi.
  std::vector<Expression> cs{x(2) - pow(x(1), 2.0) + x(5) - pow(x(4), 2.0)};
  auto jr = jacobi_k_residual(oscillator_j(), cs, sample(uniform_box(6, -2, 2), 20, 6));
  EXPECT_LE(jr.max_residual, 1e-12);
}

TEST(FundamentalIdentity, NonConstantTensorScansFIa) {
  MultiVectorField j = mv(4, {0, 1, 2}, x(3));
  auto r = fundamental_identity_residual(j, PointSet{{0.1, 0.2, 0.3, 0.4}});
  EXPECT_EQ(r.samples, 1);
  EXPECT_GE(r.max_residual, 0.0);
  // x4 * d_123 is decomposable with coefficient independent of 1,2,3: FIa and FIb vanish.
  EXPECT_LE(r.max_residual, 1e-15);
  auto r2 = fundamental_identity_residual(mv(5, {0, 1, 2}, x(1)) + mv(5, {0, 3, 4}), PointSet{{0.5, 0.2, 0.3, 0.4, 0.1}});
  EXPECT_GT(r2.max_residual, 0.1);
}

TEST(Closure, Examples) {
  auto pts = sample(Box{{-1, 1}, {-1, 1}, {-1, 1}, {0.5, 2}}, 10, 7);
  EXPECT_EQ(closure_residual(form(4, {0, 1, 2}, c(3)), pts).max_residual, 0.0);
  FormField omega = form(4, {0, 1}, x(3)) + form(4, {2, 3}, x(3));
  FormField w = wedge(omega, form(4, {3}));
  EXPECT_EQ(closure_residual(w, pts).max_residual, 0.0);
  auto r = closure_residual(omega, pts);
  EXPECT_EQ(r.max_residual, 1.0);
  EXPECT_EQ(r.signed_value, 1.0);
  EXPECT_EQ(r.indices, (std::vector<int>{0, 1, 3}));
}

TEST(Measure, Examples) {
  auto pts = sample(uniform_box(3, 0.5, 1.5), 10, 8);
  EXPECT_EQ(measure_residual(mv(3, {0, 1, 2}, c(2)), c(1), pts).max_residual, 0.0);
  auto r = measure_residual(mv(3, {0, 1, 2}, x(0)), c(1), pts);
  EXPECT_EQ(r.max_residual, 1.0);
  EXPECT_EQ(r.indices, (std::vector<int>{1, 2}));
  // g J constant with g a nontrivial density.
  Expression g = 1.0 + x(0) * x(1) + pow(x(2), 2.0);
  EXPECT_LE(measure_residual(mv(3, {0, 1, 2}, 1.0 / g), g, pts).max_residual, 1e-15);
  EXPECT_THROW(measure_residual(mv(3, {0, 1, 2}), x(0), PointSet{{0, 1, 1}}), DomainError);
}

TEST(Measure, ExtensionIsDivergenceFree) {
  EXPECT_EQ(extend_measure_preserving(mv(3, {0, 1, 2})).size(), 1u);
  auto pts = sample(uniform_box(4, -1, 1), 20, 9);
  Sampler rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    MultiVectorField j(4, 3);
    for (const auto& idx : combinations(4, 3)) j.add(idx, test::random_polynomial(rng, 4, 3, 3));
    auto ext = extend_measure_preserving(j);
    EXPECT_EQ(ext.dimension(), 5);
    EXPECT_LE(measure_residual(ext, c(1), sample(uniform_box(5, -1, 1), 20, 11 + trial)).max_residual, 1e-12);
  }
  auto ext = extend_measure_preserving(mv(3, {0, 1, 2}, x(0)));
  EXPECT_LE(measure_residual(ext, c(1), pts).max_residual, 1e-12);
}

TEST(Bracket, LeibnizAlongFlow) {
  // d/dt {f,g,h} = {f',g,h} + {f,g',h} + {f,g,h'} for J = d_123 with X = {., H, C}.
  int n = 3;
  MultiVectorField j = mv(n, {0, 1, 2});
  Sampler rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    auto poly = [&] { return test::random_polynomial(rng, n, 3, 4); };
    Expression f = poly(), g = poly(), h = poly(), ham = poly(), cas = poly();
    auto dot = [&](const Expression& e) { return bracket(j, e, ham, cas); };
    Expression lhs = dot(bracket(j, f, g, h));
    Expression rhs = bracket(j, dot(f), g, h) + bracket(j, f, dot(g), h) + bracket(j, f, g, dot(h));
    auto p = test::random_vector(rng, n);
    double a = evaluate(lhs, p), b = evaluate(rhs, p);
    EXPECT_LE(std::abs(a - b), 1e-8 * (1 + std::abs(a)));
  }
}

TEST(Reports, Reproducible) {
  auto pts = sample(uniform_box(4, 0.5, 2), 20, 13);
  auto a = jacobi_residual(fourdim_bivector(), pts);
  auto b = jacobi_residual(fourdim_bivector(), sample(uniform_box(4, 0.5, 2), 20, 13));
  EXPECT_EQ(a.max_residual, b.max_residual);
  EXPECT_EQ(a.point, b.point);
  EXPECT_EQ(a.indices, b.indices);
}
