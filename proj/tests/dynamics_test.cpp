#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "ghm/dynamics.hpp"
#include "ghm/systems.hpp"
#include "support.hpp"

using namespace ghm;

namespace {

Expression x(int i) { return Expression::coordinate(i); }

IntegrateOptions rk4(double dt) {
  IntegrateOptions o;
  o.dt = dt;
  return o;
}

// Same structure, with J perturbed so that H is no longer conserved.
SystemSpec perturbed_oscillator() {
  SystemSpec s = oscillator(0.1);
  s.tensor->j += MultiVectorField::monomial(6, {0, 2, 4}, Expression::constant(0.1));
  s.form.reset();
  return s;
}

}  // namespace

TEST(VectorField, TensorAndFormRoutes) {
  Dynamics flat(flat_nambu(3, 3));
  std::vector<double> p{0.2, -0.3, 0.4};
  auto e = vector_field_of(flat, p);
  EXPECT_EQ(*e.tensor_x, (VectorValue{0, 0, 1}));
  EXPECT_NEAR((*e.solve->x)[2], -1.0, 1e-15);
  EXPECT_EQ(canonical_route_sign(3), -1);
  EXPECT_EQ(*e.route_gap, 0.0);
  EXPECT_EQ(norm(e.x), 1.0);

  Dynamics osc(oscillator(0.1));
  auto v = osc(std::vector<double>{0, 1, 1, 0, 0, 2});
  std::vector<double> expected{-1.2, 0, 0, 0, 0, 0};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(v[i], expected[i], 1e-15);

  Dynamics four(fourdim(x(0)));
  auto f = vector_field_of(four, std::vector<double>{1, 1, 1, 2});
  for (const auto& xs : {f.x, *f.solve->x}) {
    EXPECT_NEAR(xs[0], 0.0, 1e-15);
    EXPECT_NEAR(xs[1], 0.5, 1e-15);
    EXPECT_NEAR(xs[2], 0.0, 1e-15);
    EXPECT_NEAR(xs[3], 0.0, 1e-15);
  }
}

TEST(VectorField, Errors) {
  Dynamics four(fourdim());
  EXPECT_THROW(vector_field_of(four, std::vector<double>{1, 1, 1, 0.05}), DomainError);
  EXPECT_THROW(vector_field_of(four, std::vector<double>{1, 1, 1}), InvalidArgument);

  // Obstructed form with a sigma outside the image of the hat-map.
  SystemSpec bad;
  bad.name = "obstructed";
  bad.n = 4;
  bad.k = 3;
  bad.domain = uniform_box(4, -1, 1);
  bad.base_point = {0, 0, 0, 0};
  bad.hamiltonians = {{"H1", x(2)}, {"H2", x(3)}};
  bad.form = FormRoute{FormField::monomial(4, {0, 1, 2}) + FormField::monomial(4, {0, 1, 3}), {x(2), x(3)}};
  validate(bad);
  Dynamics dyn(bad);
  EXPECT_THROW(vector_field_of(dyn, std::vector<double>{0, 0, 0, 0}), RuntimeFailure);
  auto traj = integrate(dyn, std::vector<double>{0, 0, 0, 0}, 1.0);
  EXPECT_EQ(traj.status, TrajectoryStatus::failed);
  EXPECT_NE(traj.note.find("inconsistent"), std::string::npos);
}

TEST(Validate, RejectsBrokenSpecs) {
  SystemSpec s = flat_nambu(3, 3);
  s.base_point = {2, 0, 0};
  EXPECT_THROW(validate(s), InvalidArgument);
  s = flat_nambu(4, 3);
  s.form->w = FormField::monomial(4, {0, 1, 2}, x(3));
  EXPECT_THROW(validate(s), InvalidArgument);
  s = flat_nambu(3, 3);
  s.hamiltonians[1].value = x(0);
  EXPECT_THROW(validate(s), InvalidArgument);
  EXPECT_NO_THROW(validate(oscillator()));
}

TEST(Integrate, DecoupledOscillatorIsAnalytic) {
  Dynamics osc(oscillator(0.0));
  std::vector<double> x0{1, 0, 1, 0, 0, 2};
  auto traj = integrate(osc, x0, std::numbers::pi / 2, rk4(1e-3));
  ASSERT_EQ(traj.status, TrajectoryStatus::completed);
  EXPECT_EQ(traj.times.back(), std::numbers::pi / 2);
  EXPECT_NEAR(traj.states.back()[1], 1.0, 1e-8);
  for (std::size_t i = 1; i < traj.times.size(); ++i) ASSERT_GT(traj.times[i], traj.times[i - 1]);

  IntegrateOptions adaptive;
  adaptive.method = Method::rkf45;
  auto t2 = integrate(osc, x0, std::numbers::pi / 2, adaptive);
  ASSERT_EQ(t2.status, TrajectoryStatus::completed);
  EXPECT_NEAR(t2.states.back()[1], 1.0, 1e-8);
  EXPECT_LT(t2.times.size(), traj.times.size());
}

TEST(Integrate, ConservationOnBuiltins) {
  Sampler rng(30);
  std::vector<SystemSpec> specs{oscillator(0.1), fourdim(sin(x(0)) * cos(x(1)) + 0.01 * pow(x(3), 2.0)),
                                quasisymmetry(), flat_nambu(3, 3), flat_nambu(5, 4)};
  for (const auto& spec : specs) {
    Dynamics dyn(spec);
    auto traj = integrate(dyn, spec.base_point, 50.0, rk4(1e-3));
    ASSERT_NE(traj.status, TrajectoryStatus::failed) << spec.name << ": " << traj.note;
    auto rep = conservation_report(traj, dyn);
    for (const auto& d : rep.drifts) EXPECT_LE(d.max_relative_drift, 1e-6) << spec.name << " " << d.name;
    ASSERT_TRUE(rep.max_hdw_residual);
    EXPECT_LE(*rep.max_hdw_residual, 1e-9) << spec.name;
  }
}

TEST(Integrate, FlatSystemDriftsExactlyZero) {
  Dynamics dyn(flat_nambu(3, 3));
  auto traj = integrate(dyn, std::vector<double>{0.1, 0.2, -0.5}, 1.0, rk4(1e-2));
  auto rep = conservation_report(traj, dyn);
  for (const auto& d : rep.drifts) EXPECT_EQ(d.max_relative_drift, 0.0);
  EXPECT_EQ(rep.max_abs_divergence, 0.0);
}

TEST(Integrate, PerturbedRightHandSideIsFlagged) {
  Dynamics dyn(perturbed_oscillator());
  auto traj = integrate(dyn, std::vector<double>{0, 1, 1, 0, 0, 2}, 5.0, rk4(1e-3));
  auto rep = conservation_report(traj, dyn);
  EXPECT_FALSE(rep.pass(1e-6));
  EXPECT_GT(rep.worst(), 1e-3);
}

TEST(Integrate, FourthOrderUnderHalving) {
  Dynamics osc(oscillator(0.1));
  std::vector<double> x0{0, 1, 1, 0, 0, 2};
  auto drift = [&](double dt) { return conservation_report(integrate(osc, x0, 50.0, rk4(dt)), osc); };
  auto coarse = drift(0.1), fine = drift(0.05);
  for (std::size_t i = 0; i < coarse.drifts.size(); ++i) {
    if (coarse.drifts[i].max_relative_drift == 0.0) continue;  // G2 is preserved exactly
    EXPECT_GE(coarse.drifts[i].max_relative_drift / fine.drifts[i].max_relative_drift, std::pow(2.0, 3.5))
        << coarse.drifts[i].name;
  }
}

TEST(Integrate, DomainExitTruncates) {
  Dynamics four(fourdim());
  auto traj = integrate(four, std::vector<double>{1, 1, 1, 0.2}, 5.0, rk4(1e-3));
  EXPECT_EQ(traj.status, TrajectoryStatus::truncated);
  EXPECT_FALSE(traj.note.empty());
  EXPECT_TRUE(contains(four.spec().domain, traj.states.back()));
  EXPECT_LT(traj.times.back(), 5.0);
  EXPECT_THROW(integrate(four, std::vector<double>{1, 1, 1, 0.0}, 1.0), InvalidArgument);
  EXPECT_THROW(integrate(four, std::vector<double>{1, 1, 1, 1}, 1.0, rk4(0.0)), InvalidArgument);
}

TEST(Integrate, LieDerivativeAndSigmaVanishAlongSolutions) {
  SystemSpec spec = oscillator(0.1);
  Dynamics dyn(spec);
  auto traj = integrate(dyn, spec.base_point, 5.0, rk4(1e-2));
  const VectorField& xs = *dyn.symbolic();
  FormField lw = lie_derivative(xs, spec.form->w);
  FormField sigma = hamiltonian_form(spec.form->hamiltonians, 6);
  for (std::size_t i = 0; i < traj.states.size(); i += 50) {
    const auto& p = traj.states[i];
    EXPECT_LE(max_abs(evaluate(lw, p)), 1e-9);
    EXPECT_LE(max_abs(interior_vector(dyn(p), evaluate(sigma, p))), 1e-9);
  }
}

TEST(Divergence, Examples) {
  Dynamics osc(oscillator(0.1));
  Sampler rng(31);
  for (const auto& p : rng.points(uniform_box(6, -2, 2), 10)) EXPECT_EQ(osc.divergence(p), 0.0);

  // Default field has B.grad B = (B^2 - Psi)/B, a function of (Psi, B): div u = 0.
  Dynamics qs(quasisymmetry());
  auto pts = rng.points(quasisymmetry_domain(), 10);
  for (const auto& p : pts) EXPECT_LE(std::abs(qs.divergence(p)), 1e-12);
  Dynamics other(quasisymmetry(pow(x(0), 2.0) + x(1) * x(2), {-x(1), x(0) + x(2), 1.0 + x(2) + x(0)}));
  double worst = 0;
  for (const auto& p : pts) worst = std::max(worst, std::abs(other.divergence(p)));
  EXPECT_GT(worst, 1e-3);

  // Form-route-only systems fall back to central differences.
  SystemSpec form_only = quasisymmetry(pow(x(0), 2.0) + x(1) * x(2), {-x(1), x(0) + x(2), 1.0 + x(2) + x(0)});
  form_only.tensor.reset();
  Dynamics fd(form_only);
  for (const auto& p : pts) EXPECT_NEAR(fd.divergence(p), other.divergence(p), 1e-7);

  VectorField lin{x(0), Expression::constant(0)};
  EXPECT_EQ(evaluate(divergence(lin), std::vector<double>{3, 4}), 1.0);
}

TEST(Csv, HeaderAndDigits) {
  SystemSpec spec = flat_nambu(3, 3);
  Dynamics dyn(spec);
  auto traj = integrate(dyn, std::vector<double>{0.1, 0.2, 1.0 / 3}, 0.02, rk4(1e-2));
  std::ostringstream a, b;
  write_csv(a, traj, spec);
  write_csv(b, integrate(dyn, std::vector<double>{0.1, 0.2, 1.0 / 3}, 0.02, rk4(1e-2)), spec);
  EXPECT_EQ(a.str(), b.str());
  std::istringstream in(a.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x1,x2,x3,H1,H2,div");
  std::getline(in, line);
  EXPECT_EQ(line, "0,0.10000000000000001,0.20000000000000001,0.33333333333333331,0.10000000000000001,"
                  "0.20000000000000001,0");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(Moser, ResidualOfExamples) {
  auto m1 = moser_example_1(2.0);
  Sampler rng(32);
  EXPECT_LE(moser_residual(m1, rng.points(m1.domain, 20)), 1e-12);
  auto m2 = moser_example_2(1.0, 1.0);
  EXPECT_LE(moser_residual(m2, rng.points(m2.domain, 20)), 1e-12);

  MoserProblem neg;
  neg.k = 2;
  neg.w0 = FormField::monomial(2, {0, 1});
  neg.x = {x(0), Expression::constant(0)};
  neg.w = neg.w0 - lie_derivative(neg.x, neg.w0);
  auto pts = rng.points(uniform_box(2, -1, 1), 5);
  EXPECT_GT(moser_residual(neg, pts), 0.5);
  // With Z = Z0 - X the flattening condition reduces to -t L_X^2 w0.
  EXPECT_NEAR(flatc_residual(neg.w0, 2, neg.x, neg.z(), 0.5, pts), 0.5 * moser_residual(neg, pts), 1e-12);
  EXPECT_LE(flatc_residual(m1.w0, 3, m1.x, m1.z(), 0.7, rng.points(m1.domain, 10)), 1e-12);
}

TEST(Moser, TargetIsOneMinusLieDerivative) {
  Sampler rng(33);
  for (const auto& m : {moser_example_1(2.0), moser_example_1(0.5), moser_example_2(1.0, 1.0), moser_example_2(0.3, 2.0)}) {
    FormField expected = m.w0 - lie_derivative(m.x, m.w0);
    for (const auto& p : rng.points(m.domain, 10)) EXPECT_LE(max_abs(evaluate(expected - m.w, p)), 1e-12) << m.name;
  }
}

TEST(Moser, Flattening) {
  auto m1 = moser_example_1(2.0);
  Sampler rng(34);
  auto pts = rng.points(m1.domain, 50);
  EXPECT_LE(verify_flattening(m1, 1.0, pts), 1e-8);
  EXPECT_EQ(verify_flattening(m1, 0.0, pts), 0.0);
  auto few = PointSet(pts.begin(), pts.begin() + 10);
  EXPECT_LE(verify_flattening(m1, 1.0, few, FlowRoute::numeric), 1e-6);
  EXPECT_LE(verify_flattening(m1, 0.0, few, FlowRoute::numeric), 1e-9);
  // Closed-form flow agrees with the integrated one.
  for (const auto& p : few) {
    auto a = m1.closed_form_flow(1.0)(p);
    auto b = flow_point(m1.x, p, 1.0);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
  }
  auto m2 = moser_example_2(1.0, 1.0);
  EXPECT_LE(verify_flattening(m2, 1.0, rng.points(m2.domain, 20)), 1e-8);
  EXPECT_LE(verify_flattening(m2, 0.5, rng.points(m2.domain, 20)), 1e-8);
}
