#pragma once

// Built-in systems and flattening problems.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ghm/dynamics.hpp"
#include "ghm/error.hpp"
#include "ghm/exterior.hpp"
#include "ghm/sampling.hpp"

namespace ghm {

namespace detail {

inline Expression coord(int i) { return Expression::coordinate(i); }

inline FormField dx(int n, MultiIndex i, Expression c = Expression::constant(1.0)) {
  return FormField::monomial(n, i, std::move(c));
}

inline MultiVectorField dd(int n, MultiIndex i, Expression c = Expression::constant(1.0)) {
  return MultiVectorField::monomial(n, i, std::move(c));
}

inline double parameter_or(const Parameters& p, std::string_view name, double fallback) {
  auto it = p.find(name);
  return it == p.end() ? fallback : it->second;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Two coupled semiclassical oscillators on (p1, q1, xi1, p2, q2, xi2)

inline Expression oscillator_energy(double lambda) {
  using detail::coord;
  return 0.5 * (pow(coord(0), 2.0) + pow(coord(3), 2.0) + coord(2) + coord(5)) + lambda * coord(1) * coord(5);
}

inline Expression oscillator_g1() { return detail::coord(2) - pow(detail::coord(1), 2.0); }
inline Expression oscillator_g2() { return detail::coord(5) - pow(detail::coord(4), 2.0); }

/// The six equations of motion written out directly.
inline VectorField oscillator_equations(double lambda) {
  using detail::coord;
  return {-coord(1) - lambda * coord(5), coord(0), 2.0 * coord(1) * coord(0),
          -coord(4) - 2.0 * lambda * coord(1) * coord(4), coord(3), 2.0 * coord(4) * coord(3)};
}

inline MultiVectorField oscillator_tensor() { return detail::dd(6, {0, 1, 2}) + detail::dd(6, {3, 4, 5}); }

/// w = (dp1^dq1 + dp2^dq2) ^ dG2
inline FormField oscillator_form() {
  FormField omega = detail::dx(6, {0, 1}) + detail::dx(6, {3, 4});
  return wedge(omega, differential(oscillator_g2(), 6));
}

inline SystemSpec oscillator(double lambda = 0.1) {
  SystemSpec s;
  s.name = "oscillator";
  s.summary = "two coupled semiclassical oscillators, Casimirs G1 and G2";
  s.n = 6;
  s.k = 3;
  s.aliases = {"p1", "q1", "xi1", "p2", "q2", "xi2"};
  s.params = {{"lambda", lambda}};
  s.domain = uniform_box(6, -50, 50);
  s.base_point = {0, 1, 1, 0, 0, 2};
  Expression h = oscillator_energy(lambda), g1 = oscillator_g1(), g2 = oscillator_g2();
  s.hamiltonians = {{"H", h}, {"G", g1 + g2}};
  s.invariants = {{"G1", g1}, {"G2", g2}};
  s.tensor = TensorRoute{oscillator_tensor(), {g1 + g2, h}};
  s.form = FormRoute{oscillator_form(), {h - 0.5 * g1, g2}};
  s.route_sign = 1;
  s.density = Expression::constant(1.0);
  return s;
}

// ---------------------------------------------------------------------------
// Four-dimensional system whose 2-tensor fails the Jacobi identity

struct FourDimStructure {
  MultiVectorField bivector;  // (1/x4)(d_21 + d_43)
  FormField omega;            // x4 (dx^12 + dx^34)
  FormField w3;               // omega ^ dx4
  FormField w4;               // omega ^ dx3 ^ dx4
};

inline FourDimStructure fourdim_structure() {
  using detail::coord;
  Expression inv = -1.0 / coord(3);
  FourDimStructure f;
  f.bivector = detail::dd(4, {0, 1}, inv) + detail::dd(4, {2, 3}, inv);
  f.omega = detail::dx(4, {0, 1}, coord(3)) + detail::dx(4, {2, 3}, coord(3));
  f.w3 = wedge(f.omega, detail::dx(4, {3}));
  f.w4 = wedge(f.w3, detail::dx(4, {2})).scaled(Expression::constant(-1.0));
  return f;
}

inline Box fourdim_domain() { return {{-10, 10}, {-10, 10}, {-10, 10}, {0.1, 10}}; }

/// k=3 route with C = x4. H must not depend on x3.
inline SystemSpec fourdim(const Expression& h = detail::coord(0)) {
  if (!differentiate(h, 2).is_zero())
    throw InvalidArgument("fourdim: H must not depend on x3, got " + to_string(h));
  auto st = fourdim_structure();
  SystemSpec s;
  s.name = "fourdim";
  s.summary = "R^4 with a non-Jacobi 2-tensor, closed 3-form w = omega ^ dx4";
  s.n = 4;
  s.k = 3;
  s.domain = fourdim_domain();
  s.base_point = {1, 1, 1, 2};
  s.hamiltonians = {{"H", h}, {"C", detail::coord(3)}};
  s.tensor = TensorRoute{st.bivector, {h}};
  s.form = FormRoute{st.w3, {h, detail::coord(3)}};
  s.route_sign = 1;
  s.density = detail::coord(3);
  return s;
}

/// k=4 route with C = (x3, x4). H must not depend on x4; with x3 dependence only the form route applies.
inline SystemSpec fourdim_k4(const Expression& h = detail::coord(0)) {
  if (!differentiate(h, 3).is_zero()) throw InvalidArgument("fourdim_k4: H must not depend on x4, got " + to_string(h));
  bool frozen_x3 = !differentiate(h, 2).is_zero();
  SystemSpec s = fourdim(frozen_x3 ? detail::coord(0) : h);
  if (frozen_x3) s.tensor.reset();
  s.name = "fourdim_k4";
  s.summary = "R^4 top form w4 = omega ^ dx3 ^ dx4, classical on x3, x4 level sets";
  s.k = 4;
  s.hamiltonians = {{"H", h}, {"C3", detail::coord(2)}, {"C4", detail::coord(3)}};
  s.form = FormRoute{fourdim_structure().w4, {h, detail::coord(2), detail::coord(3)}};
  return s;
}

// ---------------------------------------------------------------------------
// Quasisymmetry u = grad Psi x grad B / (B . grad B)

struct QuasisymmetryFields {
  Expression psi;
  std::vector<Expression> bvec;
  Expression b;           // |Bvec|
  Expression b_dot_grad;  // Bvec . grad B
  VectorField u;
};

inline QuasisymmetryFields quasisymmetry_fields(const Expression& psi, const std::vector<Expression>& bvec) {
  if (bvec.size() != 3) throw InvalidArgument("quasisymmetry: B needs 3 components");
  QuasisymmetryFields q{psi, bvec, {}, {}, {}};
  q.b = sqrt(pow(bvec[0], 2.0) + pow(bvec[1], 2.0) + pow(bvec[2], 2.0));
  auto gb = gradient(q.b, 3);
  auto gp = gradient(psi, 3);
  q.b_dot_grad = bvec[0] * gb[0] + bvec[1] * gb[1] + bvec[2] * gb[2];
  q.u = {(gp[1] * gb[2] - gp[2] * gb[1]) / q.b_dot_grad, (gp[2] * gb[0] - gp[0] * gb[2]) / q.b_dot_grad,
         (gp[0] * gb[1] - gp[1] * gb[0]) / q.b_dot_grad};
  return q;
}

inline Box quasisymmetry_domain() { return {{0.5, 1.5}, {0.5, 1.5}, {0, 1}}; }

inline SystemSpec quasisymmetry(const Expression& psi, const std::vector<Expression>& bvec,
                                const Box& domain = quasisymmetry_domain(), int samples = 50) {
  auto q = quasisymmetry_fields(psi, bvec);
  Sampler rng(0);
  auto gp = gradient(psi, 3), gb = gradient(q.b, 3);
  for (const auto& p : rng.points(domain, samples)) {
    double den = evaluate(q.b_dot_grad, p);
    if (!(std::abs(den) > 1e-10)) throw InvalidArgument("quasisymmetry: B.grad B vanishes at " + detail::point_string(p));
    auto a = evaluate(gp, p), b = evaluate(gb, p);
    double cx = a[1] * b[2] - a[2] * b[1], cy = a[2] * b[0] - a[0] * b[2], cz = a[0] * b[1] - a[1] * b[0];
    if (!(std::hypot(cx, cy, cz) > 1e-10))
      throw InvalidArgument("quasisymmetry: grad Psi x grad B vanishes at " + detail::point_string(p));
  }
  SystemSpec s;
  s.name = "quasisymmetry";
  s.summary = "quasisymmetry of a magnetic field, Hamiltonians Psi and |B|";
  s.n = 3;
  s.k = 3;
  s.domain = domain;
  for (const auto& [lo, hi] : domain) s.base_point.push_back(0.5 * (lo + hi));
  s.hamiltonians = {{"Psi", psi}, {"B", q.b}};
  s.form = FormRoute{detail::dx(3, {0, 1, 2}, -q.b_dot_grad), {psi, q.b}};
  s.tensor = TensorRoute{detail::dd(3, {0, 1, 2}, 1.0 / q.b_dot_grad), {psi, q.b}};
  s.route_sign = 1;
  s.density = q.b_dot_grad;
  return s;
}

/// Psi = x1^2 + x2^2, B = (-x2, x1, 1 + x3)
inline std::pair<Expression, std::vector<Expression>> quasisymmetry_default_field() {
  using detail::coord;
  return {pow(coord(0), 2.0) + pow(coord(1), 2.0), {-coord(1), coord(0), 1.0 + coord(2)}};
}

inline SystemSpec quasisymmetry() {
  auto [psi, b] = quasisymmetry_default_field();
  return quasisymmetry(psi, b);
}

// ---------------------------------------------------------------------------
// Flat canonical systems

inline SystemSpec flat_nambu(int n, int k) {
  if (k < 2 || n < k || n > max_dimension) throw InvalidArgument("flat_nambu: need 2 <= k <= n <= 12");
  std::vector<int> axes(k);
  for (int i = 0; i < k; ++i) axes[i] = i;
  SystemSpec s;
  s.name = "flat_nambu";
  s.summary = "constant w = dx^{1..k} and J = d_{1..k}, linear Hamiltonians";
  s.n = n;
  s.k = k;
  s.params = {{"n", n}, {"k", k}};
  s.domain = uniform_box(n, -1, 1);
  s.base_point.assign(n, 0.0);
  std::vector<Expression> hs;
  for (int i = 0; i < k - 1; ++i) {
    hs.push_back(detail::coord(i));
    s.hamiltonians.push_back({"H" + std::to_string(i + 1), detail::coord(i)});
  }
  s.form = FormRoute{detail::dx(n, MultiIndex(axes)), hs};
  s.tensor = TensorRoute{detail::dd(n, MultiIndex(axes)), hs};
  s.route_sign = canonical_route_sign(k);
  s.density = Expression::constant(1.0);
  return s;
}

// ---------------------------------------------------------------------------
// Moser flattening examples

inline MoserProblem moser_example_1(double f = 2.0) {
  if (!(f > 0)) throw InvalidArgument("moser1: f must be positive");
  using detail::coord;
  MoserProblem m;
  m.name = "moser1";
  m.k = 3;
  m.w0 = detail::dx(4, {0, 1, 2}) + detail::dx(4, {0, 1, 3});
  Expression s = coord(2) + coord(3);
  Expression speed = sqrt(s * (f / 2));
  m.x = {Expression::constant(0), Expression::constant(0), speed, speed};
  m.w = m.w0 - wedge(detail::dx(4, {0, 1}), differential(sqrt(2 * f * s), 4));
  m.domain = {{-1, 1}, {-1, 1}, {0.05, 1.05}, {0.05, 1.05}};
  double c = std::sqrt(f / 2);
  m.closed_form_flow = [c](double t) {
    Expression shift = c * t * sqrt(coord(2) + coord(3)) + 0.5 * c * c * t * t;
    return PointMap({coord(0), coord(1), coord(2) + shift, coord(3) + shift});
  };
  return m;
}

inline MoserProblem moser_example_2(double f = 1.0, double g = 1.0) {
  if (!(f > 0) || !(g > 0)) throw InvalidArgument("moser2: f and g must be positive");
  using detail::coord;
  MoserProblem m;
  m.name = "moser2";
  m.k = 4;
  m.w0 = detail::dx(6, {0, 1, 2, 3}) + detail::dx(6, {0, 1, 4, 5});
  Expression s = coord(2) + coord(3), r = coord(4) + coord(5);
  Expression zero = Expression::constant(0);
  m.x = {zero, zero, f * sqrt(s), f * sqrt(s), g * sqrt(r), g * sqrt(r)};
  m.w = m.w0 - detail::dx(6, {0, 1, 2, 3}, f / sqrt(s)) - detail::dx(6, {0, 1, 4, 5}, g / sqrt(r));
  m.domain = {{-1, 1}, {-1, 1}, {0.05, 1.05}, {0.05, 1.05}, {0.05, 1.05}, {0.05, 1.05}};
  m.closed_form_flow = [f, g](double t) {
    Expression a = f * t * sqrt(coord(2) + coord(3)) + 0.5 * f * f * t * t;
    Expression b = g * t * sqrt(coord(4) + coord(5)) + 0.5 * g * g * t * t;
    return PointMap({coord(0), coord(1), coord(2) + a, coord(3) + a, coord(4) + b, coord(5) + b});
  };
  return m;
}

// ---------------------------------------------------------------------------
// Catalog

struct ParameterDefault {
  std::string name;
  double value;
};

struct CatalogEntry {
  std::string name;
  std::string summary;
  int n = 0;  // 0 when set by a parameter
  int k = 0;
  std::vector<ParameterDefault> parameters;
  bool custom_hamiltonian = false;  // make() honours a user H
  std::function<SystemSpec(const Parameters&, const std::optional<Expression>&)> make;
};

struct MoserEntry {
  std::string name;
  std::string summary;
  std::vector<ParameterDefault> parameters;
  std::function<MoserProblem(const Parameters&)> make;
};

inline const std::vector<CatalogEntry>& system_catalog() {
  using detail::parameter_or;
  static const std::vector<CatalogEntry> entries = {
      {"oscillator", oscillator().summary, 6, 3, {{"lambda", 0.1}}, false,
       [](const Parameters& p, const std::optional<Expression>&) { return oscillator(parameter_or(p, "lambda", 0.1)); }},
      {"fourdim", fourdim().summary, 4, 3, {}, true,
       [](const Parameters&, const std::optional<Expression>& h) { return h ? fourdim(*h) : fourdim(); }},
      {"fourdim_k4", fourdim_k4().summary, 4, 4, {}, true,
       [](const Parameters&, const std::optional<Expression>& h) { return h ? fourdim_k4(*h) : fourdim_k4(); }},
      {"quasisymmetry", quasisymmetry().summary, 3, 3, {}, false,
       [](const Parameters&, const std::optional<Expression>&) { return quasisymmetry(); }},
      {"flat_nambu", flat_nambu(3, 3).summary, 0, 0, {{"n", 3}, {"k", 3}}, false,
       [](const Parameters& p, const std::optional<Expression>&) {
         return flat_nambu(static_cast<int>(parameter_or(p, "n", 3)), static_cast<int>(parameter_or(p, "k", 3)));
       }},
  };
  return entries;
}

inline const std::vector<MoserEntry>& moser_catalog() {
  using detail::parameter_or;
  static const std::vector<MoserEntry> entries = {
      {"moser1", "flattening of dx^123 + dx^124 on R^4", {{"f", 2.0}},
       [](const Parameters& p) { return moser_example_1(parameter_or(p, "f", 2.0)); }},
      {"moser2", "flattening of dx^1234 + dx^1256 on R^6", {{"f", 1.0}, {"g", 1.0}},
       [](const Parameters& p) { return moser_example_2(parameter_or(p, "f", 1.0), parameter_or(p, "g", 1.0)); }},
  };
  return entries;
}

inline const CatalogEntry* find_system(std::string_view name) {
  for (const auto& e : system_catalog())
    if (e.name == name) return &e;
  return nullptr;
}

inline const MoserEntry* find_moser(std::string_view name) {
  for (const auto& e : moser_catalog())
    if (e.name == name) return &e;
  return nullptr;
}

}  // namespace ghm
