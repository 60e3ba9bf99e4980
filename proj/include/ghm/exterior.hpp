#pragma once

// Sparse alternating tensors on a single chart of R^n.
//
// Sign conventions
// ----------------
// * Contraction of a basis element against a monomial removes the matching slot s
//   (0-based) with sign (-1)^s. This is the left interior product for both
//   vectors into forms and 1-forms into multivectors.
// * Iterated contraction of a degree-m element a = dx^{i1..im} (or d_{i1..im}) into b
//   applies i1 first and im last, i.e. i_a b = i_{im} ... i_{i1} b. Consequently
//   i_{dx^I} d_{IK} = d_K and, at equal degree, the contraction is the pairing sum_I a_I b_I.
// * For the canonical pair (dx^{1..k}, d_{1..k}):
//     i_{i_X dx^{1..k}} d_{1..k} = (-1)^{k+1} X            (strong_inverse_sign)
//   so the canonical strong inverse of dx^{1..k} is (-1)^{k+1} d_{1..k}.
// * Tensor route X = -i_{dH^1} ... i_{dH^{k-1}} J (dH^{k-1} applied first) and form
//   route i_X w = -dH^1 ^ ... ^ dH^{k-1} differ by order_reversal_sign(k) when J is a
//   strong or Delta-inverse of w. For the canonical pair the overall factor is
//   canonical_route_sign(k): -1 for k = 2, 3 and +1 for k = 4.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "ghm/error.hpp"
#include "ghm/expr.hpp"
#include "ghm/multi_index.hpp"

namespace ghm {

struct Covariant {};
struct Contravariant {};

namespace detail {
inline bool coeff_is_zero(double c) { return c == 0.0; }
inline bool coeff_is_zero(const Expression& c) { return c.is_zero(); }
template <class C>
C coeff_from(double v) {
  if constexpr (std::is_same_v<C, double>) {
    return v;
  } else {
    return Expression::constant(v);
  }
}

inline void check_dimension(int n, int k) {
  if (n < 1 || n > max_dimension)
    throw InvalidArgument("dimension " + std::to_string(n) + " outside 1.." + std::to_string(max_dimension));
  if (k < 0 || k > n) throw InvalidArgument("degree " + std::to_string(k) + " outside 0.." + std::to_string(n));
}
}  // namespace detail

/// Degree-k alternating tensor on R^n, stored sparsely by canonical multi-index.
/// Zero coefficients are never stored.
template <class Variance, class Coeff>
class Alternating {
 public:
  using variance = Variance;
  using coefficient_type = Coeff;
  using Terms = std::map<MultiIndex, Coeff>;

  Alternating() = default;
  Alternating(int n, int k) : n_(n), k_(k) { detail::check_dimension(n, k); }

  static Alternating monomial(int n, const MultiIndex& index, Coeff c = detail::coeff_from<Coeff>(1.0)) {
    Alternating a(n, index.degree());
    a.add(index, std::move(c));
    return a;
  }

  int dimension() const { return n_; }
  int degree() const { return k_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  Coeff operator[](const MultiIndex& index) const {
    auto it = terms_.find(index);
    return it == terms_.end() ? detail::coeff_from<Coeff>(0.0) : it->second;
  }

  void add(const MultiIndex& index, const Coeff& c) {
    if (index.degree() != k_) throw InvalidArgument("multi-index degree does not match tensor degree");
    if (!index.fits(n_)) throw InvalidArgument("multi-index " + index.to_string() + " exceeds dimension");
    if (detail::coeff_is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(index, c);
    if (!inserted) {
      it->second = it->second + c;
      if (detail::coeff_is_zero(it->second)) terms_.erase(it);
    }
  }

  /// Add c times the basis element with the given (unsorted) axes.
  void add_unsorted(std::vector<int> axes, const Coeff& c) {
    auto [index, sign] = sort_with_sign(std::move(axes));
    if (sign == 0) return;
    add(index, sign > 0 ? c : -c);
  }

  Alternating& operator+=(const Alternating& o) {
    check_compatible(o);
    for (const auto& [i, c] : o.terms_) add(i, c);
    return *this;
  }
  Alternating& operator-=(const Alternating& o) {
    check_compatible(o);
    for (const auto& [i, c] : o.terms_) add(i, -c);
    return *this;
  }
  friend Alternating operator+(Alternating a, const Alternating& b) { return a += b; }
  friend Alternating operator-(Alternating a, const Alternating& b) { return a -= b; }
  friend Alternating operator-(const Alternating& a) { return a.scaled(detail::coeff_from<Coeff>(-1.0)); }

  Alternating scaled(const Coeff& s) const {
    Alternating r(n_, k_);
    for (const auto& [i, c] : terms_) r.add(i, s * c);
    return r;
  }

 private:
  void check_compatible(const Alternating& o) const {
    if (o.n_ != n_ || o.k_ != k_) throw InvalidArgument("dimension or degree mismatch in tensor sum");
  }

  int n_ = 1;
  int k_ = 0;
  Terms terms_;
};

using FormValue = Alternating<Covariant, double>;
using MultiVectorValue = Alternating<Contravariant, double>;
using FormField = Alternating<Covariant, Expression>;
using MultiVectorField = Alternating<Contravariant, Expression>;
using VectorValue = std::vector<double>;
using VectorField = std::vector<Expression>;

template <class V>
struct dual_variance;
template <>
struct dual_variance<Covariant> {
  using type = Contravariant;
};
template <>
struct dual_variance<Contravariant> {
  using type = Covariant;
};

inline int strong_inverse_sign(int k) { return k % 2 == 1 ? 1 : -1; }
inline int order_reversal_sign(int k) { return ((k - 1) * (k - 2) / 2) % 2 == 0 ? 1 : -1; }
inline int canonical_route_sign(int k) { return strong_inverse_sign(k) * order_reversal_sign(k); }

// ---------------------------------------------------------------------------
// Algebra

template <class V, class C>
Alternating<V, C> wedge(const Alternating<V, C>& a, const Alternating<V, C>& b) {
  if (a.dimension() != b.dimension()) throw InvalidArgument("wedge: dimension mismatch");
  int n = a.dimension();
  if (a.degree() + b.degree() > n) return Alternating<V, C>(n, 0);
  Alternating<V, C> r(n, a.degree() + b.degree());
  for (const auto& [i, ca] : a.terms()) {
    for (const auto& [j, cb] : b.terms()) {
      std::vector<int> axes(i.begin(), i.end());
      axes.insert(axes.end(), j.begin(), j.end());
      r.add_unsorted(std::move(axes), ca * cb);
    }
  }
  return r;
}

/// Contraction of the basis element along `axis` into b.
template <class V, class C>
Alternating<V, C> contract_basis(int axis, const Alternating<V, C>& b) {
  if (b.degree() < 1) throw InvalidArgument("contraction into a degree-0 tensor");
  Alternating<V, C> r(b.dimension(), b.degree() - 1);
  for (const auto& [i, c] : b.terms()) {
    int s = i.slot_of(axis);
    if (s < 0) continue;
    r.add(i.without_slot(s), s % 2 == 0 ? c : -c);
  }
  return r;
}

/// Iterated contraction i_a b of a degree-m tensor into a degree-k tensor of opposite variance, m <= k.
template <class Va, class Vb, class C>
  requires(!std::is_same_v<Va, Vb>)
Alternating<Vb, C> contract(const Alternating<Va, C>& a, const Alternating<Vb, C>& b) {
  if (a.dimension() != b.dimension()) throw InvalidArgument("contraction: dimension mismatch");
  if (a.degree() > b.degree())
    throw InvalidArgument("contraction: degree " + std::to_string(a.degree()) + " exceeds " +
                          std::to_string(b.degree()));
  Alternating<Vb, C> r(b.dimension(), b.degree() - a.degree());
  for (const auto& [i, ca] : a.terms()) {
    Alternating<Vb, C> cur = b;
    for (int axis : i) cur = contract_basis(axis, cur);
    r += cur.scaled(ca);
  }
  return r;
}

/// i_X w for a vector X (dense components) and a form w.
template <class C>
Alternating<Covariant, C> interior_vector(std::span<const C> x, const Alternating<Covariant, C>& w) {
  if (static_cast<int>(x.size()) != w.dimension()) throw InvalidArgument("interior_vector: dimension mismatch");
  if (w.degree() < 1) throw InvalidArgument("interior_vector: degree-0 form");
  Alternating<Covariant, C> r(w.dimension(), w.degree() - 1);
  for (const auto& [i, c] : w.terms()) {
    for (int s = 0; s < i.degree(); ++s) {
      const C& xs = x[i[s]];
      if (detail::coeff_is_zero(xs)) continue;
      r.add(i.without_slot(s), s % 2 == 0 ? xs * c : -(xs * c));
    }
  }
  return r;
}

template <class C>
Alternating<Covariant, C> interior_vector(const std::vector<C>& x, const Alternating<Covariant, C>& w) {
  return interior_vector(std::span<const C>(x), w);
}

/// i_alpha J for a 1-form alpha and a multivector J.
template <class C>
Alternating<Contravariant, C> interior_form(const Alternating<Covariant, C>& alpha,
                                            const Alternating<Contravariant, C>& j) {
  if (alpha.degree() != 1) throw InvalidArgument("interior_form: expected a 1-form");
  return contract(alpha, j);
}

/// Iterated contraction of a form into a multivector (or the mirror).
template <class Va, class Vb, class C>
Alternating<Vb, C> interior_multi(const Alternating<Va, C>& a, const Alternating<Vb, C>& b) {
  return contract(a, b);
}

template <class C>
C pairing(const Alternating<Contravariant, C>& j, const Alternating<Covariant, C>& w) {
  if (j.dimension() != w.dimension() || j.degree() != w.degree())
    throw InvalidArgument("pairing: dimension or degree mismatch");
  C sum = detail::coeff_from<C>(0.0);
  for (const auto& [i, c] : j.terms()) {
    auto it = w.terms().find(i);
    if (it != w.terms().end()) sum = sum + c * it->second;
  }
  return sum;
}

/// Dense components of a degree-1 tensor.
template <class V, class C>
std::vector<C> components(const Alternating<V, C>& a) {
  if (a.degree() != 1) throw InvalidArgument("components: expected degree 1");
  std::vector<C> out(a.dimension(), detail::coeff_from<C>(0.0));
  for (const auto& [i, c] : a.terms()) out[i[0]] = c;
  return out;
}

template <class V, class C>
Alternating<V, C> from_components(std::span<const C> x) {
  Alternating<V, C> a(static_cast<int>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) a.add(MultiIndex{static_cast<int>(i)}, x[i]);
  return a;
}

template <class V>
double max_abs(const Alternating<V, double>& a) {
  double m = 0.0;
  for (const auto& [i, c] : a.terms()) m = std::max(m, std::abs(c));
  return m;
}

template <class V>
double norm(const Alternating<V, double>& a) {
  double s = 0.0;
  for (const auto& [i, c] : a.terms()) s += c * c;
  return std::sqrt(s);
}

inline double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

template <class V>
std::string to_string(const Alternating<V, double>& a) {
  if (a.is_zero()) return "0";
  std::string s;
  const char* basis = std::is_same_v<V, Covariant> ? "dx^" : "d_";
  for (const auto& [i, c] : a.terms()) {
    if (!s.empty()) s += " + ";
    s += detail::format_number(c) + " " + basis + "{" + i.to_string() + "}";
  }
  return s;
}

// ---------------------------------------------------------------------------
// Fields

template <class V>
Alternating<V, double> evaluate(const Alternating<V, Expression>& f, std::span<const double> x,
                                const Parameters& params = {}) {
  Alternating<V, double> r(f.dimension(), f.degree());
  for (const auto& [i, c] : f.terms()) r.add(i, ghm::evaluate(c, x, params));
  return r;
}

inline VectorValue evaluate(const VectorField& f, std::span<const double> x, const Parameters& params = {}) {
  VectorValue r(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) r[i] = ghm::evaluate(f[i], x, params);
  return r;
}

/// Field with constant coefficients from a value.
template <class V>
Alternating<V, Expression> lift(const Alternating<V, double>& a) {
  Alternating<V, Expression> r(a.dimension(), a.degree());
  for (const auto& [i, c] : a.terms()) r.add(i, Expression::constant(c));
  return r;
}

template <class V>
Alternating<V, Expression> bind(const Alternating<V, Expression>& a, const Parameters& params) {
  Alternating<V, Expression> r(a.dimension(), a.degree());
  for (const auto& [i, c] : a.terms()) r.add(i, ghm::bind(c, params));
  return r;
}

/// Exact differential df as a 1-form field on R^n.
inline FormField differential(const Expression& f, int n) {
  FormField r(n, 1);
  for (int i = 0; i < n; ++i) r.add(MultiIndex{i}, differentiate(f, i));
  return r;
}

inline VectorField gradient(const Expression& f, int n) {
  VectorField g;
  g.reserve(n);
  for (int i = 0; i < n; ++i) g.push_back(differentiate(f, i));
  return g;
}

/// Wedge of the differentials dH^1 ^ ... ^ dH^m.
inline FormField wedge_differentials(std::span<const Expression> fs, int n) {
  FormField r = FormField::monomial(n, MultiIndex{});
  for (const auto& f : fs) r = wedge(r, differential(f, n));
  return r;
}

/// Symbolic exterior derivative.
inline FormField d(const FormField& w) {
  int n = w.dimension();
  if (w.degree() >= n) return FormField(n, n);
  FormField r(n, w.degree() + 1);
  for (const auto& [index, c] : w.terms()) {
    for (int i = 0; i < n; ++i) {
      if (index.contains(i)) continue;
      Expression g = differentiate(c, i);
      if (g.is_zero()) continue;
      std::vector<int> axes{i};
      axes.insert(axes.end(), index.begin(), index.end());
      r.add_unsorted(std::move(axes), g);
    }
  }
  return r;
}

inline FormValue exterior_derivative(const FormField& w, std::span<const double> x) { return evaluate(d(w), x); }

/// Symbolic Lie derivative by Cartan's formula.
inline FormField lie_derivative(const VectorField& x, const FormField& w) {
  if (static_cast<int>(x.size()) != w.dimension()) throw InvalidArgument("lie_derivative: dimension mismatch");
  FormField r(w.dimension(), w.degree());
  if (w.degree() > 0) r += d(interior_vector(x, w));
  if (w.degree() < w.dimension()) r += interior_vector(x, d(w));
  return r;
}

inline FormValue lie_derivative(const VectorField& x, const FormField& w, std::span<const double> p) {
  return evaluate(lie_derivative(x, w), p);
}

/// Directional derivative X(f).
inline Expression directional_derivative(const VectorField& x, const Expression& f) {
  Expression r = Expression::constant(0.0);
  for (std::size_t i = 0; i < x.size(); ++i) r += x[i] * differentiate(f, static_cast<int>(i));
  return r;
}

inline Expression divergence(const VectorField& x) {
  Expression r = Expression::constant(0.0);
  for (std::size_t i = 0; i < x.size(); ++i) r += differentiate(x[i], static_cast<int>(i));
  return r;
}

// ---------------------------------------------------------------------------
// Maps and pullback

/// Smooth map R^n -> R^n given by component expressions; Jacobian by symbolic differentiation.
class PointMap {
 public:
  PointMap() = default;
  explicit PointMap(std::vector<Expression> components) : components_(std::move(components)) {
    int n = static_cast<int>(components_.size());
    jacobian_.resize(n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) jacobian_[a].push_back(differentiate(components_[a], b));
  }

  static PointMap identity(int n) {
    std::vector<Expression> c;
    for (int i = 0; i < n; ++i) c.push_back(Expression::coordinate(i));
    return PointMap(std::move(c));
  }

  int dimension() const { return static_cast<int>(components_.size()); }
  const std::vector<Expression>& components() const { return components_; }

  std::vector<double> operator()(std::span<const double> x) const { return evaluate(components_, x); }

  /// Entry (a, b) is d(phi^a)/d(x^b).
  Eigen::MatrixXd jacobian(std::span<const double> x) const {
    int n = dimension();
    Eigen::MatrixXd j(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) j(a, b) = ghm::evaluate(jacobian_[a][b], x);
    return j;
  }

  /// phi o other
  PointMap compose(const PointMap& other) const { return PointMap(compose_components(other)); }

 private:
  std::vector<Expression> compose_components(const PointMap& other) const {
    std::vector<Expression> c;
    for (const auto& e : components_) c.push_back(substitute(e, other.components_));
    return c;
  }

  std::vector<Expression> components_;
  std::vector<std::vector<Expression>> jacobian_;
};

/// Pullback of a form value through a map with the given Jacobian (rows: target axes,
/// columns: source axes). The result lives on the source space.
inline FormValue pullback(const Eigen::MatrixXd& jacobian, const FormValue& w) {
  int n = w.dimension();
  if (jacobian.rows() != n) throw InvalidArgument("pullback: Jacobian row count must match the form dimension");
  int r = static_cast<int>(jacobian.cols());
  int k = w.degree();
  if (k > r) throw InvalidArgument("pullback: degree exceeds source dimension");
  FormValue out(r, k);
  if (k == 0) {
    out.add(MultiIndex{}, w[MultiIndex{}]);
    return out;
  }
  auto columns = combinations(r, k);
  Eigen::MatrixXd sub(k, k);
  for (const auto& [rows, c] : w.terms()) {
    for (const auto& cols : columns) {
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) sub(a, b) = jacobian(rows[a], cols[b]);
      out.add(cols, c * sub.determinant());
    }
  }
  return out;
}

inline FormValue pullback(const PointMap& phi, const FormValue& w_at_image, std::span<const double> p) {
  return pullback(phi.jacobian(p), w_at_image);
}

inline FormValue pullback(const PointMap& phi, const FormField& w, std::span<const double> p) {
  auto image = phi(p);
  return pullback(phi.jacobian(p), evaluate(w, image));
}

}  // namespace ghm
