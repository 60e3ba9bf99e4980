#pragma once

// Shared fixtures for the test suites: random inputs and independent oracles.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "ghm/exterior.hpp"
#include "ghm/sampling.hpp"

namespace ghm::test {

/// Random expression that is smooth on the positive orthant.
inline Expression random_expression(Sampler& rng, int n, int depth) {
  if (depth == 0 || rng.uniform() < 0.2) {
    if (rng.uniform() < 0.3) return Expression::constant(std::round(rng.uniform(-3, 3) * 4) / 4 + 0.5);
    return Expression::coordinate(rng.integer(0, n - 1));
  }
  int kind = rng.integer(0, 9);
  Expression a = random_expression(rng, n, depth - 1);
  switch (kind) {
    case 0:
      return a + random_expression(rng, n, depth - 1);
    case 1:
      return a - random_expression(rng, n, depth - 1);
    case 2:
    case 3:
      return a * random_expression(rng, n, depth - 1);
    case 4:
      return a / (2.0 + pow(random_expression(rng, n, depth - 1), 2.0));
    case 5:
      return pow(a, static_cast<double>(rng.integer(2, 3)));
    case 6:
      return sin(a);
    case 7:
      return exp(cos(a));
    case 8:
      return sqrt(1.0 + pow(a, 2.0));
    default:
      return log(2.0 + sin(a));
  }
}

/// Random polynomial with small integer coefficients.
inline Expression random_polynomial(Sampler& rng, int n, int max_degree, int terms) {
  Expression e = Expression::constant(0.0);
  for (int t = 0; t < terms; ++t) {
    Expression m = Expression::constant(static_cast<double>(rng.integer(-3, 3)));
    int deg = rng.integer(0, max_degree);
    for (int d = 0; d < deg; ++d) m = m * Expression::coordinate(rng.integer(0, n - 1));
    e = e + m;
  }
  return e;
}

template <class V>
Alternating<V, double> random_value(Sampler& rng, int n, int k, double density = 0.7) {
  Alternating<V, double> a(n, k);
  for (const auto& i : combinations(n, k))
    if (rng.uniform() < density) a.add(i, rng.uniform(-1, 1));
  return a;
}

inline FormField random_form_field(Sampler& rng, int n, int k, int degree = 2) {
  FormField a(n, k);
  for (const auto& i : combinations(n, k))
    if (rng.uniform() < 0.6) a.add(i, random_polynomial(rng, n, degree, 3));
  return a;
}

inline std::vector<double> random_vector(Sampler& rng, int n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-1, 1);
  return x;
}

/// Dense fully antisymmetric array representation, indexed by all n^k tuples.
/// Built by explicit permutation expansion; shares no code with the sparse algebra.
struct Dense {
  int n = 0;
  int k = 0;
  std::vector<double> data;

  Dense(int n_, int k_) : n(n_), k(k_), data(static_cast<std::size_t>(std::pow(n_, k_)), 0.0) {}

  std::size_t offset(const std::vector<int>& t) const {
    std::size_t o = 0;
    for (int v : t) o = o * n + v;
    return o;
  }
  double& at(const std::vector<int>& t) { return data[offset(t)]; }
  double at(const std::vector<int>& t) const { return data[offset(t)]; }
};

inline int permutation_parity(const std::vector<int>& perm) {
  // Cycle decomposition parity.
  std::vector<bool> seen(perm.size(), false);
  int sign = 1;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = perm[j]) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

template <class V>
Dense to_dense(const Alternating<V, double>& a) {
  Dense d(a.dimension(), a.degree());
  int k = a.degree();
  for (const auto& [idx, c] : a.terms()) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<int> t(k);
      for (int s = 0; s < k; ++s) t[s] = idx[perm[s]];
      d.at(t) = permutation_parity(perm) * c;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return d;
}

inline void for_each_tuple(int n, int k, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> t(k, 0);
  while (true) {
    f(t);
    int i = k - 1;
    while (i >= 0 && t[i] == n - 1) t[i--] = 0;
    if (i < 0) return;
    ++t[i];
  }
}

/// Left contraction of a vector into the first slot of a dense tensor: (i_X T)_{b..} = X^a T_{a b..}.
inline Dense dense_contract_first(const std::vector<double>& x, const Dense& t) {
  Dense r(t.n, t.k - 1);
  for_each_tuple(t.n, t.k - 1, [&](const std::vector<int>& rest) {
    double s = 0;
    for (int a = 0; a < t.n; ++a) {
      std::vector<int> full{a};
      full.insert(full.end(), rest.begin(), rest.end());
      s += x[a] * t.at(full);
    }
    r.at(rest) = s;
  });
  return r;
}

inline double dense_max_diff(const Dense& a, const Dense& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

inline double central_difference(const Expression& e, std::vector<double> x, int axis, double h = 1e-5) {
  double x0 = x[axis];
  x[axis] = x0 + h;
  double fp = evaluate(e, x);
  x[axis] = x0 - h;
  double fm = evaluate(e, x);
  return (fp - fm) / (2 * h);
}

}  // namespace ghm::test
