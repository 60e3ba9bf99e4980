#pragma once

// Residual checkers for Jacobi, fundamental identity, closure and invariant measures.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghm/error.hpp"
#include "ghm/exterior.hpp"
#include "ghm/sampling.hpp"
#include "ghm/structure.hpp"

namespace ghm {

struct IdentityReport {
  std::string name;
  double max_residual = 0.0;
  double signed_value = 0.0;   // value at argmax, before taking |.|
  std::vector<double> point;   // argmax point
  std::vector<int> indices;    // argmax index tuple, 0-based
  std::string part;            // sub-identity attaining the max, if any
  int samples = 0;
  double tolerance = 1e-9;
  bool pass = true;

  void record(double value, std::span<const double> x, std::span<const int> idx, std::string_view sub = {}) {
    if (!point.empty() && std::abs(value) <= max_residual) return;
    max_residual = std::abs(value);
    signed_value = value;
    point.assign(x.begin(), x.end());
    indices.assign(idx.begin(), idx.end());
    part = sub;
  }

  void finish(double tol) {
    tolerance = tol;
    pass = max_residual <= tol;
  }
};

namespace detail {

/// Dense array of an alternating tensor, all n^k slots filled with signs.
class DenseTensor {
 public:
  DenseTensor(const MultiVectorValue& j) : n_(j.dimension()), k_(j.degree()) {
    std::size_t size = 1;
    for (int i = 0; i < k_; ++i) size *= static_cast<std::size_t>(n_);
    data_.assign(size, 0.0);
    for (const auto& [idx, c] : j.terms()) {
      std::vector<int> perm(k_);
      std::iota(perm.begin(), perm.end(), 0);
      do {
        int sign = 1;
        for (int a = 0; a < k_; ++a)
          for (int b = a + 1; b < k_; ++b)
            if (perm[a] > perm[b]) sign = -sign;
        std::size_t off = 0;
        for (int s = 0; s < k_; ++s) off = off * n_ + idx[perm[s]];
        data_[off] = sign * c;
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }

  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j, int l) const {
    return data_[(static_cast<std::size_t>(i) * n_ + j) * n_ + l];
  }

 private:
  int n_, k_;
  std::vector<double> data_;
};

inline std::vector<MultiVectorField> partials(const MultiVectorField& j) {
  std::vector<MultiVectorField> out;
  for (int m = 0; m < j.dimension(); ++m) {
    MultiVectorField dj(j.dimension(), j.degree());
    for (const auto& [idx, c] : j.terms()) dj.add(idx, differentiate(c, m));
    out.push_back(std::move(dj));
  }
  return out;
}

inline std::vector<DenseTensor> dense_partials(const std::vector<MultiVectorField>& dj, std::span<const double> x) {
  std::vector<DenseTensor> out;
  out.reserve(dj.size());
  for (const auto& f : dj) out.emplace_back(evaluate(f, x));
  return out;
}

inline double cyclic_sum(const DenseTensor& j, const std::vector<DenseTensor>& dj, int a, int b, int c) {
  int n = static_cast<int>(dj.size());
  double s = 0.0;
  for (int m = 0; m < n; ++m) s += j(a, m) * dj[m](b, c) + j(b, m) * dj[m](c, a) + j(c, m) * dj[m](a, b);
  return s;
}

/// Trailing-slot 2-tensor J^{ij r..n}, r..n the last k-2 axes.
inline MultiVectorField adapted_two_tensor(const MultiVectorField& j) {
  int n = j.dimension(), k = j.degree();
  std::vector<int> tail;
  for (int a = n - (k - 2); a < n; ++a) tail.push_back(a);
  MultiVectorField out(n, 2);
  for (const auto& [idx, c] : j.terms()) {
    std::vector<int> head;
    bool has_tail = true;
    for (int a : tail) has_tail = has_tail && idx.contains(a);
    if (!has_tail) continue;
    for (int a : idx)
      if (std::find(tail.begin(), tail.end(), a) == tail.end()) head.push_back(a);
    // idx = sorted(head ++ tail); head is already before tail in sorted order
    out.add(MultiIndex(head), c);
  }
  return out;
}

}  // namespace detail

/// Signed cyclic sum J^{am}d_m J^{bc} + J^{bm}d_m J^{ca} + J^{cm}d_m J^{ab} at one point.
inline double jacobi_cyclic_sum(const MultiVectorField& j, std::span<const double> x, int a, int b, int c) {
  if (j.degree() != 2) throw InvalidArgument("jacobi: expected a 2-vector");
  detail::DenseTensor jd(evaluate(j, x));
  return detail::cyclic_sum(jd, detail::dense_partials(detail::partials(j), x), a, b, c);
}

inline IdentityReport jacobi_residual(const MultiVectorField& j, const PointSet& points, double tolerance = 1e-9) {
  if (j.degree() != 2) throw InvalidArgument("jacobi: expected a 2-vector, got degree " + std::to_string(j.degree()));
  int n = j.dimension();
  IdentityReport r;
  r.name = "jacobi";
  auto dj = detail::partials(j);
  for (const auto& p : points) {
    detail::DenseTensor jd(evaluate(j, p));
    auto djd = detail::dense_partials(dj, p);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        for (int c = b + 1; c < n; ++c) {
          int idx[] = {a, b, c};
          r.record(detail::cyclic_sum(jd, djd, a, b, c), p, idx);
        }
    ++r.samples;
  }
  r.finish(tolerance);
  return r;
}

/// Local Jacobi condition for a k-vector written in coordinates whose last k-2 axes are the Casimirs.
inline IdentityReport jacobi_k_residual(const MultiVectorField& j, bool adapted, const PointSet& points,
                                        double tolerance = 1e-9) {
  if (j.degree() < 2) throw InvalidArgument("jacobi_k: degree must be >= 2");
  if (!adapted) throw InvalidArgument("jacobi_k: coordinates must be adapted to the Casimirs (or pass the Casimirs)");
  IdentityReport r = jacobi_residual(detail::adapted_two_tensor(j), points, tolerance);
  r.name = "jacobi_k";
  return r;
}

/// Same check in arbitrary coordinates: reduce with the Casimirs first.
inline IdentityReport jacobi_k_residual(const MultiVectorField& j, std::span<const Expression> casimirs,
                                        const PointSet& points, double tolerance = 1e-9) {
  if (static_cast<int>(casimirs.size()) != j.degree() - 2)
    throw InvalidArgument("jacobi_k: need k-2 Casimirs");
  IdentityReport r = jacobi_residual(reduce_k_to_2(j, casimirs), points, tolerance);
  r.name = "jacobi_k";
  return r;
}

namespace detail {

inline double fi_a(const DenseTensor& j, const std::vector<DenseTensor>& dj, int i, int jj, int k, int v, int q) {
  double s = 0.0;
  for (int u = 0; u < static_cast<int>(dj.size()); ++u)
    s += j(u, v, q) * dj[u](i, jj, k) - j(u, jj, k) * dj[u](i, v, q) - j(u, k, i) * dj[u](jj, v, q) -
         j(u, i, jj) * dj[u](k, v, q);
  return s;
}

inline double fi_b_term(const DenseTensor& j, int i, int jj, int k, int u, int v, int q) {
  return j(i, jj, k) * j(u, v, q) + j(q, jj, k) * j(u, i, v) + j(u, jj, k) * j(i, q, v);
}

// FIb is the coefficient of the second derivative d_j d_v of one argument, so it is taken symmetric in (j, v).
// Unsymmetrized, the display is nonzero even for d_123 at (1,1,2,2,3,3).
inline double fi_b(const DenseTensor& j, int i, int jj, int k, int u, int v, int q) {
  return fi_b_term(j, i, jj, k, u, v, q) + fi_b_term(j, i, v, k, u, jj, q);
}

}  // namespace detail

/// Symmetrized FIb at one tuple (i,j,k,u,v,q), 0-based.
inline double fundamental_identity_b(const MultiVectorField& j, std::span<const double> x, std::array<int, 6> t) {
  if (j.degree() != 3) throw InvalidArgument("fundamental identity: expected a 3-vector");
  detail::DenseTensor jd(evaluate(j, x));
  return detail::fi_b(jd, t[0], t[1], t[2], t[3], t[4], t[5]);
}

/// FIa (per i,j,k,v,q; u summed) and FIb (per i,j,k,u,v,q), scanned exhaustively.
inline IdentityReport fundamental_identity_residual(const MultiVectorField& j, const PointSet& points,
                                                    double tolerance = 1e-9) {
  if (j.degree() != 3)
    throw InvalidArgument("fundamental identity: expected a 3-vector, got degree " + std::to_string(j.degree()));
  int n = j.dimension();
  IdentityReport r;
  r.name = "fundamental_identity";
  auto dj = detail::partials(j);
  bool constant = std::all_of(j.terms().begin(), j.terms().end(), [](const auto& t) { return t.second.is_constant(); });
  for (const auto& p : points) {
    detail::DenseTensor jd(evaluate(j, p));
    if (!constant) {
      auto djd = detail::dense_partials(dj, p);
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < n; ++a)
          for (int k = 0; k < n; ++k)
            for (int v = 0; v < n; ++v)
              for (int q = 0; q < n; ++q) {
                int idx[] = {i, a, k, v, q};
                r.record(detail::fi_a(jd, djd, i, a, k, v, q), p, idx, "FIa");
              }
    }
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a)
        for (int k = 0; k < n; ++k)
          for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
              for (int q = 0; q < n; ++q) {
                int idx[] = {i, a, k, u, v, q};
                r.record(detail::fi_b(jd, i, a, k, u, v, q), p, idx, "FIb");
              }
    ++r.samples;
  }
  r.finish(tolerance);
  return r;
}

inline IdentityReport closure_residual(const FormField& w, const PointSet& points, double tolerance = 1e-9) {
  IdentityReport r;
  r.name = "closure";
  FormField dw = d(w);
  for (const auto& p : points) {
    if (r.point.empty()) r.record(0.0, p, {});
    FormValue v = evaluate(dw, p);
    for (const auto& [idx, c] : v.terms()) r.record(c, p, idx.axes());
    ++r.samples;
  }
  r.finish(tolerance);
  return r;
}

/// (k-1)-vector with components sum_i d_i(g J^{i K}).
inline MultiVectorField divergence_multivector(const MultiVectorField& j, const Expression& g) {
  if (j.degree() < 1) throw InvalidArgument("divergence of a degree-0 tensor");
  MultiVectorField out(j.dimension(), j.degree() - 1);
  for (const auto& [idx, c] : j.terms()) {
    Expression gc = g * c;
    for (int s = 0; s < idx.degree(); ++s) {
      Expression term = differentiate(gc, idx[s]);
      out.add(idx.without_slot(s), s % 2 == 0 ? term : -term);
    }
  }
  return out;
}

inline IdentityReport measure_residual(const MultiVectorField& j, const Expression& g, const PointSet& points,
                                       double tolerance = 1e-9) {
  IdentityReport r;
  r.name = "measure";
  MultiVectorField div = divergence_multivector(j, g);
  for (const auto& p : points) {
    double gv = evaluate(g, p);
    if (std::abs(gv) <= 1e-14) throw DomainError("measure density vanishes at " + detail::point_string(p));
    if (r.point.empty()) r.record(0.0, p, {});
    MultiVectorValue v = evaluate(div, p);
    for (const auto& [idx, c] : v.terms()) r.record(c, p, idx.axes());
    ++r.samples;
  }
  r.finish(tolerance);
  return r;
}

/// Divergence-free extension of a 3-vector to R^{n+1}: adds -x^{n+1} (d_m J^{mij}) d_{ij(n+1)}.
inline MultiVectorField extend_measure_preserving(const MultiVectorField& j) {
  if (j.degree() != 3) throw InvalidArgument("extend_measure_preserving: expected a 3-vector");
  int n = j.dimension();
  if (n + 1 > max_dimension) throw InvalidArgument("extend_measure_preserving: dimension too large");
  MultiVectorField out(n + 1, 3);
  for (const auto& [idx, c] : j.terms()) out.add(idx, c);
  Expression extra = Expression::coordinate(n);
  MultiVectorField div = divergence_multivector(j, Expression::constant(1.0));
  for (const auto& [idx, c] : div.terms())
    out.add(MultiIndex({idx[0], idx[1], n}), -(extra * c));
  return out;
}

}  // namespace ghm
