#pragma once

// Pointwise solution of i_X w = -sigma.

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "ghm/error.hpp"
#include "ghm/exterior.hpp"
#include "ghm/linalg.hpp"

namespace ghm {

/// Necessary condition n >= C(n, k-1) for the hat-map X -> i_X w to be onto.
inline bool obstruction_check(int n, int k) {
  if (k < 2 || n < k) throw InvalidArgument("need n >= k >= 2, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  return n >= binomial(n, k - 1);
}

/// Matrix of X -> i_X w. Rows are the lexicographic (k-1)-indices; column j holds i_{d_j} w.
struct HatMap {
  Eigen::MatrixXd matrix;
  std::vector<MultiIndex> rows;
};

inline Eigen::VectorXd coefficient_vector(const FormValue& a, const std::vector<MultiIndex>& rows) {
  Eigen::VectorXd v(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) v(r) = a[rows[r]];
  return v;
}

inline HatMap assemble_hatmap(const FormValue& w) {
  int n = w.dimension(), k = w.degree();
  if (k < 1) throw InvalidArgument("hat-map needs a form of degree >= 1");
  HatMap h;
  h.rows = combinations(n, k - 1);
  h.matrix = Eigen::MatrixXd::Zero(h.rows.size(), n);
  for (int j = 0; j < n; ++j) h.matrix.col(j) = coefficient_vector(contract_basis(j, w), h.rows);
  return h;
}

inline HatMap assemble_hatmap(const FormField& w, std::span<const double> x) { return assemble_hatmap(evaluate(w, x)); }

struct SolveReport {
  std::optional<VectorValue> x;
  double residual = 0.0;
  int rank = 0;
  int kernel_dim = 0;
  bool unique = false;
  bool surjectivity_possible = false;
  bool consistent = false;
  double tolerance = 1e-9;
};

/// Minimum-norm least-squares X for i_X w = -sigma. Inconsistency is reported, not thrown.
inline SolveReport solve_hdw(const FormValue& w, const FormValue& sigma, double tolerance = 1e-9) {
  int n = w.dimension(), k = w.degree();
  if (sigma.dimension() != n || sigma.degree() != k - 1)
    throw InvalidArgument("solve_hdw: sigma must have degree k-1 on the same space");
  HatMap h = assemble_hatmap(w);
  Eigen::VectorXd s = coefficient_vector(sigma, h.rows);
  LeastSquares ls = min_norm_solve(h.matrix, -s);
  SolveReport r;
  r.tolerance = tolerance;
  r.x = VectorValue(ls.x.data(), ls.x.data() + n);
  r.residual = (h.matrix * ls.x + s).norm();
  r.rank = ls.rank;
  r.kernel_dim = n - ls.rank;
  r.consistent = r.residual <= tolerance * (1.0 + s.norm());
  r.unique = r.consistent && r.kernel_dim == 0;
  r.surjectivity_possible = k >= 2 ? obstruction_check(n, k) : true;
  return r;
}

inline SolveReport solve_hdw(const FormField& w, const FormField& sigma, std::span<const double> x,
                             double tolerance = 1e-9) {
  return solve_hdw(evaluate(w, x), evaluate(sigma, x), tolerance);
}

inline std::vector<VectorValue> kernel_basis(const FormValue& w) {
  HatMap h = assemble_hatmap(w);
  Eigen::MatrixXd ns = null_space(h.matrix);
  std::vector<VectorValue> out;
  for (int c = 0; c < ns.cols(); ++c) out.emplace_back(ns.col(c).data(), ns.col(c).data() + ns.rows());
  return out;
}

inline std::vector<VectorValue> kernel_basis(const FormField& w, std::span<const double> x) {
  return kernel_basis(evaluate(w, x));
}

/// sigma = dH^1 ^ ... ^ dH^{k-1}
inline FormField hamiltonian_form(std::span<const Expression> hamiltonians, int n) {
  return wedge_differentials(hamiltonians, n);
}

}  // namespace ghm
