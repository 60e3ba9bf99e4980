#pragma once

// Inverses, Poisson k-tensors, w = omega ^ dC decompositions, level sets and rank tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ghm/error.hpp"
#include "ghm/exterior.hpp"
#include "ghm/linalg.hpp"
#include "ghm/sampling.hpp"

namespace ghm {

namespace detail {

inline std::string point_string(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ", ";
    s += format_number(x[i]);
  }
  return s + ")";
}

inline VectorValue basis_vector(int n, int axis) {
  VectorValue e(n, 0.0);
  e[axis] = 1.0;
  return e;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// i_{i_Y w} J as a dense vector.
inline VectorValue recover(const FormValue& w, const MultiVectorValue& j, std::span<const double> y) {
  return components(contract(interior_vector(y, w), j));
}

/// Rows are the differentials dC^i at x.
inline Eigen::MatrixXd constraint_jacobian(std::span<const Expression> cs, std::span<const double> x) {
  int n = static_cast<int>(x.size());
  Eigen::MatrixXd a(cs.size(), n);
  for (std::size_t i = 0; i < cs.size(); ++i)
    for (int j = 0; j < n; ++j) a(i, j) = evaluate(differentiate(cs[i], j), x);
  return a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Inverses

/// Max over points and basis vectors d_j of |i_{i_{d_j} w} J - d_j|.
inline double strong_inverse_residual(const FormField& w, const MultiVectorField& j, const PointSet& points) {
  if (w.dimension() != j.dimension() || w.degree() != j.degree())
    throw InvalidArgument("strong_inverse_residual: w and J must share dimension and degree");
  int n = w.dimension();
  double worst = 0.0;
  for (const auto& p : points) {
    FormValue wv = evaluate(w, p);
    MultiVectorValue jv = evaluate(j, p);
    for (int a = 0; a < n; ++a) {
      auto e = detail::basis_vector(n, a);
      worst = std::max(worst, detail::distance(detail::recover(wv, jv, e), e));
    }
  }
  return worst;
}

/// Distribution given either by spanning fields or as the common kernel of dC^1..dC^m.
struct Distribution {
  std::vector<VectorField> spanning;
  std::vector<Expression> annihilated;

  static Distribution spanned_by(std::vector<VectorField> fields) { return {std::move(fields), {}}; }
  static Distribution kernel_of(std::vector<Expression> constraints) { return {{}, std::move(constraints)}; }

  /// Vectors spanning the distribution at x. Kernel bases are orthonormal.
  std::vector<VectorValue> basis_at(std::span<const double> x) const {
    std::vector<VectorValue> out;
    if (!spanning.empty()) {
      for (const auto& f : spanning) out.push_back(evaluate(f, x));
      return out;
    }
    int n = static_cast<int>(x.size());
    if (annihilated.empty()) {
      for (int a = 0; a < n; ++a) out.push_back(detail::basis_vector(n, a));
      return out;
    }
    Eigen::MatrixXd ns = null_space(detail::constraint_jacobian(annihilated, x));
    for (int c = 0; c < ns.cols(); ++c) out.emplace_back(ns.col(c).data(), ns.col(c).data() + n);
    return out;
  }
};

/// Max over points and spanning vectors Y of |i_{i_Y w} J - Y|.
inline double delta_inverse_residual(const FormField& w, const MultiVectorField& j, const Distribution& delta,
                                     const PointSet& points) {
  if (w.dimension() != j.dimension() || w.degree() != j.degree())
    throw InvalidArgument("delta_inverse_residual: w and J must share dimension and degree");
  double worst = 0.0;
  for (const auto& p : points) {
    FormValue wv = evaluate(w, p);
    MultiVectorValue jv = evaluate(j, p);
    for (const auto& y : delta.basis_at(p)) worst = std::max(worst, detail::distance(detail::recover(wv, jv, y), y));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Dual frames and Poisson k-tensors

/// Throws unless i_{n_i} dC^j = delta_i^j at every point.
inline void check_duality(const std::vector<VectorField>& frames, std::span<const Expression> constraints,
                          const PointSet& points, double tol = 1e-10) {
  if (frames.size() != constraints.size())
    throw InvalidArgument("need one frame vector per constraint function");
  for (const auto& p : points) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      for (std::size_t jdx = 0; jdx < constraints.size(); ++jdx) {
        double v = evaluate(directional_derivative(frames[i], constraints[jdx]), p);
        double want = i == jdx ? 1.0 : 0.0;
        if (std::abs(v - want) > tol) {
          std::ostringstream msg;
          msg << "duality violated: i_{n" << i + 1 << "} dC" << jdx + 1 << " = " << detail::format_number(v)
              << " (expected " << want << ") at " << detail::point_string(p);
          throw InvalidArgument(msg.str());
        }
      }
    }
  }
}

/// Coordinate-axis dual frame n_i with i_{n_i} dC^j = delta_i^j, built symbolically.
/// Axes are chosen by greedy largest pivot at `point`; the frame lives on the span of those axes.
inline std::vector<VectorField> propose_dual_frame(std::span<const Expression> constraints,
                                                   std::span<const double> point) {
  int n = static_cast<int>(point.size());
  int m = static_cast<int>(constraints.size());
  Eigen::MatrixXd a = detail::constraint_jacobian(constraints, point);
  std::vector<int> axes;
  Eigen::MatrixXd work = a;
  for (int r = 0; r < m; ++r) {
    int best = -1;
    double mag = 0.0;
    for (int c = 0; c < n; ++c) {
      if (std::find(axes.begin(), axes.end(), c) != axes.end()) continue;
      if (std::abs(work(r, c)) > mag) {
        mag = std::abs(work(r, c));
        best = c;
      }
    }
    if (best < 0 || mag < 1e-12) throw InvalidArgument("constraint differentials are dependent at the point");
    axes.push_back(best);
    for (int r2 = r + 1; r2 < m; ++r2) work.row(r2) -= work(r2, best) / work(r, best) * work.row(r);
  }
  // Symbolic m x m block B_{ji} = dC^j / dx^{axes_i}; n_i = sum_a (B^{-1})_{a i} d_{axes_a}.
  std::vector<std::vector<Expression>> b(m, std::vector<Expression>(m));
  for (int jdx = 0; jdx < m; ++jdx)
    for (int i = 0; i < m; ++i) b[jdx][i] = differentiate(constraints[jdx], axes[i]);
  std::function<Expression(const std::vector<std::vector<Expression>>&)> det =
      [&](const std::vector<std::vector<Expression>>& mat) -> Expression {
    std::size_t s = mat.size();
    if (s == 1) return mat[0][0];
    Expression acc = Expression::constant(0.0);
    for (std::size_t c = 0; c < s; ++c) {
      std::vector<std::vector<Expression>> minor;
      for (std::size_t r = 1; r < s; ++r) {
        std::vector<Expression> row;
        for (std::size_t cc = 0; cc < s; ++cc)
          if (cc != c) row.push_back(mat[r][cc]);
        minor.push_back(row);
      }
      Expression term = mat[0][c] * det(minor);
      acc = c % 2 == 0 ? acc + term : acc - term;
    }
    return acc;
  };
  Expression d = det(b);
  std::vector<VectorField> frames(m, VectorField(n, Expression::constant(0.0)));
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < m; ++a) {
      // (B^{-1})_{a i} = cofactor_{i a} / det
      Expression cof;
      if (m == 1) {
        cof = Expression::constant(1.0);
      } else {
        std::vector<std::vector<Expression>> minor;
        for (int r = 0; r < m; ++r) {
          if (r == i) continue;
          std::vector<Expression> row;
          for (int c = 0; c < m; ++c)
            if (c != a) row.push_back(b[r][c]);
          minor.push_back(row);
        }
        cof = det(minor);
        if ((i + a) % 2 == 1) cof = -cof;
      }
      frames[i][axes[a]] = cof / d;
    }
  }
  return frames;
}

/// N ^ J2 with N = n_{k-2} ^ ... ^ n_1. Checks duality and that each C^i is a Casimir of J2 at the points.
inline MultiVectorField build_poisson_k(const MultiVectorField& j2, std::span<const Expression> casimirs,
                                        const std::vector<VectorField>& frames, const PointSet& points,
                                        double tol = 1e-10) {
  if (j2.degree() != 2) throw InvalidArgument("build_poisson_k: expected a 2-vector");
  int n = j2.dimension();
  check_duality(frames, casimirs, points, tol);
  for (std::size_t i = 0; i < casimirs.size(); ++i) {
    FormField dc = differential(casimirs[i], n);
    for (const auto& p : points) {
      double r = max_abs(evaluate(contract(dc, j2), p));
      if (r > tol)
        throw InvalidArgument("C" + std::to_string(i + 1) + " is not a Casimir of the 2-tensor at " +
                              detail::point_string(p));
    }
  }
  MultiVectorField nn = MultiVectorField::monomial(n, MultiIndex{});
  for (auto it = frames.rbegin(); it != frames.rend(); ++it)
    nn = wedge(nn, from_components<Contravariant, Expression>(*it));
  return wedge(nn, j2);
}

/// i_{dC^1} ... i_{dC^{k-2}} J (dC^{k-2} applied first).
inline MultiVectorField reduce_k_to_2(const MultiVectorField& j, std::span<const Expression> casimirs) {
  if (static_cast<int>(casimirs.size()) != j.degree() - 2)
    throw InvalidArgument("reduce_k_to_2: need k-2 functions");
  MultiVectorField cur = j;
  for (auto it = casimirs.rbegin(); it != casimirs.rend(); ++it) cur = contract(differential(*it, j.dimension()), cur);
  return cur;
}

/// Delta-inverse of w = omega ^ dC from a Delta-inverse of omega: (-1)^{k-2} n_1 ^ ... ^ n_{k-2} ^ J2.
inline MultiVectorField delta_inverse_from_omega(const MultiVectorField& j2, const std::vector<VectorField>& frames) {
  int n = j2.dimension();
  MultiVectorField nn = MultiVectorField::monomial(n, MultiIndex{});
  for (const auto& f : frames) nn = wedge(nn, from_components<Contravariant, Expression>(f));
  MultiVectorField j = wedge(nn, j2);
  return frames.size() % 2 == 0 ? j : -j;
}

// ---------------------------------------------------------------------------
// w = omega ^ dC

inline FormField build_w_from_omega(const FormField& omega, std::span<const Expression> constraints) {
  FormField w = omega;
  for (const auto& c : constraints) w = wedge(w, differential(c, omega.dimension()));
  return w;
}

/// omega = i_{n_{k-2}} ... i_{n_1} w (n_1 applied first). When constraint functions are supplied
/// the duality i_{n_i} dC^j = delta_i^j is checked at the points.
inline FormField extract_omega(const FormField& w, const std::vector<VectorField>& frames,
                               std::span<const Expression> constraints = {}, const PointSet& points = {}) {
  if (static_cast<int>(frames.size()) != w.degree() - 2) throw InvalidArgument("extract_omega: need k-2 frame vectors");
  if (!constraints.empty()) check_duality(frames, constraints, points);
  FormField cur = w;
  for (const auto& f : frames) cur = interior_vector(f, cur);
  return cur;
}

// ---------------------------------------------------------------------------
// Level sets

/// Local parameterization of {C = c} by complementary ambient coordinates.
class LevelSetChart {
 public:
  LevelSetChart(std::vector<Expression> constraints, std::vector<double> levels, std::vector<double> base_point)
      : constraints_(std::move(constraints)), levels_(std::move(levels)), base_(std::move(base_point)) {
    int n = static_cast<int>(base_.size());
    int m = static_cast<int>(constraints_.size());
    if (static_cast<int>(levels_.size()) != m) throw InvalidArgument("one level value per constraint is required");
    if (m >= n) throw InvalidArgument("level set must have positive dimension");
    Eigen::MatrixXd a = detail::constraint_jacobian(constraints_, base_);
    if (numerical_rank(a) < m) throw InvalidArgument("dC vanishes at the base point " + detail::point_string(base_));
    for (int r = 0; r < m; ++r) {
      int best = -1;
      double mag = 0.0;
      for (int c = 0; c < n; ++c) {
        if (std::find(solved_.begin(), solved_.end(), c) != solved_.end()) continue;
        if (std::abs(a(r, c)) > mag) {
          mag = std::abs(a(r, c));
          best = c;
        }
      }
      if (best < 0 || mag == 0.0) throw InvalidArgument("constraint Jacobian block is singular at the base point");
      solved_.push_back(best);
      for (int r2 = r + 1; r2 < m; ++r2) a.row(r2) -= a(r2, best) / a(r, best) * a.row(r);
    }
    for (int c = 0; c < n; ++c)
      if (std::find(solved_.begin(), solved_.end(), c) == solved_.end()) free_.push_back(c);
    exact_ = true;
    for (int i = 0; i < m; ++i) {
      auto axis = constraints_[i].coordinate_axis();
      if (!axis || *axis != solved_[i]) exact_ = false;
    }
  }

  int ambient_dimension() const { return static_cast<int>(base_.size()); }
  int dimension() const { return static_cast<int>(free_.size()); }
  const std::vector<int>& free_axes() const { return free_; }
  const std::vector<int>& solved_axes() const { return solved_; }
  const std::vector<Expression>& constraints() const { return constraints_; }
  const std::vector<double>& levels() const { return levels_; }
  /// True when every constraint is a bare coordinate, so restriction is coordinate deletion.
  bool exact() const { return exact_; }

  std::vector<double> chart_coordinates(std::span<const double> x) const {
    std::vector<double> y;
    for (int a : free_) y.push_back(x[a]);
    return y;
  }

  /// Point of the level set with the given chart coordinates (damped Newton on the solved axes).
  std::vector<double> embed(std::span<const double> y, int max_iterations = 50, double tol = 1e-12) const {
    if (static_cast<int>(y.size()) != dimension()) throw InvalidArgument("chart coordinate length mismatch");
    std::vector<double> x = base_;
    for (std::size_t i = 0; i < free_.size(); ++i) x[free_[i]] = y[i];
    if (exact_) {
      for (std::size_t i = 0; i < solved_.size(); ++i) x[solved_[i]] = levels_[i];
      return x;
    }
    int m = static_cast<int>(solved_.size());
    auto residual = [&](const std::vector<double>& pt) {
      Eigen::VectorXd r(m);
      for (int i = 0; i < m; ++i) r(i) = evaluate(constraints_[i], pt) - levels_[i];
      return r;
    };
    Eigen::VectorXd r = residual(x);
    for (int it = 0; it < max_iterations; ++it) {
      if (r.norm() <= tol) return x;
      Eigen::MatrixXd full = detail::constraint_jacobian(constraints_, x);
      Eigen::MatrixXd block(m, m);
      for (int i = 0; i < m; ++i) block.col(i) = full.col(solved_[i]);
      Eigen::VectorXd step = block.fullPivLu().solve(-r);
      double damping = 1.0;
      while (true) {
        std::vector<double> trial = x;
        for (int i = 0; i < m; ++i) trial[solved_[i]] += damping * step(i);
        Eigen::VectorXd rt;
        bool ok = true;
        try {
          rt = residual(trial);
        } catch (const DomainError&) {
          ok = false;
        }
        if (ok && rt.norm() < r.norm()) {
          x = trial;
          r = rt;
          break;
        }
        damping *= 0.5;
        if (damping < 1e-10) throw RuntimeFailure("level-set Newton iteration stalled");
      }
    }
    if (r.norm() <= tol) return x;
    throw RuntimeFailure("level-set Newton iteration did not converge in " + std::to_string(max_iterations) +
                         " iterations");
  }

  /// d x / d y at the embedded point (n x (n - m)), by the implicit function theorem.
  Eigen::MatrixXd embedding_jacobian(std::span<const double> x) const {
    int n = ambient_dimension(), m = static_cast<int>(solved_.size()), r = dimension();
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, r);
    for (int i = 0; i < r; ++i) e(free_[i], i) = 1.0;
    if (exact_) return e;
    Eigen::MatrixXd full = detail::constraint_jacobian(constraints_, x);
    Eigen::MatrixXd block(m, m), rest(m, r);
    for (int i = 0; i < m; ++i) block.col(i) = full.col(solved_[i]);
    for (int i = 0; i < r; ++i) rest.col(i) = full.col(free_[i]);
    Eigen::MatrixXd ds = block.fullPivLu().solve(-rest);
    for (int i = 0; i < m; ++i) e.row(solved_[i]) = ds.row(i);
    return e;
  }

  /// Symbolic coordinate substitution for exact charts: free axis i becomes chart coordinate i.
  std::vector<Expression> substitution() const {
    if (!exact_) throw InvalidArgument("symbolic restriction needs coordinate constraints");
    std::vector<Expression> s(ambient_dimension());
    for (std::size_t i = 0; i < free_.size(); ++i) s[free_[i]] = Expression::coordinate(static_cast<int>(i));
    for (std::size_t i = 0; i < solved_.size(); ++i) s[solved_[i]] = Expression::constant(levels_[i]);
    return s;
  }

 private:
  std::vector<Expression> constraints_;
  std::vector<double> levels_;
  std::vector<double> base_;
  std::vector<int> solved_;
  std::vector<int> free_;
  bool exact_ = false;
};

/// i_c^* omega. Symbolic (coordinate deletion) for exact charts, otherwise evaluated pointwise.
class RestrictedForm {
 public:
  RestrictedForm(const LevelSetChart& chart, FormField ambient) : chart_(chart), ambient_(std::move(ambient)) {
    if (chart_.exact()) {
      auto sub = chart_.substitution();
      FormField f(chart_.dimension(), ambient_.degree());
      std::vector<int> position(chart_.ambient_dimension(), -1);
      for (std::size_t i = 0; i < chart_.free_axes().size(); ++i) position[chart_.free_axes()[i]] = static_cast<int>(i);
      for (const auto& [idx, c] : ambient_.terms()) {
        std::vector<int> axes;
        bool keep = true;
        for (int a : idx) {
          if (position[a] < 0) {
            keep = false;
            break;
          }
          axes.push_back(position[a]);
        }
        if (keep) f.add(MultiIndex(axes), substitute(c, sub));
      }
      symbolic_ = f;
    }
  }

  const std::optional<FormField>& symbolic() const { return symbolic_; }

  FormValue operator()(std::span<const double> y) const {
    if (symbolic_) return evaluate(*symbolic_, y);
    auto x = chart_.embed(y);
    return pullback(chart_.embedding_jacobian(x), evaluate(ambient_, x));
  }

 private:
  LevelSetChart chart_;
  FormField ambient_;
  std::optional<FormField> symbolic_;
};

/// i_c^* H.
class RestrictedScalar {
 public:
  RestrictedScalar(const LevelSetChart& chart, Expression ambient) : chart_(chart), ambient_(std::move(ambient)) {
    if (chart_.exact()) symbolic_ = substitute(ambient_, chart_.substitution());
  }

  const std::optional<Expression>& symbolic() const { return symbolic_; }

  double operator()(std::span<const double> y) const {
    if (symbolic_) return evaluate(*symbolic_, y);
    return evaluate(ambient_, chart_.embed(y));
  }

  /// d(i_c^* H) at chart point y.
  VectorValue gradient(std::span<const double> y) const {
    int r = chart_.dimension();
    if (symbolic_) return evaluate(ghm::gradient(*symbolic_, r), y);
    auto x = chart_.embed(y);
    auto g = evaluate(ghm::gradient(ambient_, chart_.ambient_dimension()), x);
    Eigen::RowVectorXd gr = Eigen::Map<Eigen::RowVectorXd>(g.data(), g.size()) * chart_.embedding_jacobian(x);
    return VectorValue(gr.data(), gr.data() + r);
  }

 private:
  LevelSetChart chart_;
  Expression ambient_;
  std::optional<Expression> symbolic_;
};

inline RestrictedForm restrict_to_level_set(const LevelSetChart& chart, const FormField& omega) {
  return RestrictedForm(chart, omega);
}

inline RestrictedScalar restrict_to_level_set(const LevelSetChart& chart, const Expression& h) {
  return RestrictedScalar(chart, h);
}

/// Restriction of a vector field tangent to the level set, in chart components.
inline VectorValue restrict_vector(const LevelSetChart& chart, const VectorField& x, std::span<const double> y) {
  auto p = chart.embed(y);
  auto v = evaluate(x, p);
  VectorValue out;
  for (int a : chart.free_axes()) out.push_back(v[a]);
  return out;
}

// ---------------------------------------------------------------------------
// Rank with respect to dC

struct RankReport {
  int rank = 0;    // 2l at the first sample
  int corank = 0;  // (n - m) - 2l
  bool constant_over_samples = true;
  std::vector<int> ranks;
  PointSet points;
};

/// Antisymmetric matrix of a 2-form value.
inline Eigen::MatrixXd two_form_matrix(const FormValue& omega) {
  if (omega.degree() != 2) throw InvalidArgument("expected a 2-form");
  int n = omega.dimension();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [idx, c] : omega.terms()) {
    m(idx[0], idx[1]) = c;
    m(idx[1], idx[0]) = -c;
  }
  return m;
}

inline RankReport rank_wrt(const FormField& omega, std::span<const Expression> constraints, const PointSet& points) {
  RankReport r;
  r.points = points;
  int n = omega.dimension();
  int m = static_cast<int>(constraints.size());
  for (const auto& p : points) {
    Eigen::MatrixXd basis = constraints.empty() ? Eigen::MatrixXd::Identity(n, n)
                                                : null_space(detail::constraint_jacobian(constraints, p));
    Eigen::MatrixXd restricted = basis.transpose() * two_form_matrix(evaluate(omega, p)) * basis;
    int rk = numerical_rank(restricted);
    r.ranks.push_back(rk - rk % 2);
  }
  if (!r.ranks.empty()) {
    r.rank = r.ranks.front();
    r.corank = (n - m) - r.rank;
    r.constant_over_samples = std::all_of(r.ranks.begin(), r.ranks.end(), [&](int v) { return v == r.rank; });
  }
  return r;
}

// ---------------------------------------------------------------------------
// Darboux verification

/// Max over points of |w - (sum_i dp^i ^ dq^i) ^ dC^1 ^ ... ^ dC^m| for candidate coordinate functions.
inline double darboux_residual(const FormField& w, std::span<const Expression> ps, std::span<const Expression> qs,
                               std::span<const Expression> constraints, const PointSet& points) {
  if (ps.size() != qs.size()) throw InvalidArgument("darboux_residual: need as many p as q functions");
  int n = w.dimension();
  FormField omega0(n, 2);
  for (std::size_t i = 0; i < ps.size(); ++i) omega0 += wedge(differential(ps[i], n), differential(qs[i], n));
  FormField candidate = build_w_from_omega(omega0, constraints);
  if (candidate.degree() != w.degree()) throw InvalidArgument("darboux_residual: degree mismatch");
  FormField diff = w - candidate;
  double worst = 0.0;
  for (const auto& p : points) worst = std::max(worst, max_abs(evaluate(diff, p)));
  return worst;
}

}  // namespace ghm
