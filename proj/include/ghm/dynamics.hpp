#pragma once

// Equations of motion, trajectory integration and Moser flattening checks.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ghm/error.hpp"
#include "ghm/exterior.hpp"
#include "ghm/hdw_solver.hpp"
#include "ghm/identities.hpp"
#include "ghm/sampling.hpp"

namespace ghm {

struct NamedScalar {
  std::string name;
  Expression value;
};

/// Form route: i_X w = -dH^1 ^ ... ^ dH^{k-1}.
struct FormRoute {
  FormField w;
  std::vector<Expression> hamiltonians;
};

/// Tensor route: X = -i_{dH^1} ... i_{dH^m} J with the last Hamiltonian contracted first.
struct TensorRoute {
  MultiVectorField j;
  std::vector<Expression> hamiltonians;
};

struct SystemSpec {
  std::string name;
  std::string summary;
  int n = 0;
  int k = 0;
  std::vector<std::string> aliases;
  Parameters params;  // already bound into every expression; kept for reporting
  Box domain;
  std::vector<double> base_point;
  std::vector<NamedScalar> hamiltonians;  // reported as H1..H{k-1}
  std::vector<NamedScalar> invariants;    // further conserved quantities
  std::optional<FormRoute> form;
  std::optional<TensorRoute> tensor;
  int route_sign = 1;                     // X_form = route_sign * X_tensor modulo ker w
  std::optional<Expression> density;      // g with d_i(g X^i) = 0, if known
};

inline std::string coordinate_name(const SystemSpec& s, int axis) {
  return axis < static_cast<int>(s.aliases.size()) ? s.aliases[axis] : "x" + std::to_string(axis + 1);
}

/// -i_{dH^1} ... i_{dH^m} J, symbolic.
inline VectorField tensor_vector_field(const MultiVectorField& j, std::span<const Expression> hamiltonians) {
  int n = j.dimension();
  if (static_cast<int>(hamiltonians.size()) != j.degree() - 1)
    throw InvalidArgument("tensor route: a " + std::to_string(j.degree()) + "-vector needs " +
                          std::to_string(j.degree() - 1) + " Hamiltonians");
  std::vector<Expression> reversed(hamiltonians.rbegin(), hamiltonians.rend());
  FormField a = wedge_differentials(reversed, n);
  return components(contract(a, j).scaled(Expression::constant(-1.0)));
}

/// Checks the structural invariants of a system; throws InvalidArgument on the first violation.
inline void validate(const SystemSpec& s, int closure_samples = 20) {
  auto fail = [&](const std::string& m) { throw InvalidArgument("system '" + s.name + "': " + m); };
  if (s.n < 1 || s.n > max_dimension) fail("dimension out of range");
  if (s.k < 2 || s.k > s.n) fail("need 2 <= k <= n");
  if (static_cast<int>(s.domain.size()) != s.n) fail("domain box must have n intervals");
  for (const auto& [lo, hi] : s.domain)
    if (!(lo < hi)) fail("empty domain interval");
  if (static_cast<int>(s.hamiltonians.size()) != s.k - 1) fail("need k-1 Hamiltonians");
  if (!s.form && !s.tensor) fail("neither a form nor a tensor route");
  if (static_cast<int>(s.base_point.size()) != s.n || !contains(s.domain, s.base_point))
    fail("base point outside the domain");
  if (s.form) {
    if (s.form->w.dimension() != s.n || s.form->w.degree() != s.k) fail("w must be a k-form on R^n");
    if (static_cast<int>(s.form->hamiltonians.size()) != s.k - 1) fail("form route needs k-1 Hamiltonians");
    Sampler rng(0);
    auto r = closure_residual(s.form->w, rng.points(s.domain, closure_samples), 1e-10);
    if (!r.pass) fail("w is not closed (max |dw| = " + detail::format_number(r.max_residual) + ")");
  }
  if (s.tensor) {
    if (s.tensor->j.dimension() != s.n) fail("J must live on R^n");
    if (static_cast<int>(s.tensor->hamiltonians.size()) != s.tensor->j.degree() - 1)
      fail("tensor route needs deg(J)-1 Hamiltonians");
  }
  std::vector<Expression> hs;
  for (const auto& h : s.hamiltonians) hs.push_back(h.value);
  if (max_abs(evaluate(wedge_differentials(hs, s.n), s.base_point)) <= 1e-12)
    fail("Hamiltonian differentials are dependent at the base point");
}

struct FieldEvaluation {
  VectorValue x;
  std::optional<SolveReport> solve;     // form route
  std::optional<VectorValue> tensor_x;  // tensor route
  std::optional<double> route_gap;      // max |i_{X_form - s X_tensor} w|
};

/// Compiled equations of motion of a system.
class Dynamics {
 public:
  explicit Dynamics(SystemSpec spec) : spec_(std::move(spec)) {
    if (spec_.tensor) {
      x_ = tensor_vector_field(spec_.tensor->j, spec_.tensor->hamiltonians);
      divergence_ = ghm::divergence(*x_);
    }
    if (spec_.form) sigma_ = hamiltonian_form(spec_.form->hamiltonians, spec_.n);
    for (const auto& h : spec_.hamiltonians) tracked_.push_back(h.value);
    for (const auto& h : spec_.invariants) tracked_.push_back(h.value);
  }

  const SystemSpec& spec() const { return spec_; }
  int dimension() const { return spec_.n; }
  const std::optional<VectorField>& symbolic() const { return x_; }

  VectorValue operator()(std::span<const double> p) const {
    if (x_) return evaluate(*x_, p);
    return form_solution(p).x.value();
  }

  SolveReport form_solution(std::span<const double> p) const {
    SolveReport r = solve_hdw(spec_.form->w, *sigma_, p);
    if (!r.consistent)
      throw RuntimeFailure("inconsistent HDW system at " + detail::point_string(p) + " (residual " +
                           detail::format_number(r.residual) + ")");
    return r;
  }

  FieldEvaluation evaluate_all(std::span<const double> p) const {
    FieldEvaluation e;
    if (x_) e.tensor_x = evaluate(*x_, p);
    if (spec_.form) e.solve = form_solution(p);
    e.x = e.tensor_x ? *e.tensor_x : *e.solve->x;
    if (e.tensor_x && e.solve) {
      VectorValue diff(spec_.n);
      for (int i = 0; i < spec_.n; ++i) diff[i] = (*e.solve->x)[i] - spec_.route_sign * (*e.tensor_x)[i];
      e.route_gap = max_abs(interior_vector(diff, evaluate(spec_.form->w, p)));
    }
    return e;
  }

  /// Exact where the tensor route is available, central differences (h = 1e-5) otherwise.
  double divergence(std::span<const double> p) const {
    if (divergence_) return ghm::evaluate(*divergence_, p);
    const double h = 1e-5;
    std::vector<double> q(p.begin(), p.end());
    double s = 0.0;
    for (int i = 0; i < spec_.n; ++i) {
      q[i] = p[i] + h;
      double fp = (*this)(q)[i];
      q[i] = p[i] - h;
      double fm = (*this)(q)[i];
      q[i] = p[i];
      s += (fp - fm) / (2 * h);
    }
    return s;
  }

  /// max |i_{sX} w + sigma| for the primary X; absent without a form route.
  std::optional<double> hdw_residual(std::span<const double> p, std::span<const double> x) const {
    if (!spec_.form) return std::nullopt;
    double s = x_ ? spec_.route_sign : 1.0;
    VectorValue sx(x.begin(), x.end());
    for (double& v : sx) v *= s;
    return max_abs(interior_vector(sx, evaluate(spec_.form->w, p)) + evaluate(*sigma_, p));
  }

  /// Values of H1..H{k-1} followed by the extra invariants.
  std::vector<double> tracked_values(std::span<const double> p) const {
    std::vector<double> out;
    out.reserve(tracked_.size());
    for (const auto& e : tracked_) out.push_back(ghm::evaluate(e, p));
    return out;
  }

  std::vector<std::string> tracked_names() const {
    std::vector<std::string> out;
    for (const auto& h : spec_.hamiltonians) out.push_back(h.name);
    for (const auto& h : spec_.invariants) out.push_back(h.name);
    return out;
  }

 private:
  SystemSpec spec_;
  std::optional<VectorField> x_;
  std::optional<Expression> divergence_;
  std::optional<FormField> sigma_;
  std::vector<Expression> tracked_;
};

/// Vector field at a point with the diagnostics of every available route.
inline FieldEvaluation vector_field_of(const Dynamics& dyn, std::span<const double> p) {
  const auto& s = dyn.spec();
  if (static_cast<int>(p.size()) != s.n)
    throw InvalidArgument("point has " + std::to_string(p.size()) + " components, expected " + std::to_string(s.n));
  if (!contains(s.domain, p)) throw DomainError("point " + detail::point_string(p) + " is outside the domain");
  return dyn.evaluate_all(p);
}

// ---------------------------------------------------------------------------
// Integration

enum class Method { rk4, rkf45 };

enum class TrajectoryStatus { completed, truncated, failed };

struct IntegrateOptions {
  Method method = Method::rk4;
  double dt = 1e-3;
  double rtol = 1e-9;
  double atol = 1e-12;
  double domain_slack = 1e-9;
  bool hdw_diagnostics = true;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> tracked;  // H1..H{k-1}, then extra invariants
  std::vector<double> divergence;
  std::vector<double> hdw_residual;          // empty without a form route
  TrajectoryStatus status = TrajectoryStatus::completed;
  std::string note;
};

using StateFunction = std::function<VectorValue(std::span<const double>)>;

inline std::vector<double> rk4_step(const StateFunction& f, std::span<const double> x, double h) {
  std::size_t n = x.size();
  std::vector<double> tmp(n), out(x.begin(), x.end());
  auto k1 = f(x);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
  auto k2 = f(tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
  auto k3 = f(tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
  auto k4 = f(tmp);
  for (std::size_t i = 0; i < n; ++i) out[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

namespace detail {

struct EmbeddedStep {
  std::vector<double> x;
  double error;  // scaled max-norm, accept when <= 1
};

// Runge-Kutta-Fehlberg 4(5); the fifth-order solution is propagated.
inline EmbeddedStep rkf45_step(const StateFunction& f, std::span<const double> x, double h, double rtol,
                               double atol) {
  static constexpr double a[6][5] = {{0, 0, 0, 0, 0},
                                     {1.0 / 4, 0, 0, 0, 0},
                                     {3.0 / 32, 9.0 / 32, 0, 0, 0},
                                     {1932.0 / 2197, -7200.0 / 2197, 7296.0 / 2197, 0, 0},
                                     {439.0 / 216, -8.0, 3680.0 / 513, -845.0 / 4104, 0},
                                     {-8.0 / 27, 2.0, -3544.0 / 2565, 1859.0 / 4104, -11.0 / 40}};
  static constexpr double b5[6] = {16.0 / 135, 0, 6656.0 / 12825, 28561.0 / 56430, -9.0 / 50, 2.0 / 55};
  static constexpr double b4[6] = {25.0 / 216, 0, 1408.0 / 2565, 2197.0 / 4104, -1.0 / 5, 0};
  std::size_t n = x.size();
  std::vector<VectorValue> k(6);
  std::vector<double> tmp(n);
  for (int s = 0; s < 6; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = x[i];
      for (int r = 0; r < s; ++r) acc += h * a[s][r] * k[r][i];
      tmp[i] = acc;
    }
    k[s] = f(tmp);
  }
  EmbeddedStep out{std::vector<double>(x.begin(), x.end()), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    double hi = 0.0, lo = 0.0;
    for (int s = 0; s < 6; ++s) {
      hi += b5[s] * k[s][i];
      lo += b4[s] * k[s][i];
    }
    out.x[i] += h * hi;
    double scale = atol + rtol * std::max(std::abs(x[i]), std::abs(out.x[i]));
    out.error = std::max(out.error, std::abs(h * (hi - lo)) / scale);
  }
  return out;
}

}  // namespace detail

/// Integrates dx/dt = X(x) from x0 over [0, t_end]; stops with a record on domain exit or failure.
inline Trajectory integrate(const Dynamics& dyn, std::span<const double> x0, double t_end,
                            const IntegrateOptions& opt = {}) {
  const auto& spec = dyn.spec();
  if (static_cast<int>(x0.size()) != spec.n)
    throw InvalidArgument("x0 has " + std::to_string(x0.size()) + " components, expected " + std::to_string(spec.n));
  if (!contains(spec.domain, x0)) throw InvalidArgument("x0 " + detail::point_string(x0) + " is outside the domain");
  if (!(opt.dt > 0)) throw InvalidArgument("dt must be positive");
  if (!(t_end >= 0)) throw InvalidArgument("t_end must be nonnegative");

  Trajectory traj;
  bool with_hdw = opt.hdw_diagnostics && spec.form.has_value();
  auto record = [&](double t, const std::vector<double>& x) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.tracked.push_back(dyn.tracked_values(x));
    traj.divergence.push_back(dyn.divergence(x));
    if (with_hdw) traj.hdw_residual.push_back(*dyn.hdw_residual(x, dyn(x)));
  };
  StateFunction f = [&](std::span<const double> x) { return dyn(x); };

  std::vector<double> x(x0.begin(), x0.end());
  double t = 0.0;
  try {
    record(t, x);
    long long step = 0;
    double h = opt.dt;
    while (t < t_end) {
      std::vector<double> next;
      double t_next;
      if (opt.method == Method::rk4) {
        ++step;
        t_next = std::min(t_end, static_cast<double>(step) * opt.dt);
        next = rk4_step(f, x, t_next - t);
      } else {
        h = std::min(h, t_end - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
          traj.status = TrajectoryStatus::failed;
          traj.note = "step size underflow at t=" + detail::format_number(t);
          return traj;
        }
        auto trial = detail::rkf45_step(f, x, h, opt.rtol, opt.atol);
        double grow = trial.error == 0 ? 5.0 : std::clamp(0.9 * std::pow(trial.error, -0.2), 0.2, 5.0);
        if (!(trial.error <= 1.0)) {
          h *= std::isfinite(grow) ? grow : 0.2;
          continue;
        }
        t_next = (h == t_end - t) ? t_end : t + h;
        next = std::move(trial.x);
        h *= grow;
      }
      if (!contains(spec.domain, next, opt.domain_slack)) {
        traj.status = TrajectoryStatus::truncated;
        traj.note = "left the domain between t=" + detail::format_number(t) + " and t=" + detail::format_number(t_next) +
                    " at " + detail::point_string(next);
        return traj;
      }
      x = std::move(next);
      t = t_next;
      record(t, x);
    }
  } catch (const Error& e) {
    traj.status = TrajectoryStatus::failed;
    traj.note = "vector field evaluation failed at t=" + detail::format_number(t) + ": " + e.what();
  }
  return traj;
}

struct Drift {
  std::string name;
  double initial = 0.0;
  double max_relative_drift = 0.0;  // max |I(t) - I(0)| / (1 + |I(0)|)
};

struct ConservationReport {
  std::vector<Drift> drifts;
  double max_abs_divergence = 0.0;
  std::optional<double> max_hdw_residual;

  double worst() const {
    double m = 0.0;
    for (const auto& d : drifts) m = std::max(m, d.max_relative_drift);
    return m;
  }
  bool pass(double tol) const { return worst() <= tol; }
};

inline ConservationReport conservation_report(const Trajectory& traj, const Dynamics& dyn) {
  ConservationReport r;
  auto names = dyn.tracked_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    Drift d{names[i], traj.tracked.empty() ? 0.0 : traj.tracked.front()[i], 0.0};
    for (const auto& row : traj.tracked)
      d.max_relative_drift = std::max(d.max_relative_drift, std::abs(row[i] - d.initial) / (1 + std::abs(d.initial)));
    r.drifts.push_back(d);
  }
  for (double v : traj.divergence) r.max_abs_divergence = std::max(r.max_abs_divergence, std::abs(v));
  if (!traj.hdw_residual.empty())
    r.max_hdw_residual = *std::max_element(traj.hdw_residual.begin(), traj.hdw_residual.end());
  return r;
}

inline std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV: t,x1..xn,H1..H{k-1},div with 17 significant digits.
inline void write_csv(std::ostream& out, const Trajectory& traj, const SystemSpec& spec) {
  out << "t";
  for (int i = 1; i <= spec.n; ++i) out << ",x" << i;
  for (int i = 1; i < spec.k; ++i) out << ",H" << i;
  out << ",div\n";
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    out << format_g17(traj.times[r]);
    for (double v : traj.states[r]) out << ',' << format_g17(v);
    for (int i = 0; i < spec.k - 1; ++i) out << ',' << format_g17(traj.tracked[r][i]);
    out << ',' << format_g17(traj.divergence[r]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Moser flattening

/// Z0 = (1/k) x^i d_i
inline VectorField euler_field(int n, int k) {
  VectorField z(n);
  for (int i = 0; i < n; ++i) z[i] = Expression::coordinate(i) / static_cast<double>(k);
  return z;
}

struct MoserProblem {
  std::string name;
  int k = 0;
  FormField w0;                                    // constant coefficients
  VectorField x;                                   // time-independent generator
  FormField w;                                     // target, w = (1 - L_X) w0
  Box domain;                                      // sampling region
  std::function<PointMap(double)> closed_form_flow;  // optional
  VectorField y;                                   // Lie symmetry of w0, zero by default

  int dimension() const { return w0.dimension(); }
  VectorField z0() const { return euler_field(dimension(), k); }
  /// Z = Z0 - X + Y
  VectorField z() const {
    VectorField out = z0();
    for (int i = 0; i < dimension(); ++i) {
      out[i] = out[i] - x[i];
      if (!y.empty()) out[i] = out[i] + y[i];
    }
    return out;
  }
};

/// max |coefficient of L_X L_X w0|
inline double moser_residual(const MoserProblem& prob, const PointSet& points) {
  FormField second = lie_derivative(prob.x, lie_derivative(prob.x, prob.w0));
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, max_abs(evaluate(second, p)));
  return m;
}

/// (L_{tX} L_Z - L_{Z0 - Z - (1-t)X}) w0 for caller-supplied X (at time t) and Z.
inline double flatc_residual(const FormField& w0, int k, const VectorField& x, const VectorField& z, double t,
                             const PointSet& points) {
  int n = w0.dimension();
  VectorField tx(n), shift(n);
  VectorField z0 = euler_field(n, k);
  for (int i = 0; i < n; ++i) {
    tx[i] = t * x[i];
    shift[i] = z0[i] - z[i] - (1.0 - t) * x[i];
  }
  FormField r = lie_derivative(tx, lie_derivative(z, w0)) - lie_derivative(shift, w0);
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, max_abs(evaluate(r, p)));
  return m;
}

enum class FlowRoute { closed_form, numeric };

/// Time-t flow of X from p by RK4.
inline std::vector<double> flow_point(const VectorField& x, std::span<const double> p, double t, double dt = 1e-3) {
  StateFunction f = [&](std::span<const double> q) { return evaluate(x, q); };
  std::vector<double> cur(p.begin(), p.end());
  if (t == 0.0) return cur;
  long long steps = std::max<long long>(1, std::llround(std::ceil(std::abs(t) / dt)));
  double h = t / static_cast<double>(steps);
  for (long long s = 0; s < steps; ++s) cur = rk4_step(f, cur, h);
  return cur;
}

/// max over points of |Phi_t^* w_t - w0| with w_t = t w + (1-t) w0.
inline double verify_flattening(const MoserProblem& prob, double t, const PointSet& points,
                                FlowRoute route = FlowRoute::closed_form) {
  int n = prob.dimension();
  FormField wt = prob.w.scaled(Expression::constant(t)) + prob.w0.scaled(Expression::constant(1.0 - t));
  double m = 0.0;
  for (const auto& p : points) {
    FormValue base = evaluate(prob.w0, p);
    FormValue pulled(n, prob.k);
    if (route == FlowRoute::closed_form) {
      if (!prob.closed_form_flow) throw InvalidArgument(prob.name + ": no closed-form flow");
      pulled = pullback(prob.closed_form_flow(t), wt, p);
    } else {
      const double h = 1e-5;
      Eigen::MatrixXd jac(n, n);
      std::vector<double> q(p.begin(), p.end());
      for (int b = 0; b < n; ++b) {
        q[b] = p[b] + h;
        auto fp = flow_point(prob.x, q, t);
        q[b] = p[b] - h;
        auto fm = flow_point(prob.x, q, t);
        q[b] = p[b];
        for (int a = 0; a < n; ++a) jac(a, b) = (fp[a] - fm[a]) / (2 * h);
      }
      pulled = pullback(jac, evaluate(wt, flow_point(prob.x, p, t)));
    }
    m = std::max(m, max_abs(pulled - base));
  }
  return m;
}

}  // namespace ghm
