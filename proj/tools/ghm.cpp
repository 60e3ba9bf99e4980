// ghm: identity checks, pointwise solves, trajectories and flattening checks from the command line.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ghm/config.hpp"
#include "ghm/dynamics.hpp"
#include "ghm/report.hpp"
#include "ghm/systems.hpp"

namespace {

enum ExitCode { ok = 0, check_failed = 1, input_error = 2, runtime_failure = 3 };

struct GlobalOptions {
  std::string config;
  std::string json_path;
  std::uint64_t seed = 0;
  std::optional<double> tol;
};

struct SystemOptions {
  std::string name;
  std::optional<double> lambda;
  std::optional<int> n, k;
  std::string hamiltonian;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string point_text(std::span<const double> p) {
  std::string out = "(";
  for (std::size_t i = 0; i < p.size(); ++i) out += (i ? "," : "") + fmt("%.6g", p[i]);
  return out + ")";
}

void write_json(const std::string& path, const nlohmann::json& j) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw ghm::InvalidArgument("cannot write " + path);
  out << j.dump(2) << '\n';
}

void add_system_options(CLI::App* cmd, SystemOptions& s) {
  cmd->add_option("system", s.name, "built-in system name (see `list`); omit with --config");
  cmd->add_option("--lambda", s.lambda, "oscillator coupling");
  cmd->add_option("--n", s.n, "flat_nambu dimension");
  cmd->add_option("--k", s.k, "flat_nambu degree");
  cmd->add_option("--hamiltonian", s.hamiltonian, "H for fourdim / fourdim_k4, in x1..x4");
}

ghm::SystemSpec resolve_system(const GlobalOptions& g, const SystemOptions& s) {
  if (!g.config.empty()) {
    if (!s.name.empty()) throw ghm::InvalidArgument("give either a system name or --config, not both");
    if (s.lambda || s.n || s.k || !s.hamiltonian.empty())
      throw ghm::InvalidArgument("system parameters do not apply to --config systems");
    return ghm::load_config_file(g.config);
  }
  if (s.name.empty()) throw ghm::InvalidArgument("no system given (name or --config)");
  const ghm::CatalogEntry* entry = ghm::find_system(s.name);
  if (!entry) throw ghm::InvalidArgument("unknown system \"" + s.name + "\" (see `ghm list`)");

  ghm::Parameters params;
  auto take = [&](const char* name, std::optional<double> v) {
    if (!v) return;
    bool known = false;
    for (const auto& p : entry->parameters) known = known || p.name == name;
    if (!known) throw ghm::InvalidArgument(std::string("--") + name + " does not apply to " + entry->name);
    params[name] = *v;
  };
  take("lambda", s.lambda);
  take("n", s.n ? std::optional<double>(*s.n) : std::nullopt);
  take("k", s.k ? std::optional<double>(*s.k) : std::nullopt);

  std::optional<ghm::Expression> h;
  if (!s.hamiltonian.empty()) {
    if (!entry->custom_hamiltonian) throw ghm::InvalidArgument("--hamiltonian does not apply to " + entry->name);
    h = ghm::parse(s.hamiltonian, entry->n);
  }
  return entry->make(params, h);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "fi") item = "fundamental_identity";
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---------------------------------------------------------------------------

int run_list() {
  std::cout << "systems\n";
  for (const auto& e : ghm::system_catalog()) {
    auto spec = e.make({}, std::nullopt);
    std::string routes = spec.form && spec.tensor ? "form+tensor" : spec.form ? "form" : "tensor";
    std::string params;
    for (const auto& p : e.parameters) params += " --" + p.name + " " + fmt("%g", p.value);
    if (e.custom_hamiltonian) params += " --hamiltonian H";
    std::printf("  %-14s n=%-2d k=%-2d %-12s %s\n", e.name.c_str(), spec.n, spec.k, routes.c_str(), e.summary.c_str());
    if (!params.empty()) std::printf("  %-14s options:%s\n", "", params.c_str());
  }
  std::cout << "flattening examples\n";
  for (const auto& e : ghm::moser_catalog()) {
    std::string params;
    for (const auto& p : e.parameters) params += " --" + p.name + " " + fmt("%g", p.value);
    std::printf("  %-14s %s\n  %-14s options:%s\n", e.name.c_str(), e.summary.c_str(), "", params.c_str());
  }
  return ok;
}

int run_check(const GlobalOptions& g, const SystemOptions& so, int samples, const std::string& identities) {
  auto spec = resolve_system(g, so);
  auto selected = identities.empty() ? ghm::identity_names() : split_list(identities);
  double tol = g.tol.value_or(1e-9);
  auto summary = ghm::run_checks(spec, selected, samples, g.seed, tol);

  std::printf("# check %s samples=%d seed=%llu prng=%s tol=%s\n", spec.name.c_str(), samples,
              static_cast<unsigned long long>(g.seed), ghm::Sampler::name, fmt("%g", tol).c_str());
  std::printf("%-22s %-10s %-6s %-14s %-14s %s\n", "identity", "target", "status", "max|residual|", "signed",
              "argmax");
  for (const auto& e : summary.entries) {
    if (!e.report) {
      std::printf("%-22s %-10s %-6s (%s)\n", e.name.c_str(), "-", "n/a", e.reason.c_str());
      continue;
    }
    const auto& r = *e.report;
    std::string where = "x=" + point_text(r.point);
    if (!r.indices.empty()) {
      where += " idx=(";
      for (std::size_t i = 0; i < r.indices.size(); ++i) where += (i ? "," : "") + std::to_string(r.indices[i] + 1);
      where += ")";
    }
    if (!r.part.empty()) where += " " + r.part;
    std::string target = e.target.size() > 10 ? e.target.substr(0, 10) : e.target;
    std::printf("%-22s %-10s %-6s %-14s %-14s %s\n", e.name.c_str(), target.c_str(), r.pass ? "PASS" : "FAIL",
                fmt("%.6e", r.max_residual).c_str(), fmt("%.6e", r.signed_value).c_str(), where.c_str());
  }
  std::printf("overall %s\n", summary.pass ? "PASS" : "FAIL");
  write_json(g.json_path, ghm::to_json(summary));
  return summary.pass ? ok : check_failed;
}

int run_simulate(const GlobalOptions& g, const SystemOptions& so, const std::vector<double>& x0, double t_end,
                 double dt, const std::string& method, const std::string& out_path) {
  auto spec = resolve_system(g, so);
  ghm::Dynamics dyn(spec);
  ghm::IntegrateOptions opt;
  opt.dt = dt;
  if (method == "rk4")
    opt.method = ghm::Method::rk4;
  else if (method == "rkf45")
    opt.method = ghm::Method::rkf45;
  else
    throw ghm::InvalidArgument("unknown method \"" + method + "\" (rk4, rkf45)");
  if (g.tol) opt.rtol = *g.tol;
  if (static_cast<int>(x0.size()) != spec.n)
    throw ghm::InvalidArgument("--x0 needs " + std::to_string(spec.n) + " values, got " + std::to_string(x0.size()));
  if (!(t_end > 0)) throw ghm::InvalidArgument("--t-end must be positive");

  auto traj = ghm::integrate(dyn, x0, t_end, opt);

  // Summary goes to stderr when the CSV itself is on stdout.
  std::ostream& report = out_path.empty() ? std::cerr : std::cout;
  if (out_path.empty()) {
    ghm::write_csv(std::cout, traj, spec);
  } else {
    std::ofstream out(out_path);
    if (!out) throw ghm::InvalidArgument("cannot write " + out_path);
    ghm::write_csv(out, traj, spec);
  }

  auto cons = ghm::conservation_report(traj, dyn);
  report << "# simulate " << spec.name << " method=" << method << " dt=" << fmt("%g", dt)
         << " t_end=" << fmt("%g", t_end) << " prng=" << ghm::Sampler::name << " seed=" << g.seed << '\n';
  report << "status " << ghm::to_string(traj.status) << " steps=" << traj.times.size() - 1
         << " t=" << ghm::format_g17(traj.times.back()) << '\n';
  if (!traj.note.empty()) report << "note " << traj.note << '\n';
  for (const auto& d : cons.drifts) report << "drift " << d.name << ' ' << fmt("%.6e", d.max_relative_drift) << '\n';
  report << "max|div X| " << fmt("%.6e", cons.max_abs_divergence) << '\n';
  if (cons.max_hdw_residual) report << "max hdw residual " << fmt("%.6e", *cons.max_hdw_residual) << '\n';

  nlohmann::json j = {{"system", spec.name},
                      {"status", ghm::to_string(traj.status)},
                      {"note", traj.note},
                      {"steps", traj.times.size() - 1},
                      {"t_final", traj.times.back()},
                      {"prng", ghm::Sampler::name},
                      {"seed", g.seed},
                      {"conservation", ghm::to_json(cons)}};
  write_json(g.json_path, j);
  return traj.status == ghm::TrajectoryStatus::failed ? runtime_failure : ok;
}

int run_solve(const GlobalOptions& g, const SystemOptions& so, const std::vector<double>& point) {
  auto spec = resolve_system(g, so);
  ghm::Dynamics dyn(spec);
  auto e = ghm::vector_field_of(dyn, point);
  nlohmann::json j = {{"system", spec.name}, {"point", point}, {"x", e.x}};
  j["solve"] = e.solve ? ghm::to_json(*e.solve) : nlohmann::json(nullptr);
  j["tensor_x"] = e.tensor_x ? nlohmann::json(*e.tensor_x) : nlohmann::json(nullptr);
  j["route_gap"] = e.route_gap ? nlohmann::json(*e.route_gap) : nlohmann::json(nullptr);
  auto hdw = dyn.hdw_residual(point, e.x);
  j["hdw_residual"] = hdw ? nlohmann::json(*hdw) : nlohmann::json(nullptr);
  std::cout << j.dump(2) << '\n';
  write_json(g.json_path, j);
  return ok;
}

int run_flatten(const GlobalOptions& g, const std::string& name, std::optional<double> f, std::optional<double> gg,
                double t, int samples, bool numeric) {
  const ghm::MoserEntry* entry = ghm::find_moser(name);
  if (!entry) throw ghm::InvalidArgument("unknown flattening example \"" + name + "\" (see `ghm list`)");
  ghm::Parameters params;
  if (f) params["f"] = *f;
  if (gg) {
    if (entry->parameters.size() < 2) throw ghm::InvalidArgument("--g does not apply to " + name);
    params["g"] = *gg;
  }
  if (samples < 1) throw ghm::InvalidArgument("--samples must be positive");
  auto prob = entry->make(params);
  ghm::Sampler rng(g.seed);
  auto pts = rng.points(prob.domain, samples);

  double moser = ghm::moser_residual(prob, pts);
  double closed = ghm::verify_flattening(prob, t, pts);
  double tol = g.tol.value_or(1e-8);
  bool pass = moser <= 1e-12 && closed <= tol;
  std::printf("# flatten %s t=%s samples=%d seed=%llu prng=%s\n", name.c_str(), fmt("%g", t).c_str(), samples,
              static_cast<unsigned long long>(g.seed), ghm::Sampler::name);
  std::printf("moser residual           %.6e\n", moser);
  std::printf("pullback (closed form)   %.6e  tol %g\n", closed, tol);
  nlohmann::json j = {{"example", name}, {"t", t},        {"samples", samples}, {"seed", g.seed},
                      {"prng", ghm::Sampler::name}, {"moser_residual", moser}, {"closed_form_residual", closed},
                      {"tolerance", tol}};
  if (numeric) {
    double num = ghm::verify_flattening(prob, t, pts, ghm::FlowRoute::numeric);
    double ntol = g.tol.value_or(1e-6);
    std::printf("pullback (numeric flow)  %.6e  tol %g\n", num, ntol);
    pass = pass && num <= ntol;
    j["numeric_residual"] = num;
    j["numeric_tolerance"] = ntol;
  }
  j["pass"] = pass;
  std::printf("overall %s\n", pass ? "PASS" : "FAIL");
  write_json(g.json_path, j);
  return pass ? ok : check_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Hamiltonian mechanics toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config, "JSON system config instead of a built-in system");
  app.add_option("--json", g.json_path, "also write the report as JSON to this path");
  app.add_option("--seed", g.seed, "sampler seed")->capture_default_str();
  app.add_option("--tol", g.tol, "pass/fail tolerance (check: 1e-9, flatten: 1e-8; simulate: rkf45 rtol)");

  auto* list = app.add_subcommand("list", "list built-in systems and flattening examples");

  SystemOptions check_sys;
  int samples = 20;
  std::string identities;
  auto* check = app.add_subcommand("check", "run structural identity checks");
  add_system_options(check, check_sys);
  check->add_option("--samples", samples, "sample points")->capture_default_str();
  check->add_option("--identities", identities, "comma list of jacobi, fundamental_identity (fi), closure, measure");

  SystemOptions sim_sys;
  std::vector<double> x0;
  double t_end = 10.0, dt = 1e-3;
  std::string method = "rk4", out_path;
  auto* simulate = app.add_subcommand("simulate", "integrate a trajectory and report conservation");
  add_system_options(simulate, sim_sys);
  simulate->add_option("--x0", x0, "initial state, comma separated")->delimiter(',')->required();
  simulate->add_option("--t-end", t_end, "final time")->capture_default_str();
  simulate->add_option("--dt", dt, "step (rk4) or initial step (rkf45)")->capture_default_str();
  simulate->add_option("--method", method, "rk4 or rkf45")->capture_default_str();
  simulate->add_option("--out", out_path, "CSV path (default stdout)");

  SystemOptions solve_sys;
  std::vector<double> point;
  auto* solve = app.add_subcommand("solve", "solve for X at one point");
  add_system_options(solve, solve_sys);
  solve->add_option("--point", point, "evaluation point, comma separated")->delimiter(',')->required();

  std::string example;
  std::optional<double> f, gg;
  double t = 1.0;
  int flat_samples = 50;
  bool numeric = false;
  auto* flatten = app.add_subcommand("flatten", "verify a Moser flattening");
  flatten->add_option("example", example, "moser1 or moser2")->required();
  flatten->add_option("--f", f, "parameter f");
  flatten->add_option("--g", gg, "parameter g (moser2)");
  flatten->add_option("--t", t, "flow time")->capture_default_str();
  flatten->add_option("--samples", flat_samples, "sample points")->capture_default_str();
  flatten->add_flag("--numeric", numeric, "also check with the integrated flow");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return input_error;
  }

  try {
    if (*list) return run_list();
    if (*check) return run_check(g, check_sys, samples, identities);
    if (*simulate) return run_simulate(g, sim_sys, x0, t_end, dt, method, out_path);
    if (*solve) return run_solve(g, solve_sys, point);
    if (*flatten) return run_flatten(g, example, f, gg, t, flat_samples, numeric);
  } catch (const ghm::RuntimeFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return runtime_failure;
  } catch (const ghm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return input_error;
  }
  return input_error;
}
