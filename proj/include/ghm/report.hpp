#pragma once

// Identity checks over a system and JSON renderings of the library's reports.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghm/dynamics.hpp"
#include "ghm/hdw_solver.hpp"
#include "ghm/identities.hpp"
#include "ghm/sampling.hpp"
#include "ghm/structure.hpp"

namespace ghm {

inline const std::vector<std::string>& identity_names() {
  static const std::vector<std::string> names = {"jacobi", "fundamental_identity", "closure", "measure"};
  return names;
}

struct CheckEntry {
  std::string name;
  std::string target;                   // what was checked, e.g. "reduced J" or "w"
  std::optional<IdentityReport> report;  // empty when the identity does not apply
  std::string reason;                    // why it does not apply
};

struct CheckSummary {
  std::string system;
  int samples = 0;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
  std::vector<CheckEntry> entries;
  bool pass = true;
};

/// Runs each selected identity that applies to the system. Points come from Sampler(seed) on the domain.
inline CheckSummary run_checks(const SystemSpec& spec, const std::vector<std::string>& selected, int samples,
                               std::uint64_t seed, double tol) {
  if (samples < 1) throw InvalidArgument("samples must be positive");
  CheckSummary out{spec.name, samples, seed, tol, {}, true};
  Sampler rng(seed);
  PointSet pts = rng.points(spec.domain, samples);
  for (const auto& name : selected) {
    CheckEntry e{name, {}, std::nullopt, {}};
    if (name == "jacobi") {
      if (!spec.tensor) {
        e.reason = "no tensor route";
      } else if (spec.tensor->j.degree() == 2) {
        e.target = "J";
        e.report = jacobi_residual(spec.tensor->j, pts, tol);
      } else {
        const auto& hs = spec.tensor->hamiltonians;
        std::vector<Expression> casimirs(hs.begin(), hs.begin() + (spec.tensor->j.degree() - 2));
        e.target = "reduced J";
        e.report = jacobi_k_residual(spec.tensor->j, casimirs, pts, tol);
      }
    } else if (name == "fundamental_identity") {
      if (!spec.tensor || spec.tensor->j.degree() != 3) {
        e.reason = "needs a 3-vector J";
      } else {
        e.target = "J";
        e.report = fundamental_identity_residual(spec.tensor->j, pts, tol);
      }
    } else if (name == "closure") {
      if (!spec.form) {
        e.reason = "no form route";
      } else {
        e.target = "w";
        e.report = closure_residual(spec.form->w, pts, tol);
      }
    } else if (name == "measure") {
      if (!spec.tensor || !spec.density) {
        e.reason = "needs J and a density";
      } else {
        e.target = "g J";
        e.report = measure_residual(spec.tensor->j, *spec.density, pts, tol);
      }
    } else {
      throw InvalidArgument("unknown identity \"" + name + "\"");
    }
    if (e.report && !e.report->pass) out.pass = false;
    out.entries.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const IdentityReport& r) {
  std::vector<int> one_based;
  for (int i : r.indices) one_based.push_back(i + 1);
  nlohmann::json j = {{"name", r.name},     {"max_residual", r.max_residual}, {"signed_value", r.signed_value},
                      {"point", r.point},   {"indices", one_based},          {"samples", r.samples},
                      {"tolerance", r.tolerance}, {"pass", r.pass}};
  if (!r.part.empty()) j["part"] = r.part;
  return j;
}

inline nlohmann::json to_json(const CheckSummary& s) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : s.entries) {
    nlohmann::json j = {{"identity", e.name}, {"applicable", e.report.has_value()}};
    if (e.report) {
      j["target"] = e.target;
      j["report"] = to_json(*e.report);
    } else {
      j["reason"] = e.reason;
    }
    entries.push_back(std::move(j));
  }
  return {{"system", s.system}, {"prng", Sampler::name}, {"seed", s.seed},    {"samples", s.samples},
          {"tolerance", s.tolerance}, {"pass", s.pass},   {"identities", entries}};
}

inline nlohmann::json to_json(const SolveReport& r) {
  nlohmann::json j = {{"consistent", r.consistent},
                      {"residual", r.residual},
                      {"rank", r.rank},
                      {"kernel_dim", r.kernel_dim},
                      {"unique", r.unique},
                      {"surjectivity_possible", r.surjectivity_possible},
                      {"tolerance", r.tolerance}};
  j["x"] = r.x ? nlohmann::json(*r.x) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const ConservationReport& r) {
  nlohmann::json drifts = nlohmann::json::array();
  for (const auto& d : r.drifts)
    drifts.push_back({{"name", d.name}, {"initial", d.initial}, {"max_relative_drift", d.max_relative_drift}});
  nlohmann::json j = {{"drifts", drifts}, {"max_abs_divergence", r.max_abs_divergence}};
  j["max_hdw_residual"] = r.max_hdw_residual ? nlohmann::json(*r.max_hdw_residual) : nlohmann::json(nullptr);
  return j;
}

inline const char* to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::completed:
      return "completed";
    case TrajectoryStatus::truncated:
      return "truncated";
    case TrajectoryStatus::failed:
      return "failed";
  }
  return "?";
}

}  // namespace ghm
