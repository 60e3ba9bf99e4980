#pragma once

// JSON system configs: {"name", "n", "k", "mode", "coefficients", "hamiltonians",
// "params", "domain", "aliases", optional "base_point", "density", "summary"}.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghm/dynamics.hpp"
#include "ghm/error.hpp"
#include "ghm/expr.hpp"

namespace ghm {

/// Malformed config. `pointer()` is the JSON pointer of the offending value.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : InvalidArgument((pointer.empty() ? std::string("config") : pointer) + ": " + message),
        pointer_(std::move(pointer)) {}

  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

namespace detail {

inline std::string pointer_token(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

inline std::string child(const std::string& ptr, std::string_view key) { return ptr + "/" + pointer_token(key); }
inline std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& ptr) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(ptr, std::string("missing field \"") + key + "\"");
  return *it;
}

inline int as_int(const nlohmann::json& v, const std::string& ptr) {
  if (!v.is_number_integer()) throw ConfigError(ptr, "expected an integer");
  return v.get<int>();
}

inline double as_number(const nlohmann::json& v, const std::string& ptr) {
  if (!v.is_number()) throw ConfigError(ptr, "expected a number");
  return v.get<double>();
}

inline const std::string& as_string(const nlohmann::json& v, const std::string& ptr) {
  if (!v.is_string()) throw ConfigError(ptr, "expected a string");
  return v.get_ref<const std::string&>();
}

inline const nlohmann::json& as_array(const nlohmann::json& v, const std::string& ptr, std::size_t size = 0) {
  if (!v.is_array()) throw ConfigError(ptr, "expected an array");
  if (size && v.size() != size)
    throw ConfigError(ptr, "expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
  return v;
}

inline Expression parse_field(const nlohmann::json& v, const std::string& ptr, const ParseContext& ctx,
                              const Parameters& params) {
  try {
    return ghm::bind(parse(as_string(v, ptr), ctx), params);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(ptr, e.what());
  }
}

/// "1,2,4" -> {0,1,3}
inline MultiIndex parse_multi_index(std::string_view key, int n, int k, const std::string& ptr) {
  std::vector<int> axes;
  std::stringstream ss{std::string(key)};
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) throw ConfigError(ptr, "bad multi-index \"" + std::string(key) + "\"");
    if (v < 1 || v > n) throw ConfigError(ptr, "axis " + std::to_string(v) + " outside 1.." + std::to_string(n));
    axes.push_back(v - 1);
  }
  if (static_cast<int>(axes.size()) != k)
    throw ConfigError(ptr, "multi-index \"" + std::string(key) + "\" has degree " + std::to_string(axes.size()) +
                               ", expected " + std::to_string(k));
  try {
    return MultiIndex(std::move(axes));
  } catch (const InvalidArgument& e) {
    throw ConfigError(ptr, e.what());
  }
}

}  // namespace detail

/// Builds and validates a SystemSpec. Every failure is a ConfigError.
inline SystemSpec load_config(const nlohmann::json& doc) {
  using namespace detail;
  const std::string root;
  if (!doc.is_object()) throw ConfigError(root, "expected a JSON object");

  SystemSpec s;
  s.name = as_string(require(doc, "name", root), "/name");
  s.n = as_int(require(doc, "n", root), "/n");
  s.k = as_int(require(doc, "k", root), "/k");
  if (s.n < 1 || s.n > max_dimension) throw ConfigError("/n", "n must be in 1.." + std::to_string(max_dimension));
  if (s.k < 2 || s.k > s.n) throw ConfigError("/k", "need 2 <= k <= n");
  std::string mode = as_string(require(doc, "mode", root), "/mode");
  if (mode != "form" && mode != "tensor") throw ConfigError("/mode", "mode must be \"form\" or \"tensor\"");
  if (auto it = doc.find("summary"); it != doc.end()) s.summary = as_string(*it, "/summary");

  ParseContext ctx;
  ctx.dimension = s.n;
  if (auto it = doc.find("aliases"); it != doc.end()) {
    as_array(*it, "/aliases", s.n);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& name = as_string((*it)[i], child("/aliases", i));
      if (!name.empty() && !seen.insert(name).second) throw ConfigError(child("/aliases", i), "duplicate alias " + name);
      s.aliases.push_back(name);
    }
    ctx.aliases = s.aliases;
  }
  if (auto it = doc.find("params"); it != doc.end()) {
    if (!it->is_object()) throw ConfigError("/params", "expected an object");
    for (const auto& [name, value] : it->items()) {
      s.params[name] = as_number(value, child("/params", name));
      ctx.parameters.insert(name);
    }
  }

  const auto& dom = as_array(require(doc, "domain", root), "/domain", s.n);
  for (std::size_t i = 0; i < dom.size(); ++i) {
    auto ptr = child("/domain", i);
    const auto& pair = as_array(dom[i], ptr, 2);
    double lo = as_number(pair[0], child(ptr, 0)), hi = as_number(pair[1], child(ptr, 1));
    if (!(lo < hi)) throw ConfigError(ptr, "need lo < hi");
    s.domain.emplace_back(lo, hi);
  }
  if (auto it = doc.find("base_point"); it != doc.end()) {
    as_array(*it, "/base_point", s.n);
    for (std::size_t i = 0; i < it->size(); ++i) s.base_point.push_back(as_number((*it)[i], child("/base_point", i)));
  } else {
    for (const auto& [lo, hi] : s.domain) s.base_point.push_back(0.5 * (lo + hi));
  }

  const auto& hs = as_array(require(doc, "hamiltonians", root), "/hamiltonians", static_cast<std::size_t>(s.k - 1));
  std::vector<Expression> hams;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    hams.push_back(parse_field(hs[i], child("/hamiltonians", i), ctx, s.params));
    s.hamiltonians.push_back({"H" + std::to_string(i + 1), hams.back()});
  }

  const auto& coeffs = require(doc, "coefficients", root);
  if (!coeffs.is_object() || coeffs.empty()) throw ConfigError("/coefficients", "expected a nonempty object");
  FormField w(s.n, s.k);
  MultiVectorField j(s.n, s.k);
  std::set<MultiIndex> seen;
  for (const auto& [key, value] : coeffs.items()) {
    auto ptr = child("/coefficients", key);
    MultiIndex idx = parse_multi_index(key, s.n, s.k, ptr);
    if (!seen.insert(idx).second) throw ConfigError(ptr, "repeated multi-index");
    Expression c = parse_field(value, ptr, ctx, s.params);
    if (mode == "form")
      w.add(idx, c);
    else
      j.add(idx, c);
  }
  if (mode == "form")
    s.form = FormRoute{w, hams};
  else
    s.tensor = TensorRoute{j, hams};

  if (auto it = doc.find("density"); it != doc.end()) s.density = parse_field(*it, "/density", ctx, s.params);

  try {
    validate(s);
  } catch (const InvalidArgument& e) {
    throw ConfigError(root, e.what());
  }
  return s;
}

inline SystemSpec load_config_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return load_config(doc);
}

inline SystemSpec load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_config_text(buf.str());
}

}  // namespace ghm
