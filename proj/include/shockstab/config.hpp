#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "shockstab/core.hpp"
#include "shockstab/euler.hpp"
#include "shockstab/gas.hpp"
#include "shockstab/transport.hpp"

namespace shockstab {

using json = nlohmann::json;

namespace detail {

inline json toml_to_json(const toml::node& n) {
  if (const auto* t = n.as_table()) {
    json j = json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (const auto* a = n.as_array()) {
    json j = json::array();
    for (const auto& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (const auto* v = n.as_string()) return v->get();
  if (const auto* v = n.as_integer()) return v->get();
  if (const auto* v = n.as_floating_point()) return v->get();
  if (const auto* v = n.as_boolean()) return v->get();
  throw Error(ErrorKind::ConfigError, "unsupported TOML value (dates and times are not accepted)");
}

}  // namespace detail

/// Parses TOML or JSON text (JSON when the first non-blank character is '{').
inline json parse_config_text(const std::string& text) {
  const auto p = text.find_first_not_of(" \t\r\n");
  if (p != std::string::npos && text[p] == '{') {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::ConfigError, std::string("JSON parse error: ") + e.what());
    }
  }
  try {
    return detail::toml_to_json(toml::parse(text));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw Error(ErrorKind::ConfigError, os.str());
  }
}

inline json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Typed access to a dotted path with errors naming the field.
class ConfigView {
 public:
  explicit ConfigView(const json& j) : j_(j) {}

  bool has(const std::string& path) const { return find(path) != nullptr; }

  double number(const std::string& path) const {
    const json& v = require(path);
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
  }
  double number(const std::string& path, double fallback) const { return has(path) ? number(path) : fallback; }

  double positive(const std::string& path) const {
    const double x = number(path);
    if (!(x > 0.0)) fail(path, "must be > 0");
    return x;
  }
  double positive(const std::string& path, double fallback) const { return has(path) ? positive(path) : fallback; }

  long integer(const std::string& path) const {
    const json& v = require(path);
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long>();
  }
  long integer(const std::string& path, long fallback) const { return has(path) ? integer(path) : fallback; }

  long positive_integer(const std::string& path) const {
    const long x = integer(path);
    if (x <= 0) fail(path, "must be a positive integer");
    return x;
  }
  long positive_integer(const std::string& path, long fallback) const {
    return has(path) ? positive_integer(path) : fallback;
  }

  std::string string(const std::string& path) const {
    const json& v = require(path);
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& path, const std::string& fallback) const {
    return has(path) ? string(path) : fallback;
  }

  std::string choice(const std::string& path, const std::vector<std::string>& options, const std::string& fallback) const {
    const std::string s = string(path, fallback);
    for (const auto& o : options)
      if (o == s) return s;
    std::string msg = "must be one of";
    for (const auto& o : options) msg += " '" + o + "'";
    fail(path, msg);
  }

  bool boolean(const std::string& path, bool fallback) const {
    if (!has(path)) return fallback;
    const json& v = require(path);
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& path) const {
    const json& v = require(path);
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(path, "expected a non-empty array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<double> numbers(const std::string& path, const std::vector<double>& fallback) const {
    return has(path) ? numbers(path) : fallback;
  }

  GasState state(const std::string& path) const {
    const GasState s = GasState::planar(positive(path + ".rho"), number(path + ".u1"), positive(path + ".theta"));
    return s;
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::ConfigError, "field '" + path + "': " + what);
  }

 private:
  const json* find(const std::string& path) const {
    const json* cur = &j_;
    std::size_t b = 0;
    while (b <= path.size()) {
      const std::size_t e = path.find('.', b);
      const std::string key = path.substr(b, e == std::string::npos ? std::string::npos : e - b);
      if (!cur->is_object()) return nullptr;
      const auto it = cur->find(key);
      if (it == cur->end()) return nullptr;
      cur = &*it;
      if (e == std::string::npos) break;
      b = e + 1;
    }
    return cur;
  }
  const json& require(const std::string& path) const {
    const json* v = find(path);
    if (!v) fail(path, "missing");
    return *v;
  }

  const json& j_;
};

// ---------------------------------------------------------------------------
// Scenario sections

struct EndStates {
  GasState left, right;
  std::optional<GasState> intermediate;  // known when manufactured from it
};

/// [states] accepts one of
///   left + right;
///   left + strength1 + strength3 (Hugoniot parameters, 1-shock from left,
///   3-shock upstream of the intermediate state);
///   intermediate + delta1 + delta3 (wave strengths of the two shocks).
inline EndStates parse_states(const ConfigView& c) {
  EndStates s;
  if (c.has("states.intermediate")) {
    const GasState mid = c.state("states.intermediate");
    const double d1 = c.number("states.delta1"), d3 = c.number("states.delta3");
    if (d1 < 0.0) ConfigView::fail("states.delta1", "must be >= 0");
    if (d3 < 0.0) ConfigView::fail("states.delta3", "must be >= 0");
    const RiemannData rd =
        manufacture_two_shock(mid, strength_for_wave_strength(mid, 1, d1), strength_for_wave_strength(mid, 3, d3));
    s.left = rd.left;
    s.right = rd.right;
    s.intermediate = mid;
    return s;
  }
  s.left = c.state("states.left");
  if (c.has("states.right")) {
    s.right = c.state("states.right");
    return s;
  }
  const double s1 = c.number("states.strength1"), s3 = c.number("states.strength3");
  if (s1 < 0.0) ConfigView::fail("states.strength1", "must be >= 0");
  if (s3 < 0.0) ConfigView::fail("states.strength3", "must be >= 0");
  const GasState mid = hugoniot_state(s.left, 1, s1).state;
  s.right = hugoniot_upstream(mid, 3, s3).state;
  s.intermediate = mid;
  return s;
}

inline Transport parse_transport(const ConfigView& c) {
  Transport t;
  t.mu_ref = c.number("transport.mu_ref");
  if (t.mu_ref < 0.0) ConfigView::fail("transport.mu_ref", "must be >= 0");
  t.theta_ref = c.positive("transport.theta_ref");
  t.prandtl = c.positive("transport.prandtl");
  t.nu_ref = c.positive("transport.nu_ref");
  return t;
}

}  // namespace shockstab
