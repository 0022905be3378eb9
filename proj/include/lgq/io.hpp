#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "lgq/scan.hpp"

namespace lgq {

/// Configuration error carrying a 1-based line and column (0 when unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line, int column)
      : std::runtime_error(format(msg, line, column)), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& msg, int line, int column) {
    if (line <= 0) return msg;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg;
  }
  int line_;
  int column_;
};

/// Locale-independent rendering with `digits` significant digits; NaN is
/// written as `nan` and infinities as `inf` / `-inf`.
inline std::string format_double(double v, int digits = 17) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  return std::string(buf, r.ptr);
}

/// Shortest round-trip rendering, used for canonical config text.
inline std::string format_double_exact(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline bool parse_double(const std::string& s, double& out) {
  std::string t = s;
  if (!t.empty() && t.front() == '+') t.erase(0, 1);
  if (t.empty()) return false;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
  return r.ec == std::errc() && r.ptr == t.data() + t.size() && std::isfinite(out);
}

inline bool parse_int(const std::string& s, int& out) {
  std::string t = s;
  if (!t.empty() && t.front() == '+') t.erase(0, 1);
  if (t.empty()) return false;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
  return r.ec == std::errc() && r.ptr == t.data() + t.size();
}

/// One `key = value` entry of a config file with its source position.
struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
  int key_column = 0;
  int value_column = 0;
};

/// Parses the key-value format: one `key = value` per line, `#` starts a
/// comment, blank lines are ignored, duplicate keys are rejected.
inline std::vector<ConfigEntry> parse_config_entries(const std::string& text) {
  std::vector<ConfigEntry> out;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
    std::size_t b = 0;
    while (b < line.size() && is_space(line[b])) ++b;
    if (b == line.size()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no, static_cast<int>(b) + 1);
    std::size_t ke = eq;
    while (ke > b && is_space(line[ke - 1])) --ke;
    if (ke == b) throw ConfigError("missing key before '='", line_no, static_cast<int>(eq) + 1);
    ConfigEntry e;
    e.key = line.substr(b, ke - b);
    e.line = line_no;
    e.key_column = static_cast<int>(b) + 1;
    for (std::size_t k = 0; k < e.key.size(); ++k) {
      const char c = e.key[k];
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
        throw ConfigError("invalid character in key", line_no, e.key_column + static_cast<int>(k));
    }
    std::size_t vb = eq + 1;
    while (vb < line.size() && is_space(line[vb])) ++vb;
    std::size_t ve = line.size();
    while (ve > vb && is_space(line[ve - 1])) --ve;
    e.value_column = static_cast<int>(vb) + 1;
    if (vb == ve) throw ConfigError("missing value for key '" + e.key + "'", line_no, e.value_column);
    e.value = line.substr(vb, ve - vb);
    if (auto it = seen.find(e.key); it != seen.end())
      throw ConfigError("duplicate key '" + e.key + "' (first set on line " + std::to_string(it->second) + ")",
                        line_no, e.key_column);
    seen[e.key] = line_no;
    out.push_back(std::move(e));
  }
  return out;
}

namespace detail {

struct KeyHandler {
  std::function<bool(ScanConfig&, const std::string&)> set;
  std::function<std::string(const ScanConfig&)> get;
  const char* expected;
};

inline KeyHandler real_key(double ScanConfig::*field) {
  return {[field](ScanConfig& c, const std::string& v) { return parse_double(v, c.*field); },
          [field](const ScanConfig& c) { return format_double_exact(c.*field); }, "a finite real number"};
}

template <class Get>
inline KeyHandler real_ref(Get get) {
  return {[get](ScanConfig& c, const std::string& v) { return parse_double(v, get(c)); },
          [get](const ScanConfig& c) { return format_double_exact(get(const_cast<ScanConfig&>(c))); },
          "a finite real number"};
}

template <class Get>
inline KeyHandler int_ref(Get get) {
  return {[get](ScanConfig& c, const std::string& v) { return parse_int(v, get(c)); },
          [get](const ScanConfig& c) { return std::to_string(get(const_cast<ScanConfig&>(c))); }, "an integer"};
}

inline KeyHandler outcome_key(int ScanConfig::*field) {
  return {[field](ScanConfig& c, const std::string& v) {
            if (v == "1" || v == "+1") return (c.*field = 1), true;
            if (v == "-1") return (c.*field = -1), true;
            return false;
          },
          [field](const ScanConfig& c) { return std::to_string(c.*field); }, "1, +1 or -1"};
}

// Every key in canonical order. Names mirror the ScanConfig fields.
inline const std::vector<std::pair<std::string, KeyHandler>>& config_keys() {
  static const std::vector<std::pair<std::string, KeyHandler>> keys = [] {
    std::vector<std::pair<std::string, KeyHandler>> k;
    k.push_back({"plane",
                 {[](ScanConfig& c, const std::string& v) {
                    if (v != "x0p0" && v != "rL") return false;
                    c.plane = parse_plane(v);
                    return true;
                  },
                  [](const ScanConfig& c) { return to_string(c.plane); }, "x0p0 or rL"}});
    k.push_back({"route",
                 {[](ScanConfig& c, const std::string& v) {
                    if (v != "integral" && v != "series" && v != "oracle") return false;
                    c.route = parse_route(v);
                    return true;
                  },
                  [](const ScanConfig& c) { return to_string(c.route); }, "integral, series or oracle"}});
    k.push_back({"r", real_key(&ScanConfig::r)});
    k.push_back({"theta0", real_key(&ScanConfig::theta0)});
    k.push_back({"n_th", real_key(&ScanConfig::n_th)});
    k.push_back({"s1", outcome_key(&ScanConfig::s1)});
    k.push_back({"s2", outcome_key(&ScanConfig::s2)});
    k.push_back({"t1", real_key(&ScanConfig::t1)});
    k.push_back({"L", real_key(&ScanConfig::L)});
    k.push_back({"offset.amplitude", real_ref([](ScanConfig& c) -> double& { return c.offset.amplitude; })});
    k.push_back({"offset.phase", real_ref([](ScanConfig& c) -> double& { return c.offset.phase; })});
    k.push_back({"offset.constant", real_ref([](ScanConfig& c) -> double& { return c.offset.constant; })});
    k.push_back({"axis1.min", real_ref([](ScanConfig& c) -> double& { return c.axis1.min; })});
    k.push_back({"axis1.max", real_ref([](ScanConfig& c) -> double& { return c.axis1.max; })});
    k.push_back({"axis1.steps", int_ref([](ScanConfig& c) -> int& { return c.axis1.steps; })});
    k.push_back({"axis2.min", real_ref([](ScanConfig& c) -> double& { return c.axis2.min; })});
    k.push_back({"axis2.max", real_ref([](ScanConfig& c) -> double& { return c.axis2.max; })});
    k.push_back({"axis2.steps", int_ref([](ScanConfig& c) -> int& { return c.axis2.steps; })});
    k.push_back({"t2_search.t2_min", real_ref([](ScanConfig& c) -> double& { return c.t2_search.t2_min; })});
    k.push_back({"t2_search.t2_max", real_ref([](ScanConfig& c) -> double& { return c.t2_search.t2_max; })});
    k.push_back({"t2_search.coarse_steps", int_ref([](ScanConfig& c) -> int& { return c.t2_search.coarse_steps; })});
    k.push_back({"t2_search.refine_iters", int_ref([](ScanConfig& c) -> int& { return c.t2_search.refine_iters; })});
    k.push_back({"numerics.n_max", int_ref([](ScanConfig& c) -> int& { return c.numerics.trunc.n_max; })});
    k.push_back({"numerics.tail_tol", real_ref([](ScanConfig& c) -> double& { return c.numerics.trunc.tail_tol; })});
    k.push_back({"numerics.summation",
                 {[](ScanConfig& c, const std::string& v) {
                    if (v == "plain") c.numerics.trunc.summation = Summation::Plain;
                    else if (v == "smoothed") c.numerics.trunc.summation = Summation::Smoothed;
                    else return false;
                    return true;
                  },
                  [](const ScanConfig& c) {
                    return std::string(c.numerics.trunc.summation == Summation::Plain ? "plain" : "smoothed");
                  },
                  "plain or smoothed"}});
    k.push_back({"numerics.quad_order", int_ref([](ScanConfig& c) -> int& { return c.numerics.integral.quad_order; })});
    k.push_back({"numerics.quad_tol", real_ref([](ScanConfig& c) -> double& { return c.numerics.integral.tol; })});
    k.push_back({"numerics.oracle_dim", int_ref([](ScanConfig& c) -> int& { return c.numerics.oracle.dim; })});
    k.push_back({"units.omega", real_ref([](ScanConfig& c) -> double& { return c.units.omega; })});
    return k;
  }();
  return keys;
}

}  // namespace detail

/// Builds a ScanConfig from parsed entries. `temp_ratio` (k_B T / hbar omega)
/// is accepted as an alternative to n_th. Semantic validation errors are
/// reported without a position.
inline ScanConfig scan_config_from_entries(const std::vector<ConfigEntry>& entries) {
  ScanConfig cfg;
  const auto& keys = detail::config_keys();
  const ConfigEntry* temp = nullptr;
  const ConfigEntry* nth = nullptr;
  for (const auto& e : entries) {
    if (e.key == "temp_ratio") {
      temp = &e;
      continue;
    }
    if (e.key == "n_th") nth = &e;
    auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.first == e.key; });
    if (it == keys.end()) throw ConfigError("unknown key '" + e.key + "'", e.line, e.key_column);
    if (!it->second.set(cfg, e.value))
      throw ConfigError("invalid value '" + e.value + "' for '" + e.key + "' (expected " + it->second.expected + ")",
                        e.line, e.value_column);
  }
  if (temp) {
    if (nth) throw ConfigError("temp_ratio and n_th are mutually exclusive", temp->line, temp->key_column);
    double t = 0.0;
    if (!parse_double(temp->value, t) || t < 0.0)
      throw ConfigError("invalid value '" + temp->value + "' for 'temp_ratio' (expected a real number >= 0)",
                        temp->line, temp->value_column);
    cfg.n_th = n_th_from_temperature(t);
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("invalid configuration: ") + ex.what(), 0, 0);
  }
  return cfg;
}

inline ScanConfig parse_scan_config(const std::string& text) { return scan_config_from_entries(parse_config_entries(text)); }

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'", 0, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fully resolved config as ordered key-value pairs; doubles use the
/// shortest round-trip form so that re-parsing reproduces the config exactly.
inline std::vector<std::pair<std::string, std::string>> resolved_config(const ScanConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, h] : detail::config_keys()) out.emplace_back(name, h.get(cfg));
  return out;
}

inline std::string config_to_text(const ScanConfig& cfg) {
  std::string s;
  for (const auto& [k, v] : resolved_config(cfg)) s += k + " = " + v + "\n";
  return s;
}

/// CSV payload: header `axis1,axis2,q_min,t2_argmin`, one row per cell in
/// row-major order, 17 significant digits, failed cells as `nan`.
inline std::string scan_csv(const ScanResult& res) {
  std::string s = "axis1,axis2,q_min,t2_argmin\n";
  for (const auto& c : res.cells) {
    s += format_double(c.axis1) + ',' + format_double(c.axis2) + ',';
    s += (c.failed ? std::string("nan") : format_double(c.q_min)) + ',';
    s += (c.failed ? std::string("nan") : format_double(c.t2_argmin)) + '\n';
  }
  return s;
}

}  // namespace lgq
