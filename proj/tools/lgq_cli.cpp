#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "lgq/evaluate.hpp"
#include "lgq/io.hpp"
#include "lgq/scan.hpp"
#include "lgq/verify.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "1.0.0";
constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

int parse_outcome(const std::string& flag, const std::string& v) {
  if (v == "1" || v == "+1") return 1;
  if (v == "-1") return -1;
  throw UsageError(flag + " must be 1, +1 or -1 (got '" + v + "')");
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string route = "series";
  std::string s1 = "1", s2 = "1";
  double t1 = 0.0, t2 = 0.0;
  double x0 = 0.0, p0 = 0.0, r = 0.0, theta0 = 0.0, temp_ratio = 0.0;
  std::string projector = "sign";
  std::optional<double> L;
  double offset_amp = 0.0, offset_phase = 0.0, offset_const = 0.0;
  std::optional<int> nmax;
  std::string summation;
  int quad_order = 16;
  int dim = 300;
  double omega = 1.0;
  std::string out = "text";
};

int run_eval(const EvalArgs& a) {
  lgq::Route route;
  try {
    route = lgq::parse_route(a.route);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const int s1 = parse_outcome("--s1", a.s1), s2 = parse_outcome("--s2", a.s2);
  if (a.temp_ratio < 0.0) throw UsageError("--temp-ratio must be >= 0");
  if (a.r < 0.0) throw UsageError("--r must be >= 0");
  const bool has_offset = a.offset_amp != 0.0 || a.offset_const != 0.0 || a.offset_phase != 0.0;

  lgq::MeasurementSpec meas;
  if (a.projector == "window") {
    if (!a.L) throw UsageError("--projector window requires --L");
    if (!(*a.L > 0.0)) throw UsageError("--L must be > 0");
    if (has_offset) throw UsageError("--offset-* flags apply only to --projector sign");
    meas = lgq::MeasurementSpec::window(*a.L);
  } else if (a.projector == "sign") {
    if (a.L) throw UsageError("--L applies only to --projector window");
    meas = lgq::MeasurementSpec::sign({a.offset_amp, a.offset_phase, a.offset_const});
  } else {
    throw UsageError("--projector must be sign or window");
  }
  const auto state = lgq::StateSpec::from_phase_space(a.x0, a.p0, a.r, a.theta0, lgq::n_th_from_temperature(a.temp_ratio));
  try {
    lgq::check_route_applicable(route, state, meas);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  lgq::Numerics num;
  if (a.nmax) {
    if (*a.nmax < 1) throw UsageError("--nmax must be >= 1");
    num.trunc.n_max = *a.nmax;
    num.trunc.summation = lgq::Summation::Plain;
  }
  if (a.summation == "plain") num.trunc.summation = lgq::Summation::Plain;
  else if (a.summation == "smoothed") num.trunc.summation = lgq::Summation::Smoothed;
  else if (!a.summation.empty()) throw UsageError("--summation must be plain or smoothed");
  if (a.quad_order < 2 || a.quad_order > 64) throw UsageError("--quad-order must be in [2, 64]");
  num.integral.quad_order = a.quad_order;
  num.oracle.dim = a.dim;
  lgq::UnitsConfig units{a.omega};
  try {
    num.trunc.validate();
    num.oracle.validate();
    units.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const auto v = lgq::evaluate_qpd(state, meas, {s1, s2, a.t1, a.t2, route}, num, units);
  if (a.out == "json") {
    json j;
    j["q"] = num_or_null(v.value);
    j[v.diagnostic_name] = num_or_null(v.diagnostic);
    j["converged"] = v.converged;
    j["route"] = lgq::to_string(route);
    j["projector"] = meas.name();
    j["s1"] = s1;
    j["s2"] = s2;
    j["t1"] = a.t1;
    j["t2"] = a.t2;
    j["x0"] = a.x0;
    j["p0"] = a.p0;
    j["r"] = a.r;
    j["theta0"] = a.theta0;
    j["n_th"] = state.n_th;
    if (meas.is_window()) j["L"] = meas.L;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "q = " << lgq::format_double(v.value) << "\n"
              << v.diagnostic_name << " = " << lgq::format_double(v.diagnostic, 3) << "\n"
              << "converged = " << (v.converged ? "true" : "false") << "\n"
              << "route = " << lgq::to_string(route) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- scan

std::pair<int, int> line_col_of(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// A manifest written by `scan` can be fed back as a config.
lgq::ScanConfig config_from_manifest(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col_of(text, e.byte > 0 ? e.byte - 1 : 0);
    throw lgq::ConfigError("malformed JSON manifest", line, col);
  }
  const json* cfg = &j;
  if (j.contains("manifest")) cfg = &j["manifest"];
  if (!cfg->contains("config") || !(*cfg)["config"].is_object())
    throw lgq::ConfigError("manifest has no 'config' object", 0, 0);
  std::vector<lgq::ConfigEntry> entries;
  for (const auto& [k, v] : (*cfg)["config"].items()) {
    if (!v.is_string()) throw lgq::ConfigError("manifest config value for '" + k + "' must be a string", 0, 0);
    entries.push_back({k, v.get<std::string>(), 0, 0, 0});
  }
  return lgq::scan_config_from_entries(entries);
}

json manifest_core(const lgq::ScanConfig& cfg, const lgq::ScanResult& res, unsigned threads, double seconds) {
  json m;
  m["tool"] = "lgq";
  m["version"] = kToolVersion;
  json c = json::object();
  for (const auto& [k, v] : lgq::resolved_config(cfg)) c[k] = v;
  m["config"] = c;
  m["route"] = lgq::to_string(cfg.route);
  m["numerics"] = {{"series_n_max", cfg.numerics.trunc.n_max},
                   {"series_summation", cfg.numerics.trunc.summation == lgq::Summation::Plain ? "plain" : "smoothed"},
                   {"series_tail_tol", cfg.numerics.trunc.tail_tol},
                   {"thermal_weight_floor", cfg.numerics.trunc.weight_floor},
                   {"quad_order", cfg.numerics.integral.quad_order},
                   {"quad_tol", cfg.numerics.integral.tol},
                   {"oracle_dim", cfg.numerics.oracle.dim}};
  m["threads"] = threads;
  m["wall_time_seconds"] = seconds;
  m["cells"] = res.cells.size();
  m["failed_cells"] = res.failed_cells;
  m["below_floor_cells"] = res.below_floor_cells;
  m["global"] = {{"q_min", num_or_null(res.global_min)},
                 {"axis1", num_or_null(res.global_axis1)},
                 {"axis2", num_or_null(res.global_axis2)},
                 {"t2_argmin", num_or_null(res.global_t2)}};
  return m;
}

int run_scan(const std::string& config_path, const std::string& out_prefix_arg, unsigned threads) {
  if (threads < 1) throw UsageError("--threads must be >= 1");
  const std::string text = lgq::read_text_file(config_path);
  const auto first = text.find_first_not_of(" \t\r\n");
  const lgq::ScanConfig cfg =
      first != std::string::npos && text[first] == '{' ? config_from_manifest(text) : lgq::parse_scan_config(text);

  std::string prefix = out_prefix_arg;
  if (prefix.empty()) {
    std::filesystem::path p(config_path);
    prefix = p.stem().string();
    if (prefix.size() > 9 && prefix.ends_with(".manifest")) prefix.resize(prefix.size() - 9);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = lgq::scan_plane(cfg, threads);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string csv = lgq::scan_csv(res);
  const std::string csv_path = prefix + ".csv", json_path = prefix + ".json", manifest_path = prefix + ".manifest.json";

  json manifest = manifest_core(cfg, res, threads, seconds);
  manifest["outputs"] = {{"csv", {{"path", std::filesystem::path(csv_path).filename().string()}, {"sha256", sha256_hex(csv)}}}};

  json twin;
  twin["header"] = {"axis1", "axis2", "q_min", "t2_argmin"};
  twin["axis1_name"] = cfg.plane == lgq::Plane::X0P0 ? "x0" : "r";
  twin["axis2_name"] = cfg.plane == lgq::Plane::X0P0 ? "p0" : "L";
  json rows = json::array();
  for (const auto& c : res.cells)
    rows.push_back({c.axis1, c.axis2, c.failed ? json(nullptr) : num_or_null(c.q_min),
                    c.failed ? json(nullptr) : num_or_null(c.t2_argmin)});
  twin["rows"] = rows;
  json failures = json::array();
  for (std::size_t k = 0; k < res.cells.size(); ++k)
    if (res.cells[k].failed) failures.push_back({{"index", k}, {"error", res.cells[k].error}});
  twin["failures"] = failures;
  twin["manifest"] = manifest;
  const std::string twin_text = twin.dump(2) + "\n";

  manifest["outputs"]["json"] = {{"path", std::filesystem::path(json_path).filename().string()},
                                 {"sha256", sha256_hex(twin_text)}};
  write_file(csv_path, csv);
  write_file(json_path, twin_text);
  write_file(manifest_path, manifest.dump(2) + "\n");

  std::cout << "cells = " << res.cells.size() << " (failed " << res.failed_cells << ")\n"
            << "global q_min = " << lgq::format_double(res.global_min) << " at axis1 = "
            << lgq::format_double(res.global_axis1) << ", axis2 = " << lgq::format_double(res.global_axis2)
            << ", t2 = " << lgq::format_double(res.global_t2) << "\n"
            << "wrote " << csv_path << ", " << json_path << ", " << manifest_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- verify

int run_verify(const std::string& name) {
  const auto& all = lgq::verify::cases();
  std::vector<std::string> names;
  if (name == "all") {
    for (const auto& c : all) names.push_back(c.first);
  } else {
    bool found = false;
    for (const auto& c : all) found = found || c.first == name;
    if (!found) {
      std::string known;
      for (const auto& c : all) known += (known.empty() ? "" : ", ") + c.first;
      throw UsageError("unknown verify case '" + name + "' (known: " + known + ", all)");
    }
    names.push_back(name);
  }
  bool ok = true;
  for (const auto& n : names) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const auto& c) { return c.first == n; });
    const auto rep = it->second();
    for (const auto& c : rep.checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << n << ": " << c.name << "  measured=" << lgq::format_double(c.measured, 10)
                << " expected=" << lgq::format_double(c.expected, 10);
      if (c.relation == "|m-e|<=tol" || c.relation == "lo<=m<=hi") std::cout << " tol=" << lgq::format_double(c.tol, 3);
      std::cout << " [" << c.relation << "]\n";
    }
    std::cout << (rep.pass() ? "PASS " : "FAIL ") << n << " (" << lgq::format_double(rep.seconds, 3) << " s)\n";
    ok = ok && rep.pass();
  }
  return ok ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-time quasi-probabilities of a harmonic oscillator"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate one quasi-probability");
  eval->add_option("--route", ea.route, "integral, series or oracle")->capture_default_str();
  eval->add_option("--s1", ea.s1, "outcome at t1: 1 or -1")->capture_default_str();
  eval->add_option("--s2", ea.s2, "outcome at t2: 1 or -1")->capture_default_str();
  eval->add_option("--t1", ea.t1, "first time (omega t)")->capture_default_str();
  eval->add_option("--t2", ea.t2, "second time (omega t)")->capture_default_str();
  eval->add_option("--x0", ea.x0, "initial position of the displacement")->capture_default_str();
  eval->add_option("--p0", ea.p0, "initial momentum of the displacement")->capture_default_str();
  eval->add_option("--r", ea.r, "squeezing strength")->capture_default_str();
  eval->add_option("--theta0", ea.theta0, "squeezing angle (radians)")->capture_default_str();
  eval->add_option("--temp-ratio", ea.temp_ratio, "k_B T / hbar omega")->capture_default_str();
  eval->add_option("--projector", ea.projector, "sign or window")->capture_default_str();
  eval->add_option("--L", ea.L, "window half-width");
  eval->add_option("--offset-amp", ea.offset_amp, "offset amplitude (a + a^dagger units)")->capture_default_str();
  eval->add_option("--offset-phase", ea.offset_phase, "offset phase (radians)")->capture_default_str();
  eval->add_option("--offset-const", ea.offset_const, "constant offset (a + a^dagger units)")->capture_default_str();
  eval->add_option("--nmax", ea.nmax, "series truncation; implies plain summation unless --summation is given");
  eval->add_option("--summation", ea.summation, "series summation: plain or smoothed");
  eval->add_option("--quad-order", ea.quad_order, "Gauss-Legendre order of the integral route")->capture_default_str();
  eval->add_option("--dim", ea.dim, "Fock dimension of the oracle route")->capture_default_str();
  eval->add_option("--omega", ea.omega, "oscillator frequency")->capture_default_str();
  eval->add_option("--out", ea.out, "text or json")->check(CLI::IsMember({"text", "json"}))->capture_default_str();

  std::string config_path, out_prefix;
  unsigned threads = 1;
  auto* scan = app.add_subcommand("scan", "Scan a parameter plane from a config file or manifest");
  scan->add_option("config", config_path, "key = value config file, or a manifest JSON")->required();
  scan->add_option("--out", out_prefix, "output prefix (default: config file stem)");
  scan->add_option("--threads", threads, "worker threads")->capture_default_str();

  std::string case_name;
  auto* verify = app.add_subcommand("verify", "Run a canned verification case");
  verify->add_option("case", case_name,
                     "fig1, table1, fig2min, window-min, thermal-order, normalization, reduction, offset-equiv, "
                     "luders, same-time, window-period, battery, determinism or all")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*eval) return run_eval(ea);
    if (*scan) return run_scan(config_path, out_prefix, threads);
    if (*verify) return run_verify(case_name);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const lgq::ConfigError& e) {
    std::cerr << "config error: " << config_path << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const lgq::CapabilityError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFail;
  }
  return kExitUsage;
}
