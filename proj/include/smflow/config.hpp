#pragma once

// Experiment configuration in a flat key=value text format.
// One pair per line, '#' starts a comment, unknown keys are rejected.

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "smflow/error.hpp"

namespace smflow::config {

using cplx = std::complex<double>;

struct ExperimentConfig {
  std::string experiment = "simulate";
  std::string metric = "sphere";

  // initial data
  std::string profile = "gaussian";
  double epsilon = 0.05;
  double sigma0 = 1.0;
  double x0 = 0.0;
  double velocity = 0.0;
  std::string restart;  ///< checkpoint to start from instead of the profile

  // grid and integrator
  double half_length = 200.0;
  int n = 4096;
  double dt = 1e-2;
  double t_end = 10.0;
  std::string integrator = "IFRK4";
  std::string model = "full";  ///< full | truncated | reduced
  double dealias = 2.0 / 3.0;
  int diag_stride = 25;
  double chart_radius = 0.3;
  double boundary_tol = 1e-8;
  int sobolev_index = 8;

  // optional overrides of the normal-form coefficients
  std::string nu1;
  std::string nu2;
  std::string nu3;

  // Fourier tracking
  int tracked = 16;
  double sigma_min = 0.1;
  double sigma_max = 4.0;
  double phase_tol = 1e-4;
  double fit_t_min = 10.0;
  double fit_t_max = 0.0;  ///< 0 means t_end

  // final-state experiment
  std::string psi = "gaussian:1,0.05";
  std::string convention = "balanced";
  double N = 200.0;
  double N0 = 10.0;
  std::string ablate;  ///< comma list of v2, v3, v4, tail
  int residual_samples = 12;
  double eps_star = 0.0;  ///< 0 means unset
  int m = 8;
  double theta = 0.75;

  // vanishing-point scan
  std::string region = "-0.5,1.5,-0.5,0.5";
  int resolution = 21;
  double vanish_tol = 1e-8;

  std::string output = "out";
  bool quick = false;
  std::int64_t seed = 20240611;  ///< randomized property sweeps

  /// Keys that were given explicitly by the last parse; everything else is a default.
  std::set<std::string> explicit_keys;

  bool operator==(const ExperimentConfig& o) const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw Error(ErrorKind::ParseError, "key '" + key + "': '" + text + "' is not a number");
  }
  return v;
}

inline int parse_int(const std::string& key, const std::string& text) {
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorKind::ParseError, "key '" + key + "': '" + text + "' is not an integer");
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error(ErrorKind::ParseError, "key '" + key + "': '" + text + "' is not a boolean");
}

struct Field {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class T>
Field make_field(std::string key, T ExperimentConfig::*member) {
  Field f;
  f.key = key;
  if constexpr (std::is_same_v<T, double>) {
    f.get = [member](const ExperimentConfig& c) { return format_double(c.*member); };
    f.set = [member, key](ExperimentConfig& c, const std::string& v) { c.*member = parse_double(key, v); };
  } else if constexpr (std::is_same_v<T, int>) {
    f.get = [member](const ExperimentConfig& c) { return std::to_string(c.*member); };
    f.set = [member, key](ExperimentConfig& c, const std::string& v) { c.*member = parse_int(key, v); };
  } else if constexpr (std::is_same_v<T, std::int64_t>) {
    f.get = [member](const ExperimentConfig& c) { return std::to_string(c.*member); };
    f.set = [member, key](ExperimentConfig& c, const std::string& v) {
      std::int64_t out = 0;
      const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
      if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw Error(ErrorKind::ParseError, "key '" + key + "': '" + v + "' is not an integer");
      }
      c.*member = out;
    };
  } else if constexpr (std::is_same_v<T, bool>) {
    f.get = [member](const ExperimentConfig& c) { return std::string(c.*member ? "true" : "false"); };
    f.set = [member, key](ExperimentConfig& c, const std::string& v) { c.*member = parse_bool(key, v); };
  } else {
    f.get = [member](const ExperimentConfig& c) { return c.*member; };
    f.set = [member](ExperimentConfig& c, const std::string& v) { c.*member = v; };
  }
  return f;
}

inline const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> table = {
      make_field("experiment", &C::experiment),
      make_field("metric", &C::metric),
      make_field("profile", &C::profile),
      make_field("epsilon", &C::epsilon),
      make_field("sigma0", &C::sigma0),
      make_field("x0", &C::x0),
      make_field("velocity", &C::velocity),
      make_field("restart", &C::restart),
      make_field("half_length", &C::half_length),
      make_field("n", &C::n),
      make_field("dt", &C::dt),
      make_field("t_end", &C::t_end),
      make_field("integrator", &C::integrator),
      make_field("model", &C::model),
      make_field("dealias", &C::dealias),
      make_field("diag_stride", &C::diag_stride),
      make_field("chart_radius", &C::chart_radius),
      make_field("boundary_tol", &C::boundary_tol),
      make_field("sobolev_index", &C::sobolev_index),
      make_field("nu1", &C::nu1),
      make_field("nu2", &C::nu2),
      make_field("nu3", &C::nu3),
      make_field("tracked", &C::tracked),
      make_field("sigma_min", &C::sigma_min),
      make_field("sigma_max", &C::sigma_max),
      make_field("phase_tol", &C::phase_tol),
      make_field("fit_t_min", &C::fit_t_min),
      make_field("fit_t_max", &C::fit_t_max),
      make_field("psi", &C::psi),
      make_field("convention", &C::convention),
      make_field("N", &C::N),
      make_field("N0", &C::N0),
      make_field("ablate", &C::ablate),
      make_field("residual_samples", &C::residual_samples),
      make_field("eps_star", &C::eps_star),
      make_field("m", &C::m),
      make_field("theta", &C::theta),
      make_field("region", &C::region),
      make_field("resolution", &C::resolution),
      make_field("vanish_tol", &C::vanish_tol),
      make_field("output", &C::output),
      make_field("quick", &C::quick),
      make_field("seed", &C::seed),
  };
  return table;
}

inline const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

}  // namespace detail

inline bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  for (const auto& f : detail::fields())
    if (f.get(*this) != f.get(o)) return false;
  return true;
}

inline std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& f : detail::fields()) out.push_back(f.key);
  return out;
}

/// Sets one key from its textual value.
inline void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto* f = detail::find_field(key);
  if (!f) throw Error(ErrorKind::ParseError, "unknown key '" + key + "'");
  f->set(cfg, value);
  cfg.explicit_keys.insert(key);
}

inline std::string get_value(const ExperimentConfig& cfg, const std::string& key) {
  const auto* f = detail::find_field(key);
  if (!f) throw Error(ErrorKind::ParseError, "unknown key '" + key + "'");
  return f->get(cfg);
}

/// Applies a "key=value" assignment.
inline void apply_assignment(ExperimentConfig& cfg, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "expected key=value, got '" + text + "'");
  set_value(cfg, detail::trim(text.substr(0, eq)), detail::trim(text.substr(eq + 1)));
}

inline ExperimentConfig parse(std::istream& in, const std::string& source = "<config>") {
  ExperimentConfig cfg;
  std::string line;
  int number = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    try {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "expected key=value");
      const std::string key = detail::trim(line.substr(0, eq));
      if (seen.count(key)) throw Error(ErrorKind::ParseError, "duplicate key '" + key + "'");
      seen.insert(key);
      set_value(cfg, key, detail::trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError, source + ":" + std::to_string(number) + ": " + e.message());
    }
  }
  return cfg;
}

inline ExperimentConfig parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

inline ExperimentConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
  return parse(in, path);
}

/// Every key in canonical order, defaults included.
inline std::string serialize(const ExperimentConfig& cfg) {
  std::ostringstream out;
  for (const auto& f : detail::fields()) out << f.key << " = " << f.get(cfg) << "\n";
  return out.str();
}

/// Keys that took their default value.
inline std::vector<std::string> defaulted_keys(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& f : detail::fields())
    if (!cfg.explicit_keys.count(f.key)) out.push_back(f.key);
  return out;
}

/// "re" or "re,im"; empty text means unset.
inline std::optional<cplx> parse_complex(const std::string& key, const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto comma = text.find(',');
  if (comma == std::string::npos) return cplx(detail::parse_double(key, detail::trim(text)), 0.0);
  return cplx(detail::parse_double(key, detail::trim(text.substr(0, comma))),
              detail::parse_double(key, detail::trim(text.substr(comma + 1))));
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(detail::parse_double(key, detail::trim(item)));
  return out;
}

inline std::vector<std::string> parse_list_strings(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace smflow::config
