#pragma once

// Experiment plumbing: model construction from a config, the diagnostic series of a run,
// post-run analyses (fits, Cauchy tests, phase drift) and CSV emission.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "smflow/catalog.hpp"
#include "smflow/config.hpp"
#include "smflow/diagnostics.hpp"
#include "smflow/error.hpp"
#include "smflow/geometry.hpp"
#include "smflow/solver.hpp"

#ifndef SMFLOW_BUILD_ID
#define SMFLOW_BUILD_ID "unknown"
#endif

namespace smflow::workbench {

using nlohmann::json;
using spectral::cplx;
using spectral::Field;
using spectral::FieldState;
using spectral::GridSpec;

inline std::string build_id() { return SMFLOW_BUILD_ID; }

/// One evaluated criterion. Informational entries never fail a run.
struct Check {
  std::string id;
  std::string name;
  bool passed = false;
  std::string detail;
  bool informational = false;
};

inline json to_json(const Check& c) {
  return json{{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail},
              {"informational", c.informational}};
}

inline bool all_passed(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.informational || c.passed; });
}

inline std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

/// Metric, normal form and the nonlinearity selected by `model`.
struct Model {
  geometry::MetricSpec metric;
  geometry::NormalFormCoefficients nf;
  spectral::Nonlinearity nl;
  std::string model;
};

inline Model build_model(const config::ExperimentConfig& cfg) {
  Model m;
  m.metric = geometry::make_metric(cfg.metric);
  m.metric.chart_radius = cfg.chart_radius;
  m.nf = geometry::normal_form(geometry::log_metric_jet(m.metric));
  if (auto v = config::parse_complex("nu1", cfg.nu1)) m.nf.nu.nu1 = *v;
  if (auto v = config::parse_complex("nu2", cfg.nu2)) m.nf.nu.nu2 = *v;
  if (auto v = config::parse_complex("nu3", cfg.nu3)) m.nf.nu.nu3 = *v;
  m.model = cfg.model;
  if (cfg.model == "full") {
    m.nl = spectral::Nonlinearity::full(m.metric);
  } else if (cfg.model == "truncated") {
    m.nl = spectral::Nonlinearity::truncated(m.nf.c);
  } else if (cfg.model == "reduced") {
    m.nl = spectral::Nonlinearity::reduced(m.nf.nu);
  } else {
    throw Error(ErrorKind::ParseError, "model must be full, truncated or reduced, got '" + cfg.model + "'");
  }
  return m;
}

inline spectral::SolverConfig solver_config(const config::ExperimentConfig& cfg) {
  spectral::SolverConfig s;
  s.dt = cfg.dt;
  if (cfg.integrator == "IFRK4") s.integrator = spectral::Integrator::IFRK4;
  else if (cfg.integrator == "Strang") s.integrator = spectral::Integrator::Strang;
  else throw Error(ErrorKind::ParseError, "integrator must be IFRK4 or Strang, got '" + cfg.integrator + "'");
  s.dealias_fraction = cfg.dealias;
  s.diag_stride = cfg.diag_stride;
  s.chart_radius = cfg.chart_radius;
  s.boundary_tol = cfg.boundary_tol;
  s.validate();
  return s;
}

inline spectral::InitialData initial_data(const config::ExperimentConfig& cfg) {
  spectral::InitialData id;
  if (cfg.profile == "gaussian") id.kind = spectral::ProfileKind::Gaussian;
  else if (cfg.profile == "gaussian-poly") id.kind = spectral::ProfileKind::GaussianPoly;
  else if (cfg.profile == "sech") id.kind = spectral::ProfileKind::Sech;
  else throw Error(ErrorKind::ParseError, "profile must be gaussian, gaussian-poly or sech, got '" + cfg.profile + "'");
  id.epsilon = cfg.epsilon;
  id.sigma0 = cfg.sigma0;
  id.x0 = cfg.x0;
  id.velocity = cfg.velocity;
  return id;
}

struct DiagnosticRow {
  double t = 0.0;
  double linf = 0.0;
  double w2inf = 0.0;
  double h1 = 0.0, h2 = 0.0, h3 = 0.0, hk = 0.0;
  double energy = 0.0;
  double flow_invariant = 0.0;
  double mass = 0.0;
  double L_functional = 0.0;
  double Lw_l2 = 0.0;
  double Sz_weighted = 0.0;
  double boundary_mass = 0.0;
  double zhat_sup = 0.0;
  double tz_zx = 0.0;
};

struct FrequencyRow {
  double t = 0.0;
  std::vector<cplx> fhat;
  std::vector<double> phi;
  std::vector<cplx> Fhat;
};

struct DiagnosticSeries {
  std::vector<double> sigmas;
  double c = 0.0;
  int sobolev_index = 8;
  std::vector<DiagnosticRow> rows;
  std::vector<FrequencyRow> freq;

  std::vector<double> times() const {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.t);
    return out;
  }

  template <class Getter>
  std::vector<double> column(Getter get) const {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(get(r));
    return out;
  }

  /// Index of the row closest to t.
  std::size_t nearest(double t) const {
    if (rows.empty()) throw Error(ErrorKind::InvalidArgument, "empty series");
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (std::abs(rows[i].t - t) < std::abs(rows[best].t - t)) best = i;
    return best;
  }
};

inline std::string series_csv(const DiagnosticSeries& s) {
  std::ostringstream out;
  out << "t,linf,w2inf,h1,h2,h3,h" << s.sobolev_index
      << ",energy,flow_invariant,mass_functional,L_functional,Lw_l2,Sz_weighted,boundary_mass,zhat_sup,tz_zx\n";
  char buf[512];
  for (const auto& r : s.rows) {
    std::snprintf(buf, sizeof buf, "%.10g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.t, r.linf, r.w2inf, r.h1, r.h2, r.h3, r.hk, r.energy, r.flow_invariant, r.mass, r.L_functional,
                  r.Lw_l2, r.Sz_weighted, r.boundary_mass, r.zhat_sup, r.tz_zx);
    out << buf;
  }
  return out.str();
}

/// One line per (t, sigma); complex values as adjacent re,im columns.
inline std::string frequency_csv(const DiagnosticSeries& s) {
  std::ostringstream out;
  out << "t,sigma,fhat_re,fhat_im,phi,Fhat_re,Fhat_im\n";
  char buf[256];
  for (const auto& r : s.freq) {
    for (std::size_t i = 0; i < s.sigmas.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.10g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, s.sigmas[i], r.fhat[i].real(),
                    r.fhat[i].imag(), r.phi[i], r.Fhat[i].real(), r.Fhat[i].imag());
      out << buf;
    }
  }
  return out.str();
}

struct SimulationOptions {
  std::vector<double> sigmas;
  double phase_tol = 1e-4;
  int sobolev_index = 8;
  /// Track the phase correction at every grid wavenumber (needed for profile extraction).
  bool track_grid = false;
  /// Keep z at the first emitted row at or after each of these times.
  std::vector<double> snapshot_times;
};

struct SimulationResult {
  GridSpec grid;
  DiagnosticSeries series;
  FieldState initial;
  FieldState final_state;
  std::vector<FieldState> snapshots;
  Field Fhat_grid;  ///< phase-corrected profile on the grid at the final time, when tracked
  /// Set when the run stopped early on a numeric abort; the series up to that point is kept.
  std::optional<std::string> aborted;
  double abort_time = 0.0;
};

/// Integrates from `start` to t_end recording a diagnostic row at every emit.
inline SimulationResult simulate(const GridSpec& g, const spectral::SolverConfig& scfg, const Model& model,
                                 FieldState start, double t_end, const SimulationOptions& opts) {
  spectral::Solver solver(g, scfg, model.nl);
  const auto& fft = solver.fft();
  const auto& metric = model.metric;
  const auto& nf = model.nf;
  auto h = [&](cplx z) { return metric.evaluate(metric.base_point + z); };

  SimulationResult res;
  res.grid = g;
  res.initial = start;
  res.series.sigmas = opts.sigmas;
  res.series.c = nf.c_mod;
  res.series.sobolev_index = opts.sobolev_index;
  diagnostics::PhaseTracker tracker(opts.sigmas, nf.c_mod, opts.phase_tol);
  std::optional<diagnostics::PhaseTracker> grid_tracker;
  if (opts.track_grid) grid_tracker.emplace(g.xis(), nf.c_mod, opts.phase_tol);
  Field last_grid_fhat;
  std::size_t next_snapshot = 0;
  const bool reduced = model.model == "reduced";

  auto sink = [&](const FieldState& s) {
    DiagnosticRow row;
    row.t = s.t;
    const Field hat = fft.forward(s.z);
    Field zx_hat(g.n), zxx_hat(g.n);
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, ak = 0.0;
    for (int k = 0; k < g.n; ++k) {
      const double xi = g.xi(k);
      const double m = std::norm(hat[k]);
      const double w = 1.0 + xi * xi;
      a1 += w * m;
      a2 += w * w * m;
      a3 += w * w * w * m;
      ak += std::pow(w, opts.sobolev_index) * m;
      zx_hat[k] = k == g.n / 2 ? cplx(0.0) : cplx(0.0, xi) * hat[k];
      zxx_hat[k] = -xi * xi * hat[k];
    }
    const double scale = g.dx() / g.n;
    row.h1 = std::sqrt(a1 * scale);
    row.h2 = std::sqrt(a2 * scale);
    row.h3 = std::sqrt(a3 * scale);
    row.hk = std::sqrt(ak * scale);
    const Field zx = fft.backward(zx_hat);
    const Field zxx = fft.backward(zxx_hat);
    row.linf = spectral::sup_norm(s.z);
    row.w2inf = row.linf + spectral::sup_norm(zx) + spectral::sup_norm(zxx);
    double e = 0.0, fi = 0.0, tz = 0.0;
    for (int j = 0; j < g.n; ++j) {
      const double hj = h(s.z[j]);
      const double m = std::norm(zx[j]);
      e += hj * m;
      fi += m / hj;
      tz += std::norm(s.t * s.z[j] * zx[j]);
    }
    row.energy = 0.5 * e * g.dx();
    row.flow_invariant = 0.5 * fi * g.dx();
    row.tz_zx = std::sqrt(tz * g.dx());
    row.zhat_sup = spectral::sup_norm(hat) * g.dx() / std::sqrt(2.0 * std::numbers::pi);

    // the reduced model already evolves the normal-form variable
    const Field w = reduced ? s.z : geometry::forward_transform(std::span<const cplx>(s.z), nf.gamma);
    const double nu1 = nf.nu.nu1.real();
    row.mass = diagnostics::mass_functional(g, w, nu1, scfg.chart_radius);
    row.L_functional = diagnostics::L_functional(g, fft, w, s.t, nu1);
    row.Lw_l2 = spectral::l2_norm(g, diagnostics::apply_L(g, fft, w, s.t));
    row.Sz_weighted = diagnostics::apply_S(solver, s, h).weighted_norm;
    row.boundary_mass = spectral::boundary_mass_ratio(g, s.z);
    res.series.rows.push_back(row);

    const FieldState ws{s.t, w};
    FrequencyRow fr;
    fr.t = s.t;
    fr.fhat = diagnostics::fourier_profile_at(g, ws, opts.sigmas);
    tracker.push(s.t, fr.fhat);
    fr.phi = tracker.phi();
    fr.Fhat = tracker.corrected(fr.fhat);
    res.series.freq.push_back(std::move(fr));
    if (grid_tracker) {
      last_grid_fhat = diagnostics::fourier_profile(g, fft, ws);
      grid_tracker->push(s.t, last_grid_fhat);
    }
    while (next_snapshot < opts.snapshot_times.size() && s.t >= opts.snapshot_times[next_snapshot] - 1e-9) {
      res.snapshots.push_back(s);
      ++next_snapshot;
    }
  };
  try {
    res.final_state = solver.evolve(std::move(start), t_end, sink);
  } catch (const EvolutionError& e) {
    if (!e.is_numeric_abort()) throw;
    res.aborted = e.what();
    res.abort_time = e.time();
    if (!res.series.rows.empty()) res.final_state.t = res.series.rows.back().t;
    return res;
  }
  if (grid_tracker) res.Fhat_grid = grid_tracker->corrected(last_grid_fhat);
  return res;
}

/// Power-law fit of one series column over [t_min, t_max].
template <class Getter>
diagnostics::FitResult fit_column(const DiagnosticSeries& s, Getter get, double t_min, double t_max) {
  const auto t = s.times();
  const auto v = s.column(get);
  return diagnostics::power_law_fit(t, v, t_min, t_max);
}

inline json to_json(const diagnostics::FitResult& f) {
  return json{{"exponent", f.exponent}, {"intercept", f.intercept}, {"r_squared", f.r_squared},
              {"window", {f.t_min, f.t_max}}, {"points", f.points}};
}

struct CauchyReport {
  std::vector<double> times;
  std::vector<std::vector<double>> diffs;  ///< per sigma, |X(t_{i+1}) - X(t_i)|
  std::vector<bool> cauchy;
  int count = 0;
  double noise_floor = 0.0;
};

/// Dyadic self-comparison of f_hat (corrected = false) or F_hat (corrected = true). A frequency
/// passes when its differences strictly decrease or all lie below floor_rel * max |f_hat|.
/// Rows are matched to the requested times within `time_tol` (default 1e-6 relative).
inline CauchyReport cauchy_analysis(const DiagnosticSeries& s, const std::vector<double>& times, bool corrected,
                                    double floor_rel = 1e-9, double time_tol = -1.0) {
  CauchyReport rep;
  std::vector<const FrequencyRow*> picks;
  for (double t : times) {
    const auto& row = s.freq.at(s.nearest(t));
    const double tol = time_tol >= 0.0 ? time_tol : 1e-6 * std::max(1.0, t);
    if (std::abs(row.t - t) > tol) {
      throw Error(ErrorKind::InsufficientSampling, "no diagnostic row at t=" + std::to_string(t));
    }
    picks.push_back(&row);
    rep.times.push_back(row.t);
  }
  double fmax = 0.0;
  for (const auto* r : picks)
    for (const auto& v : r->fhat) fmax = std::max(fmax, std::abs(v));
  rep.noise_floor = floor_rel * fmax;
  for (std::size_t i = 0; i < s.sigmas.size(); ++i) {
    std::vector<double> d;
    for (std::size_t k = 0; k + 1 < picks.size(); ++k) {
      const auto& a = corrected ? picks[k]->Fhat : picks[k]->fhat;
      const auto& b = corrected ? picks[k + 1]->Fhat : picks[k + 1]->fhat;
      d.push_back(std::abs(b[i] - a[i]));
    }
    bool decreasing = true;
    for (std::size_t k = 1; k < d.size(); ++k) decreasing = decreasing && d[k] < d[k - 1];
    const bool quiet = std::all_of(d.begin(), d.end(), [&](double x) { return x < rep.noise_floor; });
    rep.cauchy.push_back(decreasing || quiet);
    rep.count += (decreasing || quiet) ? 1 : 0;
    rep.diffs.push_back(std::move(d));
  }
  return rep;
}

struct PhaseDrift {
  std::vector<double> slopes;  ///< d arg f_hat / d ln t per sigma
  std::vector<double> predicted;  ///< (c/2) sigma^2 |f_hat|^2 at the window end
  int sign_matches = 0;
};

/// Slope of the unwrapped phase of f_hat against ln t over [t_min, t_max].
inline PhaseDrift phase_drift(const DiagnosticSeries& s, double t_min, double t_max) {
  PhaseDrift out;
  std::vector<double> ts;
  std::vector<std::size_t> idx;
  for (std::size_t r = 0; r < s.freq.size(); ++r) {
    if (s.freq[r].t >= t_min && s.freq[r].t <= t_max) {
      ts.push_back(s.freq[r].t);
      idx.push_back(r);
    }
  }
  if (ts.size() < 2) throw Error(ErrorKind::DegenerateFit, "too few rows for a phase slope");
  for (std::size_t i = 0; i < s.sigmas.size(); ++i) {
    std::vector<double> ph;
    for (auto r : idx) ph.push_back(std::arg(s.freq[r].fhat[i]));
    const auto un = diagnostics::unwrap(ph);
    const double slope = diagnostics::log_slope(ts, un);
    out.slopes.push_back(slope);
    const double amp = std::abs(s.freq[idx.back()].fhat[i]);
    out.predicted.push_back(0.5 * s.c * s.sigmas[i] * s.sigmas[i] * amp * amp);
    const bool match = s.c == 0.0 ? false : (slope > 0.0) == (s.c > 0.0) && slope != 0.0;
    out.sign_matches += match ? 1 : 0;
  }
  return out;
}

/// max_t |X(t) - X(t0)| / |X(t0)| for a series column.
template <class Getter>
double relative_drift(const DiagnosticSeries& s, Getter get) {
  const double ref = get(s.rows.front());
  double worst = 0.0;
  for (const auto& r : s.rows) worst = std::max(worst, std::abs(get(r) - ref));
  return ref != 0.0 ? worst / std::abs(ref) : worst;
}

struct RigidityReport {
  double zhat_slope_ln_t = 0.0;  ///< d ||z_hat||_inf / d ln t
  double tzzx_slope_sqrt_t = 0.0;  ///< d ||t z z_x|| / d t^{1/2}
  std::string zhat_trend;
  std::string tzzx_trend;
};

inline std::string trend(const std::vector<double>& v) {
  const std::size_t q = std::max<std::size_t>(1, v.size() / 4);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    first += v[i];
    last += v[v.size() - 1 - i];
  }
  bool monotone = true;
  for (std::size_t i = 1; i < v.size(); ++i) monotone = monotone && v[i] >= v[i - 1];
  if (monotone && last > 1.05 * first) return "monotone-increasing";
  return "saturating";
}

/// Growth of ||z_hat||_{L^inf_sigma} against ln t and of ||t z z_x||_{L^2} against t^{1/2} for t >= t_min.
inline RigidityReport rigidity_analysis(const DiagnosticSeries& s, double t_min) {
  std::vector<double> lt, st, zh, tz;
  for (const auto& r : s.rows) {
    if (r.t < t_min || r.t <= 0.0) continue;
    lt.push_back(std::log(r.t));
    st.push_back(std::sqrt(r.t));
    zh.push_back(r.zhat_sup);
    tz.push_back(r.tz_zx);
  }
  RigidityReport rep;
  if (lt.size() < 2) throw Error(ErrorKind::DegenerateFit, "too few rows after t_min for the rigidity fits");
  rep.zhat_slope_ln_t = diagnostics::linear_slope(lt, zh);
  rep.tzzx_slope_sqrt_t = diagnostics::linear_slope(st, tz);
  rep.zhat_trend = trend(zh);
  rep.tzzx_trend = trend(tz);
  return rep;
}

}  // namespace smflow::workbench
