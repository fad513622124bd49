#pragma once

// Approximate solutions built from an asymptotic profile psi:
// v = v1 + v2 + v3 + v4, their residual in the normal-form equation, and the
// backward shooting experiment from v(N).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "smflow/diagnostics.hpp"
#include "smflow/error.hpp"
#include "smflow/geometry.hpp"
#include "smflow/quadrature.hpp"
#include "smflow/solver.hpp"
#include "smflow/spectral.hpp"

namespace smflow::final_state {

using spectral::cplx;
using spectral::Field;
using spectral::FieldState;
using spectral::GridSpec;

/// Asymptotic datum psi(y) with an effective support [-support, support].
struct Psi {
  std::string label;
  std::function<cplx(double)> f;
  double support = 10.0;

  cplx operator()(double y) const { return std::abs(y) > support ? cplx(0.0) : f(y); }

  static Psi zero() { return Psi{"zero", [](double) { return cplx(0.0); }, 1.0}; }

  static Psi gaussian(double sigma, double amp) {
    // |psi| < 1e-17 amp beyond the support
    const double support = sigma * std::sqrt(2.0 * std::log(1e17));
    return Psi{"gaussian:" + std::to_string(sigma) + "," + std::to_string(amp),
               [=](double y) { return cplx(amp * std::exp(-0.5 * y * y / (sigma * sigma))); }, support};
  }

  static Psi constant(cplx value, double support) {
    return Psi{"constant", [=](double) { return value; }, support};
  }

  /// Table of "y re im" rows (whitespace or comma separated), cubic interpolation, zero outside.
  static Psi from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open psi file '" + path + "'");
    auto ys = std::make_shared<std::vector<double>>();
    auto vs = std::make_shared<std::vector<cplx>>();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ss(line);
      double y = 0, re = 0, im = 0;
      if (!(ss >> y >> re)) throw Error(ErrorKind::ParseError, path + ":" + std::to_string(lineno) + ": bad row");
      if (!(ss >> im)) im = 0.0;
      if (!ys->empty() && y <= ys->back()) {
        throw Error(ErrorKind::ParseError, path + ":" + std::to_string(lineno) + ": y must increase");
      }
      ys->push_back(y);
      vs->push_back(cplx(re, im));
    }
    if (ys->size() < 4) throw Error(ErrorKind::ParseError, path + ": need at least 4 rows");
    const double support = std::max(std::abs(ys->front()), std::abs(ys->back()));
    return Psi{"file:" + path,
               [ys, vs](double y) -> cplx {
                 const auto& Y = *ys;
                 const auto& V = *vs;
                 if (y < Y.front() || y > Y.back()) return 0.0;
                 auto it = std::upper_bound(Y.begin(), Y.end(), y);
                 std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - Y.begin() - 1, 0), Y.size() - 2);
                 const double h = Y[i + 1] - Y[i];
                 const double s = (y - Y[i]) / h;
                 auto slope = [&](std::size_t k) -> cplx {
                   if (k == 0) return (V[1] - V[0]) / (Y[1] - Y[0]);
                   if (k + 1 == Y.size()) return (V[k] - V[k - 1]) / (Y[k] - Y[k - 1]);
                   return (V[k + 1] - V[k - 1]) / (Y[k + 1] - Y[k - 1]);
                 };
                 const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
                 const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
                 return h00 * V[i] + h10 * h * slope(i) + h01 * V[i + 1] + h11 * h * slope(i + 1);
               },
               support};
  }
};

/// Parses "gaussian:sigma,amp" or "file:path".
inline Psi parse_psi(const std::string& spec) {
  if (spec.rfind("gaussian:", 0) == 0) {
    const std::string body = spec.substr(9);
    const auto comma = body.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::ParseError, "expected gaussian:sigma,amp");
    try {
      const double sigma = std::stod(body.substr(0, comma));
      const double amp = std::stod(body.substr(comma + 1));
      if (!(sigma > 0.0)) throw Error(ErrorKind::ParseError, "gaussian width must be positive");
      return Psi::gaussian(sigma, amp);
    } catch (const std::invalid_argument&) {
      throw Error(ErrorKind::ParseError, "bad gaussian parameters '" + body + "'");
    }
  }
  if (spec.rfind("file:", 0) == 0) return Psi::from_file(spec.substr(5));
  if (spec == "zero") return Psi::zero();
  throw Error(ErrorKind::ParseError, "unknown psi '" + spec + "'");
}

/// Coefficients of v2 and P. `Printed`: +i nu2/8 and c/4 conj(Qt) psi^2.
/// `Balanced`: -i nu2/8 and -(i c/4) conj(Qt) psi^2, which cancel the t^-2 terms of the residual.
enum class Convention { Balanced, Printed };

struct Ablation {
  bool v2 = true;
  bool v3 = true;
  bool v4 = true;
};

struct WeightedNorm {
  int m = 8;
  double value = 0.0;
};

/// sum_{j<=m} (||<y> psi^(j)||_L2 + ||<y> psi^(j)||_Linf), spectral derivatives on a padded grid.
inline WeightedNorm weighted_norm(const Psi& psi, int m = 8) {
  const double half = psi.support + 10.0;
  int n = 1024;
  while (2.0 * half / n > 0.02 && n < (1 << 20)) n *= 2;
  GridSpec g{half, n};
  spectral::FFT fft(n);
  Field u(n);
  for (int j = 0; j < n; ++j) u[j] = psi(g.x(j));
  WeightedNorm out;
  out.m = m;
  Field hat = fft.forward(u);
  for (int order = 0; order <= m; ++order) {
    Field dh(n);
    for (int k = 0; k < n; ++k) dh[k] = hat[k] * std::pow(cplx(0.0, g.xi(k)), order);
    const Field d = fft.backward(dh);
    double l2 = 0.0, linf = 0.0;
    for (int j = 0; j < n; ++j) {
      const double w = std::sqrt(1.0 + g.x(j) * g.x(j)) * std::abs(d[j]);
      l2 += w * w;
      linf = std::max(linf, w);
    }
    out.value += std::sqrt(l2 * g.dx()) + linf;
  }
  return out;
}

/// Whether -theta + 9 (theta + 1) / (2 m) + 1/2 < 0.
struct MThetaReport {
  int m = 8;
  double theta = 0.75;
  double lhs = 0.0;
  bool holds = false;
};

inline MThetaReport m_theta_condition(int m, double theta) {
  MThetaReport r;
  r.m = m;
  r.theta = theta;
  r.lhs = -theta + 9.0 * (theta + 1.0) / (2.0 * m) + 0.5;
  r.holds = r.lhs < 0.0;
  return r;
}

struct ProfileOptions {
  Convention convention = Convention::Balanced;
  double table_step = 2e-3;
  double quad_tol = 1e-10;
  double taylor_radius = 1e-3;
  std::optional<double> eps_star;  ///< refuse profiles whose weighted norm exceeds this
  int m = 8;
};

class FinalStateProfile {
 public:
  using Options = ProfileOptions;

  FinalStateProfile(Psi psi, double c, cplx nu2, cplx nu3, Options opts = {})
      : psi_(std::move(psi)), c_(c), nu2_(nu2), nu3_(nu3), opts_(opts) {
    if (opts_.eps_star) {
      norm_ = weighted_norm(psi_, opts_.m);
      if (norm_->value > *opts_.eps_star) {
        throw Error(ErrorKind::InvalidArgument,
                    "weighted norm " + std::to_string(norm_->value) + " exceeds eps_star");
      }
    }
    build_table();
  }

  const Psi& psi() const { return psi_; }
  double c() const { return c_; }
  cplx nu2() const { return nu2_; }
  cplx nu3() const { return nu3_; }
  const Options& options() const { return opts_; }

  WeightedNorm norm() const {
    if (!norm_) norm_ = weighted_norm(psi_, opts_.m);
    return *norm_;
  }

  /// Integrand of I(y) = int_0^y -(i nu3/4) |psi|^4 s^2 ds.
  cplx I_prime(double y) const {
    const double a = std::norm(psi_(y));
    return -cplx(0.0, 0.25) * nu3_ * a * a * y * y;
  }

  /// Qt(y) = I(y) / y by adaptive quadrature.
  cplx Qtilde_direct(double y) const {
    if (nu3_ == cplx(0.0)) return 0.0;
    if (std::abs(y) < opts_.taylor_radius) return taylor(y);
    return quadrature::integrate([this](double s) { return I_prime(s); }, 0.0, y, opts_.quad_tol) / y;
  }

  /// Qt(y) from the cached table of I (cubic Hermite with exact slopes).
  cplx Qtilde(double y) const {
    if (nu3_ == cplx(0.0)) return 0.0;
    if (std::abs(y) < opts_.taylor_radius) return taylor(y);
    return I_cached(y) / y;
  }

  cplx P(double y) const {
    const cplx q = std::conj(Qtilde(y));
    const cplx p2 = psi_(y) * psi_(y);
    return opts_.convention == Convention::Printed ? 0.25 * c_ * q * p2 : -cplx(0.0, 0.25) * c_ * q * p2;
  }

  // Envelopes: v1 = e^{i x^2/4t} a1, v2 = e^{i x^2/2t} a2, v3 = a3, v4 = e^{i x^2/2t} a4.
  cplx a1(double t, double x) const {
    const double y = x / (2.0 * t);
    const cplx p = psi_(y);
    const cplx pref = std::polar(1.0 / std::sqrt(2.0 * t), -std::numbers::pi / 4.0);
    return pref * p * std::polar(1.0, 0.5 * c_ * y * y * std::norm(p) * std::log(2.0 * t));
  }
  cplx quad_phase(double t, double x) const {
    const double y = x / (2.0 * t);
    return std::polar(1.0, c_ * y * y * std::norm(psi_(y)) * std::log(2.0 * t));
  }
  cplx a2(double t, double x) const {
    const double y = x / (2.0 * t);
    const cplx p = psi_(y);
    const cplx coef = (opts_.convention == Convention::Printed ? 1.0 : -1.0) * cplx(0.0, 1.0) * nu2_ / (8.0 * t * t);
    return coef * std::norm(p) * p * p * quad_phase(t, x);
  }
  cplx a3(double t, double x) const { return Qtilde(x / (2.0 * t)) / t; }
  cplx a4(double t, double x) const { return P(x / (2.0 * t)) / (t * t) * quad_phase(t, x); }

  cplx v1(double t, double x) const { return std::polar(1.0, x * x / (4.0 * t)) * a1(t, x); }
  cplx v2(double t, double x) const { return std::polar(1.0, x * x / (2.0 * t)) * a2(t, x); }
  cplx v3(double t, double x) const { return a3(t, x); }
  cplx v4(double t, double x) const { return std::polar(1.0, x * x / (2.0 * t)) * a4(t, x); }

  cplx v(double t, double x, const Ablation& ab = {}) const {
    cplx out = v1(t, x);
    if (ab.v2) out += v2(t, x);
    if (ab.v3) out += v3(t, x);
    if (ab.v4) out += v4(t, x);
    return out;
  }

  Field sample(double t, const GridSpec& g, const Ablation& ab = {}) const {
    Field out(g.n);
    for (int j = 0; j < g.n; ++j) out[j] = v(t, g.x(j), ab);
    return out;
  }

  /// |y Qt' + Qt - I'(y)| by central differences of the cached Qt.
  double ode_residual(double y, double h = 1e-4) const {
    const cplx dq = (Qtilde(y + h) - Qtilde(y - h)) / (2.0 * h);
    return std::abs(y * dq + Qtilde(y) - I_prime(y));
  }

 private:
  cplx taylor(double y) const {
    const double a = std::norm(psi_(0.0));
    return -cplx(0.0, 1.0) * nu3_ / 12.0 * a * a * y * y;
  }

  void build_table() {
    if (nu3_ == cplx(0.0)) return;
    y_max_ = psi_.support;
    int cells = std::max(16, static_cast<int>(std::ceil(2.0 * y_max_ / opts_.table_step)));
    cells += cells % 2;
    h_ = 2.0 * y_max_ / cells;
    table_.assign(cells + 1, 0.0);
    const int mid = cells / 2;
    // cumulative integral from y = 0 outwards, segment by segment
    const double y0 = -y_max_;
    auto node = [&](int i) { return y0 + i * h_; };
    // y = 0 is the middle node
    auto f = [this](double s) { return I_prime(s); };
    table_[mid] = 0.0;
    for (int i = mid; i < cells; ++i) {
      table_[i + 1] = table_[i] + quadrature::integrate(f, node(i), node(i + 1), opts_.quad_tol * 1e-3);
    }
    for (int i = mid; i > 0; --i) {
      table_[i - 1] = table_[i] - quadrature::integrate(f, node(i - 1), node(i), opts_.quad_tol * 1e-3);
    }
  }

  cplx I_cached(double y) const {
    if (y >= y_max_) return table_.back();
    if (y <= -y_max_) return table_.front();
    const double u = (y + y_max_) / h_;
    const int i = std::min(static_cast<int>(u), static_cast<int>(table_.size()) - 2);
    const double s = u - i;
    const double ya = -y_max_ + i * h_;
    const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
    const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
    return h00 * table_[i] + h10 * h_ * I_prime(ya) + h01 * table_[i + 1] + h11 * h_ * I_prime(ya + h_);
  }

  Psi psi_;
  double c_;
  cplx nu2_, nu3_;
  Options opts_;
  mutable std::optional<WeightedNorm> norm_;
  std::vector<cplx> table_;
  double y_max_ = 0.0;
  double h_ = 0.0;
};

/// Grid that holds v(t) for a profile: support 2 t Y plus margin, dx resolving frequency 2Y.
inline GridSpec residual_grid(const FinalStateProfile& prof, double t, double margin = 1.15) {
  const double Y = prof.psi().support;
  const double half = std::max(margin * 2.0 * t * Y, 16.0);
  const double dx_target = std::numbers::pi / (3.0 * Y);
  int n = 256;
  while (2.0 * half / n > dx_target) n *= 2;
  return GridSpec{half, n};
}

struct ResidualNorms {
  double linf = 0.0;
  double l2 = 0.0;
  bool resolution_warning = false;
};

namespace detail {

inline ResidualNorms residual_on(const FinalStateProfile& prof, double t, const GridSpec& g, const Ablation& ab) {
  spectral::FFT fft(g.n);
  const int n = g.n;
  Field v(n), vt(n);
  const double dt = 1e-3 * t;
  const std::array<double, 4> offs = {-2.0, -1.0, 1.0, 2.0};
  const std::array<double, 4> w = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};
  for (int j = 0; j < n; ++j) {
    const double x = g.x(j);
    // envelopes are differenced, carriers differentiated exactly
    cplx e1 = prof.a1(t, x);
    cplx e2 = ab.v2 ? prof.a2(t, x) : cplx(0.0);
    cplx e3 = ab.v3 ? prof.a3(t, x) : cplx(0.0);
    cplx e4 = ab.v4 ? prof.a4(t, x) : cplx(0.0);
    cplx d1{}, d24{}, d3{};
    for (int k = 0; k < 4; ++k) {
      const double s = t + offs[k] * dt;
      d1 += w[k] * prof.a1(s, x);
      if (ab.v2) d24 += w[k] * prof.a2(s, x);
      if (ab.v4) d24 += w[k] * prof.a4(s, x);
      if (ab.v3) d3 += w[k] * prof.a3(s, x);
    }
    d1 /= dt;
    d24 /= dt;
    d3 /= dt;
    const cplx c1 = std::polar(1.0, x * x / (4.0 * t));
    const cplx c2 = std::polar(1.0, x * x / (2.0 * t));
    const double x2 = x * x;
    v[j] = c1 * e1 + c2 * (e2 + e4) + e3;
    vt[j] = c1 * (d1 - cplx(0.0, x2 / (4.0 * t * t)) * e1) + c2 * (d24 - cplx(0.0, x2 / (2.0 * t * t)) * (e2 + e4)) + d3;
  }
  const Field vx = spectral::derivative(g, fft, v, 1);
  const Field vxx = spectral::derivative(g, fft, v, 2);
  ResidualNorms out;
  double l2 = 0.0;
  const double c = prof.c();
  for (int j = 0; j < n; ++j) {
    const cplx vb = std::conj(v[j]);
    const cplx coeff = c * vb + prof.nu2() * vb * v[j] + prof.nu3() * vb * vb;
    const cplx r = cplx(0.0, 1.0) * vt[j] + vxx[j] - coeff * vx[j] * vx[j];
    out.linf = std::max(out.linf, std::abs(r));
    l2 += std::norm(r);
  }
  out.l2 = std::sqrt(l2 * g.dx());
  return out;
}

}  // namespace detail

/// R(v) = i v_t + v_xx - (c vbar + nu2 |v|^2 + nu3 vbar^2) v_x^2 at time t. With `check_resolution`
/// the grid is doubled and a warning raised if either norm moves by more than 1%.
inline ResidualNorms residual(const FinalStateProfile& prof, double t, const GridSpec& g, const Ablation& ab = {},
                              bool check_resolution = true) {
  ResidualNorms out = detail::residual_on(prof, t, g, ab);
  if (check_resolution && out.linf > 0.0) {
    const ResidualNorms fine = detail::residual_on(prof, t, GridSpec{g.half_length, 2 * g.n}, ab);
    const double d1 = std::abs(fine.linf - out.linf) / out.linf;
    const double d2 = out.l2 > 0.0 ? std::abs(fine.l2 - out.l2) / out.l2 : 0.0;
    out.resolution_warning = d1 > 0.01 || d2 > 0.01;
  }
  return out;
}

struct ResidualSeries {
  std::vector<double> t;
  std::vector<double> linf;
  std::vector<double> l2;
  bool resolution_warning = false;
  diagnostics::FitResult fit;
};

inline ResidualSeries residual_series(const FinalStateProfile& prof, double t_min, double t_max, int count,
                                      const Ablation& ab = {}, bool check_resolution = true) {
  ResidualSeries out;
  for (double t : diagnostics::log_spaced(t_min, t_max, count)) {
    const auto r = residual(prof, t, residual_grid(prof, t), ab, check_resolution);
    out.t.push_back(t);
    out.linf.push_back(r.linf);
    out.l2.push_back(r.l2);
    out.resolution_warning = out.resolution_warning || r.resolution_warning;
  }
  out.fit = diagnostics::power_law_fit(out.t, out.linf, t_min, t_max, std::min<std::size_t>(10, count));
  return out;
}

/// Solver setup for the backward experiment.
struct WaveOperatorConfig {
  double N = 200.0;
  double N0 = 10.0;
  GridSpec grid{2048.0, 16384};
  spectral::SolverConfig solver{};
  int samples = 24;          ///< log-spaced recording times in [N0, N]
  bool truncated_tail = false;  ///< integrate the truncated model instead of the full metric
  Ablation ablation{};
};

struct GapRow {
  double t = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
};

struct WaveOperatorResult {
  std::vector<GapRow> rows;
  std::vector<FieldState> snapshots;  ///< w(t) at the recording times (normal-form variable)
  std::optional<diagnostics::FitResult> fit;
};

/// Sets z(N) from v(N) through the inverse normal-form map, integrates backward to N0 and records
/// ||w - v|| at log-spaced times, w being the forward map of z.
inline WaveOperatorResult wave_operator_experiment(const FinalStateProfile& prof, const geometry::MetricSpec& metric,
                                                   const WaveOperatorConfig& cfg, bool keep_snapshots = false) {
  if (!(cfg.N >= 4.0 * cfg.N0 && cfg.N0 >= 10.0)) {
    throw Error(ErrorKind::InvalidArgument, "need N >= 4 N0 >= 40");
  }
  const auto jet = geometry::log_metric_jet(metric);
  const auto nf = geometry::normal_form(jet);
  const GridSpec& g = cfg.grid;
  spectral::Nonlinearity nl =
      cfg.truncated_tail ? spectral::Nonlinearity::truncated(nf.c) : spectral::Nonlinearity::full(metric);
  spectral::Solver solver(g, cfg.solver, nl);
  const Field vN = prof.sample(cfg.N, g, cfg.ablation);
  FieldState s{cfg.N, geometry::inverse_transform(std::span<const cplx>(vN), nf.gamma)};

  auto times = diagnostics::log_spaced(cfg.N0, cfg.N, cfg.samples);
  std::reverse(times.begin(), times.end());
  WaveOperatorResult out;
  auto record = [&](const FieldState& st) {
    const Field w = geometry::forward_transform(std::span<const cplx>(st.z), nf.gamma);
    const Field v = prof.sample(st.t, g, cfg.ablation);
    Field d(g.n);
    for (int j = 0; j < g.n; ++j) d[j] = w[j] - v[j];
    GapRow row;
    row.t = st.t;
    row.l2 = spectral::l2_norm(g, d);
    row.h1 = spectral::sobolev_norm(g, solver.fft(), d, 1);
    out.rows.push_back(row);
    if (keep_snapshots) out.snapshots.push_back(FieldState{st.t, w});
  };
  record(s);
  for (std::size_t i = 1; i < times.size(); ++i) {
    s = solver.evolve(std::move(s), times[i]);
    record(s);
  }
  // the gap vanishes at N by construction; fit on the early part of the window
  std::vector<double> ts, gs;
  for (const auto& r : out.rows) {
    ts.push_back(r.t);
    gs.push_back(r.l2);
  }
  try {
    out.fit = diagnostics::power_law_fit(ts, gs, cfg.N0, cfg.N / 4.0, 4);
  } catch (const Error&) {
    out.fit.reset();
  }
  return out;
}

struct StabilityReport {
  double N = 0.0;
  double sup_gap = 0.0;
  double gap_at_N = 0.0;
  bool within_heuristic = false;
};

/// Backward run from `horizon`, returning the normal-form variable at each of `times_desc`
/// (descending, all <= horizon).
inline std::vector<Field> backward_snapshots(const FinalStateProfile& prof, const geometry::MetricSpec& metric,
                                             const WaveOperatorConfig& cfg, double horizon,
                                             std::span<const double> times_desc) {
  const auto nf = geometry::normal_form(geometry::log_metric_jet(metric));
  spectral::Nonlinearity nl =
      cfg.truncated_tail ? spectral::Nonlinearity::truncated(nf.c) : spectral::Nonlinearity::full(metric);
  spectral::Solver solver(cfg.grid, cfg.solver, nl);
  const Field vN = prof.sample(horizon, cfg.grid, cfg.ablation);
  FieldState s{horizon, geometry::inverse_transform(std::span<const cplx>(vN), nf.gamma)};
  std::vector<Field> snaps;
  for (double t : times_desc) {
    if (t < s.t) s = solver.evolve(std::move(s), t);
    snaps.push_back(geometry::forward_transform(std::span<const cplx>(s.z), nf.gamma));
  }
  return snaps;
}

/// Two-run gaps for successive horizons H_0 < H_1 < ...: entry i is the sup over recording
/// times in [N0, H_i] of ||w_{H_i}(t) - w_{H_{i+1}}(t)||_L2. Every horizon is integrated once.
inline std::vector<StabilityReport> stability_sequence(const FinalStateProfile& prof,
                                                       const geometry::MetricSpec& metric,
                                                       const WaveOperatorConfig& cfg, std::vector<double> horizons,
                                                       int per_doubling = 8) {
  if (horizons.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two horizons");
  std::sort(horizons.begin(), horizons.end());
  if (!(horizons.front() > cfg.N0)) throw Error(ErrorKind::InvalidArgument, "horizons must exceed N0");
  // nested grid N0 * 2^(k / per_doubling) so shorter runs record a subset of the longer ones
  std::vector<double> grid_times;
  for (int k = 0;; ++k) {
    const double t = cfg.N0 * std::exp2(static_cast<double>(k) / per_doubling);
    if (t > horizons.back() * (1.0 + 1e-12)) break;
    grid_times.push_back(t);
  }
  std::vector<std::vector<Field>> runs;
  std::vector<std::vector<double>> run_times;
  for (double H : horizons) {
    std::vector<double> desc;
    for (double t : grid_times)
      if (t <= H * (1.0 + 1e-12)) desc.push_back(std::min(t, H));
    std::reverse(desc.begin(), desc.end());
    runs.push_back(backward_snapshots(prof, metric, cfg, H, desc));
    std::reverse(desc.begin(), desc.end());
    std::reverse(runs.back().begin(), runs.back().end());
    run_times.push_back(std::move(desc));
  }
  std::vector<StabilityReport> out;
  for (std::size_t i = 0; i + 1 < horizons.size(); ++i) {
    StabilityReport rep;
    rep.N = horizons[i];
    const std::size_t count = run_times[i].size();
    for (std::size_t k = 0; k < count; ++k) {
      Field d(cfg.grid.n);
      for (int j = 0; j < cfg.grid.n; ++j) d[j] = runs[i][k][j] - runs[i + 1][k][j];
      const double gap = spectral::l2_norm(cfg.grid, d);
      rep.sup_gap = std::max(rep.sup_gap, gap);
      if (k + 1 == count) rep.gap_at_N = gap;
    }
    rep.within_heuristic = rep.sup_gap <= 2.0 * rep.gap_at_N;
    out.push_back(rep);
  }
  return out;
}

/// Gap between the runs started at N and 2N over [N0, N].
inline StabilityReport two_run_stability(const FinalStateProfile& prof, const geometry::MetricSpec& metric,
                                         const WaveOperatorConfig& cfg) {
  return stability_sequence(prof, metric, cfg, {cfg.N, 2.0 * cfg.N}).front();
}

}  // namespace smflow::final_state
