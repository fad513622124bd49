#pragma once

// Pseudo-spectral integration of i z_t + z_xx = G(z) z_x^2 on a periodic grid,
// where G is (ln h)_z of a metric, its quadratic truncation, or the reduced
// normal-form polynomial nu1 wbar + nu2 |w|^2 + nu3 wbar^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>

#include "smflow/error.hpp"
#include "smflow/geometry.hpp"
#include "smflow/spectral.hpp"

namespace smflow::spectral {

struct FieldState {
  double t = 0.0;
  Field z;
};

enum class Integrator { IFRK4, Strang };
enum class Direction { Forward, Backward };

inline const char* to_string(Integrator i) { return i == Integrator::IFRK4 ? "IFRK4" : "Strang"; }

struct SolverConfig {
  double dt = 1e-2;
  Integrator integrator = Integrator::IFRK4;
  double dealias_fraction = 2.0 / 3.0;
  int diag_stride = 100;
  Direction direction = Direction::Forward;
  double chart_radius = 0.3;
  double boundary_tol = 1e-8;
  bool check_boundary = true;

  void validate() const {
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
    if (!(dealias_fraction > 0.0 && dealias_fraction <= 2.0 / 3.0 + 1e-15)) {
      throw Error(ErrorKind::InvalidArgument, "dealias_fraction must lie in (0, 2/3]");
    }
    if (diag_stride < 1) throw Error(ErrorKind::InvalidArgument, "diag_stride must be >= 1");
  }
};

/// The coefficient G(z) multiplying z_x^2.
struct Nonlinearity {
  std::string label = "flat";
  std::function<cplx(cplx)> G;
  bool vanishes = true;

  static Nonlinearity free() { return Nonlinearity{"flat", [](cplx) { return cplx(0.0); }, true}; }

  static Nonlinearity full(const geometry::MetricSpec& metric) {
    auto m = metric;
    return Nonlinearity{"full:" + metric.name, [m](cplx z) { return m.dlog_h(m.base_point + z); }, false};
  }

  static Nonlinearity truncated(const geometry::CCoefficients& c) {
    auto cc = c;
    return Nonlinearity{"truncated",
                        [cc](cplx z) {
                          const cplx zb = std::conj(z);
                          return cc[0] + cc[1] * zb + cc[2] * z + cc[3] * z * z + cc[4] * zb * zb + cc[5] * z * zb;
                        },
                        false};
  }

  static Nonlinearity reduced(const geometry::Nus& nu) {
    auto n = nu;
    const bool zero = nu.nu1 == cplx(0.0) && nu.nu2 == cplx(0.0) && nu.nu3 == cplx(0.0);
    return Nonlinearity{"reduced",
                        [n](cplx w) {
                          const cplx wb = std::conj(w);
                          return n.nu1 * wb + n.nu2 * wb * w + n.nu3 * wb * wb;
                        },
                        zero};
  }
};

inline double boundary_mass_ratio(const GridSpec& g, std::span<const cplx> z) {
  double inner = 0.0, outer = 0.0;
  const double cut = 0.9 * g.half_length;
  for (int j = 0; j < g.n; ++j) {
    const double m = std::norm(z[j]);
    (std::abs(g.x(j)) > cut ? outer : inner) += m;
  }
  const double total = inner + outer;
  return total > 0.0 ? outer / total : 0.0;
}

class Solver {
 public:
  Solver(GridSpec grid, SolverConfig cfg, Nonlinearity nl)
      : grid_(grid), cfg_(cfg), nl_(std::move(nl)), fft_(grid.n), xi_(grid.xis()), mask_(grid.n) {
    grid_.validate();
    cfg_.validate();
    const double cutoff = cfg_.dealias_fraction * (grid_.n / 2);
    for (int k = 0; k < grid_.n; ++k) mask_[k] = std::abs(grid_.signed_index(k)) <= cutoff ? 1.0 : 0.0;
  }

  const GridSpec& grid() const { return grid_; }
  const SolverConfig& config() const { return cfg_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  const FFT& fft() const { return fft_; }

  /// -i G(z) z_x^2 sampled on the grid.
  Field nonlinear_rhs(std::span<const cplx> z) const {
    guard(z, std::numeric_limits<double>::quiet_NaN());
    Field hat = fft_.forward(z);
    return rhs_physical(z, hat);
  }

  /// z_t = i z_xx - i G(z) z_x^2, evaluated spectrally.
  Field time_derivative(std::span<const cplx> z) const {
    Field hat = fft_.forward(z);
    Field out = rhs_physical(z, hat);
    for (int k = 0; k < grid_.n; ++k) hat[k] *= -xi_[k] * xi_[k];
    const Field zxx = fft_.backward(hat);
    for (int j = 0; j < grid_.n; ++j) out[j] += cplx(0.0, 1.0) * zxx[j];
    return out;
  }

  /// Advances by the signed step `dt`.
  void step(FieldState& s, double dt) const {
    if (cfg_.integrator == Integrator::IFRK4) {
      step_ifrk4(s.z, dt);
    } else {
      step_strang(s.z, dt);
    }
    s.t += dt;
    guard(s.z, s.t);
  }

  /// One configured step in the configured direction.
  void step(FieldState& s) const { step(s, cfg_.direction == Direction::Forward ? cfg_.dt : -cfg_.dt); }

  /// Integrates to t_end with uniformly shrunk steps so that t_end is hit exactly.
  /// `sink` runs at the start, every diag_stride steps and at the end.
  template <class Sink>
  FieldState evolve(FieldState s, double t_end, Sink&& sink) const {
    const double span = t_end - s.t;
    if (span == 0.0) throw Error(ErrorKind::InvalidArgument, "t_end equals the current time");
    const long steps = static_cast<long>(std::ceil(std::abs(span) / cfg_.dt - 1e-9));
    const double dt = span / static_cast<double>(steps);
    const double t0 = s.t;
    emit(s, sink);
    for (long i = 1; i <= steps; ++i) {
      step(s, dt);
      if (i == steps) s.t = t_end;
      else s.t = t0 + dt * static_cast<double>(i);
      if (i % cfg_.diag_stride == 0 || i == steps) emit(s, sink);
    }
    return s;
  }

  FieldState evolve(FieldState s, double t_end) const {
    return evolve(std::move(s), t_end, [](const FieldState&) {});
  }

 private:
  template <class Sink>
  void emit(const FieldState& s, Sink& sink) const {
    if (cfg_.check_boundary) {
      const double ratio = boundary_mass_ratio(grid_, s.z);
      if (ratio > cfg_.boundary_tol) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "boundary mass ratio %.3e exceeds %.3e", ratio, cfg_.boundary_tol);
        throw EvolutionError(ErrorKind::BoundaryMass, s.t, buf);
      }
    }
    sink(s);
  }

  void guard(std::span<const cplx> z, double t) const {
    double m = 0.0;
    for (const auto& v : z) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw EvolutionError(ErrorKind::NaNDetected, t, "non-finite sample; retry with dt/2");
      }
      m = std::max(m, std::abs(v));
    }
    if (m >= cfg_.chart_radius) {
      throw EvolutionError(ErrorKind::ChartExit, t, "max|z| = " + std::to_string(m) + " left the chart");
    }
  }

  Field rhs_physical(std::span<const cplx> z, Field hat) const {
    Field out(grid_.n);
    if (nl_.vanishes) return out;
    for (int k = 0; k < grid_.n; ++k) hat[k] *= cplx(0.0, k == grid_.n / 2 ? 0.0 : xi_[k]);
    const Field zx = fft_.backward(hat);
    for (int j = 0; j < grid_.n; ++j) out[j] = cplx(0.0, -1.0) * nl_.G(z[j]) * zx[j] * zx[j];
    return out;
  }

  /// Fourier-space nonlinearity, dealiased, written into `out`. Uses the v/zx/r work buffers.
  void N_hat(const Field& vhat, Field& out) const {
    const int n = grid_.n;
    auto& w = work_;
    fft_.backward(vhat, w.v);
    for (int k = 0; k < n; ++k) w.r[k] = vhat[k] * cplx(0.0, k == n / 2 ? 0.0 : xi_[k]);
    fft_.backward(w.r, w.zx);
    for (int j = 0; j < n; ++j) w.r[j] = cplx(0.0, -1.0) * nl_.G(w.v[j]) * w.zx[j] * w.zx[j];
    fft_.forward(w.r, out);
    for (int k = 0; k < n; ++k) out[k] *= mask_[k];
  }

  void step_ifrk4(Field& z, double dt) const {
    const int n = grid_.n;
    auto& w = work_;
    w.resize(n);
    Field& zh = w.zh;
    Field& tmp = w.tmp;
    fft_.forward(z, zh);
    const Field& E = half_step_factor(dt);
    const Field& E2 = full_step_factor(dt);
    if (nl_.vanishes) {
      for (int k = 0; k < n; ++k) zh[k] *= E2[k];
      fft_.backward(zh, z);
      return;
    }
    auto& [k1, k2, k3, k4] = w.k;
    N_hat(zh, k1);
    for (int k = 0; k < n; ++k) {
      k1[k] *= dt;
      tmp[k] = E[k] * (zh[k] + 0.5 * k1[k]);
    }
    N_hat(tmp, k2);
    for (int k = 0; k < n; ++k) {
      k2[k] *= dt;
      tmp[k] = E[k] * zh[k] + 0.5 * k2[k];
    }
    N_hat(tmp, k3);
    for (int k = 0; k < n; ++k) {
      k3[k] *= dt;
      tmp[k] = E2[k] * zh[k] + E[k] * k3[k];
    }
    N_hat(tmp, k4);
    for (int k = 0; k < n; ++k) {
      k4[k] *= dt;
      zh[k] = E2[k] * zh[k] + (E2[k] * k1[k] + 2.0 * E[k] * (k2[k] + k3[k]) + k4[k]) / 6.0;
    }
    fft_.backward(zh, z);
  }

  void linear_half(Field& z, double dt) const {
    Field zh = fft_.forward(z);
    const Field& E = half_step_factor(dt);
    for (int k = 0; k < grid_.n; ++k) zh[k] *= E[k];
    z = fft_.backward(zh);
  }

  /// e^{-i xi^2 dt / 2}, cached for the most recent dt.
  const Field& half_step_factor(double dt) const {
    if (dt != cached_dt_) {
      cached_half_.resize(grid_.n);
      cached_full_.resize(grid_.n);
      for (int k = 0; k < grid_.n; ++k) {
        cached_half_[k] = std::polar(1.0, -xi_[k] * xi_[k] * dt / 2.0);
        cached_full_[k] = cached_half_[k] * cached_half_[k];
      }
      cached_dt_ = dt;
    }
    return cached_half_;
  }
  const Field& full_step_factor(double dt) const {
    half_step_factor(dt);
    return cached_full_;
  }

  void step_strang(Field& z, double dt) const {
    linear_half(z, dt);
    if (!nl_.vanishes) {
      const int n = grid_.n;
      auto f = [&](const Field& u) {
        Field uh = fft_.forward(u);
        Field r = rhs_physical(u, uh);
        Field rh = fft_.forward(r);
        for (int k = 0; k < n; ++k) rh[k] *= mask_[k];
        return fft_.backward(rh);
      };
      Field tmp(n);
      const Field a = f(z);
      for (int j = 0; j < n; ++j) tmp[j] = z[j] + 0.5 * dt * a[j];
      const Field b = f(tmp);
      for (int j = 0; j < n; ++j) tmp[j] = z[j] + 0.5 * dt * b[j];
      const Field c = f(tmp);
      for (int j = 0; j < n; ++j) tmp[j] = z[j] + dt * c[j];
      const Field d = f(tmp);
      for (int j = 0; j < n; ++j) z[j] += dt * (a[j] + 2.0 * b[j] + 2.0 * c[j] + d[j]) / 6.0;
    }
    linear_half(z, dt);
  }

  GridSpec grid_;
  SolverConfig cfg_;
  Nonlinearity nl_;
  FFT fft_;
  std::vector<double> xi_;
  std::vector<double> mask_;
  // a Solver instance belongs to a single run; the cache is not shared
  mutable double cached_dt_ = std::numeric_limits<double>::quiet_NaN();
  mutable Field cached_half_;
  mutable Field cached_full_;
  struct Workspace {
    Field zh, tmp, v, zx, r;
    std::array<Field, 4> k;
    void resize(int n) {
      if (static_cast<int>(zh.size()) == n) return;
      for (Field* f : {&zh, &tmp, &v, &zx, &r, &k[0], &k[1], &k[2], &k[3]}) f->assign(n, cplx(0.0));
    }
  };
  mutable Workspace work_;
};

/// Initial data families.
enum class ProfileKind { Gaussian, GaussianPoly, Sech };

struct InitialData {
  ProfileKind kind = ProfileKind::Gaussian;
  double epsilon = 0.05;
  double sigma0 = 1.0;
  double x0 = 0.0;
  double velocity = 0.0;  ///< carrier wavenumber

  cplx operator()(double x) const {
    const double s = (x - x0) / sigma0;
    double env = 0.0;
    switch (kind) {
      case ProfileKind::Gaussian: env = std::exp(-0.5 * s * s); break;
      case ProfileKind::GaussianPoly: env = (1.0 + s) * std::exp(-0.5 * s * s); break;
      case ProfileKind::Sech: env = 1.0 / std::cosh(s); break;
    }
    return epsilon * env * std::polar(1.0, velocity * x);
  }

  FieldState sample(const GridSpec& g, double t0 = 0.0) const {
    FieldState s;
    s.t = t0;
    s.z.resize(g.n);
    for (int j = 0; j < g.n; ++j) s.z[j] = (*this)(g.x(j));
    return s;
  }
};

/// Exact free propagator e^{i t Delta} applied spectrally.
inline Field free_propagate(const GridSpec& g, const FFT& fft, std::span<const cplx> u, double t) {
  Field hat = fft.forward(u);
  for (int k = 0; k < g.n; ++k) hat[k] *= std::polar(1.0, -g.xi(k) * g.xi(k) * t);
  return fft.backward(hat);
}

}  // namespace smflow::spectral
