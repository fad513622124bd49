#pragma once

// Observables along a run: energy, mass functional, Galilean and scaling fields,
// Fourier profiles and the logarithmic phase correction, power-law fits.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "smflow/error.hpp"
#include "smflow/solver.hpp"

namespace smflow::diagnostics {

using spectral::cplx;
using spectral::Field;
using spectral::FieldState;
using spectral::GridSpec;
using spectral::FFT;

using Weight = std::function<double(cplx)>;

/// E = 1/2 int h(z) |z_x|^2 dx.
inline double energy(const GridSpec& g, const FFT& fft, std::span<const cplx> z, const Weight& h) {
  const Field zx = spectral::derivative(g, fft, z);
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j) acc += h(z[j]) * std::norm(zx[j]);
  return 0.5 * acc * g.dx();
}

/// 1/2 int |z_x|^2 / h(z) dx, the quantity conserved by i z_t + z_xx = (ln h)_z z_x^2.
inline double flow_invariant(const GridSpec& g, const FFT& fft, std::span<const cplx> z, const Weight& h) {
  const Field zx = spectral::derivative(g, fft, z);
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j) acc += std::norm(zx[j]) / h(z[j]);
  return 0.5 * acc * g.dx();
}

/// int (1 - nu1 |w|^2) |w|^2 dx.
inline double mass_functional(const GridSpec& g, std::span<const cplx> w, double nu1, double omega = 0.3) {
  double acc = 0.0;
  for (const auto& v : w) {
    const double m = std::norm(v);
    if (std::sqrt(m) > omega) throw Error(ErrorKind::ChartExit, "|w| exceeds chart radius in mass functional");
    acc += (1.0 - nu1 * m) * m;
  }
  return acc * g.dx();
}

/// Lw = i x w - 2 t w_x.
inline Field apply_L(const GridSpec& g, const FFT& fft, std::span<const cplx> w, double t) {
  const Field wx = spectral::derivative(g, fft, w);
  Field out(g.n);
  for (int j = 0; j < g.n; ++j) out[j] = cplx(0.0, g.x(j)) * w[j] - 2.0 * t * wx[j];
  return out;
}

/// int (1 - nu1 |w|^2) |Lw|^2 dx.
inline double L_functional(const GridSpec& g, const FFT& fft, std::span<const cplx> w, double t, double nu1) {
  const Field lw = apply_L(g, fft, w, t);
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j) acc += (1.0 - nu1 * std::norm(w[j])) * std::norm(lw[j]);
  return acc * g.dx();
}

struct SField {
  Field Sz;
  double weighted_norm = 0.0;  ///< (int h |Sz|^2)^{1/2}
};

/// Sz = 2 t z_t + x z_x with z_t taken from the equation itself.
inline SField apply_S(const spectral::Solver& solver, const FieldState& s, const Weight& h) {
  const auto& g = solver.grid();
  const Field zt = solver.time_derivative(s.z);
  const Field zx = spectral::derivative(g, solver.fft(), s.z);
  SField out;
  out.Sz.resize(g.n);
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j) {
    out.Sz[j] = 2.0 * s.t * zt[j] + g.x(j) * zx[j];
    acc += h(s.z[j]) * std::norm(out.Sz[j]);
  }
  out.weighted_norm = std::sqrt(acc * g.dx());
  return out;
}

/// f_hat(t, xi) = e^{i t xi^2} w_hat(t, xi) on the grid wavenumbers (FFT ordering).
inline Field fourier_profile(const GridSpec& g, const FFT& fft, const FieldState& s) {
  Field hat = spectral::continuous_ft(g, fft, s.z);
  for (int k = 0; k < g.n; ++k) hat[k] *= std::polar(1.0, s.t * g.xi(k) * g.xi(k));
  return hat;
}

/// f_hat at arbitrary frequencies by direct summation.
inline std::vector<cplx> fourier_profile_at(const GridSpec& g, const FieldState& s, std::span<const double> sigmas) {
  std::vector<cplx> out;
  out.reserve(sigmas.size());
  for (double sigma : sigmas) {
    out.push_back(std::polar(1.0, s.t * sigma * sigma) * spectral::continuous_ft_at(g, s.z, sigma));
  }
  return out;
}

/// `count` values log-spaced in [lo, hi].
inline std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  }
  return out;
}

/// Accumulates Phi(t, sigma) = int_1^t sigma^2 |f_hat(tau, sigma)|^2 / (2 tau) d tau by the
/// trapezoid rule and forms F_hat = exp(-i c Phi) f_hat. Rows with t < 1 are ignored.
class PhaseTracker {
 public:
  PhaseTracker(std::vector<double> sigmas, double c, double phase_tol = 1e-4)
      : sigmas_(std::move(sigmas)), c_(c), phase_tol_(phase_tol), phi_(sigmas_.size(), 0.0) {}

  const std::vector<double>& sigmas() const { return sigmas_; }
  double c() const { return c_; }
  bool active() const { return active_; }
  double last_time() const { return last_t_; }

  void push(double t, std::span<const cplx> fhat) {
    if (fhat.size() != sigmas_.size()) throw Error(ErrorKind::InvalidArgument, "tracked frequency count mismatch");
    if (t < 1.0) return;
    std::vector<double> integrand(sigmas_.size());
    for (std::size_t i = 0; i < sigmas_.size(); ++i) {
      integrand[i] = sigmas_[i] * sigmas_[i] * std::norm(fhat[i]) / (2.0 * t);
    }
    if (active_) {
      const double dtau = t - last_t_;
      for (std::size_t i = 0; i < sigmas_.size(); ++i) {
        if (std::abs(c_) * std::abs(integrand[i] - last_integrand_[i]) > 10.0 * phase_tol_) {
          throw Error(ErrorKind::InsufficientSampling,
                      "phase integrand jumps between t=" + std::to_string(last_t_) + " and t=" + std::to_string(t));
        }
        phi_[i] += 0.5 * dtau * (integrand[i] + last_integrand_[i]);
      }
    }
    active_ = true;
    last_t_ = t;
    last_integrand_ = std::move(integrand);
  }

  /// Phi without the factor c.
  const std::vector<double>& phi() const { return phi_; }

  std::vector<cplx> corrected(std::span<const cplx> fhat) const {
    std::vector<cplx> out(fhat.size());
    for (std::size_t i = 0; i < fhat.size(); ++i) out[i] = std::polar(1.0, -c_ * phi_[i]) * fhat[i];
    return out;
  }

 private:
  std::vector<double> sigmas_;
  double c_;
  double phase_tol_;
  std::vector<double> phi_;
  std::vector<double> last_integrand_;
  double last_t_ = 0.0;
  bool active_ = false;
};

struct FitResult {
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double t_min = 0.0, t_max = 0.0;
  int points = 0;
};

/// Least squares of ln(value) against ln(t) over rows with t in [t_min, t_max].
inline FitResult power_law_fit(std::span<const double> t, std::span<const double> value, double t_min, double t_max,
                               std::size_t min_points = 10) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_min || t[i] > t_max) continue;
    if (!(value[i] > 0.0) || !(t[i] > 0.0)) {
      throw Error(ErrorKind::DegenerateFit, "non-positive value in fit window");
    }
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(value[i]));
  }
  if (lx.size() < min_points) {
    throw Error(ErrorKind::DegenerateFit, "only " + std::to_string(lx.size()) + " rows in fit window");
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx <= 0.0) throw Error(ErrorKind::DegenerateFit, "zero variance in ln t");
  FitResult out;
  out.exponent = sxy / sxx;
  out.intercept = my - out.exponent * mx;
  out.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  out.t_min = t_min;
  out.t_max = t_max;
  out.points = static_cast<int>(lx.size());
  return out;
}

/// Slope of y against ln t by least squares (used for phase drift).
inline double log_slope(std::span<const double> t, std::span<const double> y) {
  const double n = static_cast<double>(t.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mx += std::log(t[i]);
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxx += (std::log(t[i]) - mx) * (std::log(t[i]) - mx);
    sxy += (std::log(t[i]) - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw Error(ErrorKind::DegenerateFit, "zero variance in ln t");
  return sxy / sxx;
}

/// Unwraps a phase sequence so consecutive entries differ by less than pi.
inline std::vector<double> unwrap(std::span<const double> phase) {
  std::vector<double> out(phase.begin(), phase.end());
  for (std::size_t i = 1; i < out.size(); ++i) {
    double d = out[i] - out[i - 1];
    while (d > std::numbers::pi) {
      out[i] -= 2.0 * std::numbers::pi;
      d -= 2.0 * std::numbers::pi;
    }
    while (d < -std::numbers::pi) {
      out[i] += 2.0 * std::numbers::pi;
      d += 2.0 * std::numbers::pi;
    }
  }
  return out;
}

/// Main term (2it)^{-1/2} psi(y) exp(i x^2/4t + (ic/2) |y psi(y)|^2 ln 2t), y = x/2t.
inline cplx asymptotic_main_term(const std::function<cplx(double)>& psi, double c, double t, double x) {
  const double y = x / (2.0 * t);
  const cplx p = psi(y);
  const double phase = x * x / (4.0 * t) + 0.5 * c * y * y * std::norm(p) * std::log(2.0 * t);
  return std::polar(1.0 / std::sqrt(2.0 * t), -std::numbers::pi / 4.0) * p * std::polar(1.0, phase);
}

struct AsymptoticGap {
  double t = 0.0;
  double linf = 0.0;
  double l2 = 0.0;
};

/// Gap between the state and the leading asymptotic profile built from psi.
inline AsymptoticGap asymptotic_compare(const GridSpec& g, const FieldState& s,
                                        const std::function<cplx(double)>& psi, double c) {
  if (!(s.t > 0.0)) throw Error(ErrorKind::InvalidArgument, "asymptotic comparison needs t > 0");
  AsymptoticGap out;
  out.t = s.t;
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j) {
    const double d = std::abs(s.z[j] - asymptotic_main_term(psi, c, s.t, g.x(j)));
    out.linf = std::max(out.linf, d);
    acc += d * d;
  }
  out.l2 = std::sqrt(acc * g.dx());
  return out;
}

/// Cubic (Catmull-Rom) interpolation of a profile sampled at the grid wavenumbers (FFT ordering).
/// Zero outside the resolved band.
inline std::function<cplx(double)> interpolate_profile(const GridSpec& g, Field values) {
  const int n = g.n;
  Field ordered(n);
  for (int k = 0; k < n; ++k) ordered[g.signed_index(k) + n / 2] = values[k];
  const double dxi = std::numbers::pi / g.half_length;
  return [ordered = std::move(ordered), n, dxi](double xi) -> cplx {
    const double u = xi / dxi + n / 2;
    const int i = static_cast<int>(std::floor(u));
    if (i < 1 || i + 2 >= n) return 0.0;
    const double f = u - i;
    const cplx p0 = ordered[i - 1], p1 = ordered[i], p2 = ordered[i + 1], p3 = ordered[i + 2];
    return p1 + 0.5 * f * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)));
  };
}

/// ||z_hat||_{L^inf_sigma} over the grid wavenumbers.
inline double fourier_sup(const GridSpec& g, const FFT& fft, std::span<const cplx> z) {
  return spectral::sup_norm(spectral::continuous_ft(g, fft, z));
}

/// ||t z z_x||_{L^2}.
inline double tz_zx_norm(const GridSpec& g, const FFT& fft, std::span<const cplx> z, double t) {
  const Field zx = spectral::derivative(g, fft, z);
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j) acc += std::norm(t * z[j] * zx[j]);
  return std::sqrt(acc * g.dx());
}

/// Least-squares slope of y against x.
inline double linear_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) throw Error(ErrorKind::DegenerateFit, "need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw Error(ErrorKind::DegenerateFit, "zero variance in abscissa");
  return sxy / sxx;
}

}  // namespace smflow::diagnostics
