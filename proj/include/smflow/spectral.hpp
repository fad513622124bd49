#pragma once

// Periodic grid on [-L, L) and FFTW-backed transforms.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "smflow/error.hpp"

namespace smflow::spectral {

using cplx = std::complex<double>;
using Field = std::vector<cplx>;

struct GridSpec {
  double half_length = 200.0;
  int n = 4096;

  double length() const { return 2.0 * half_length; }
  double dx() const { return length() / n; }
  double x(int j) const { return -half_length + j * dx(); }
  /// Wavenumber of FFT bin k (standard ordering, negative half last).
  double xi(int k) const {
    const int m = k < n / 2 ? k : k - n;
    return std::numbers::pi * m / half_length;
  }
  int signed_index(int k) const { return k < n / 2 ? k : k - n; }
  double xi_max() const { return std::numbers::pi * (n / 2) / half_length; }

  void validate() const {
    if (!(half_length > 0.0)) throw Error(ErrorKind::InvalidArgument, "Lambda must be positive");
    if (n < 256 || (n & (n - 1)) != 0) throw Error(ErrorKind::InvalidArgument, "n must be a power of two >= 256");
    if (!(dx() < 1.0)) throw Error(ErrorKind::InvalidArgument, "dx = 2 Lambda / n must be < 1");
  }

  std::vector<double> xs() const {
    std::vector<double> out(n);
    for (int j = 0; j < n; ++j) out[j] = x(j);
    return out;
  }
  std::vector<double> xis() const {
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) out[k] = xi(k);
    return out;
  }
};

/// Forward/backward complex DFT of fixed length. The backward transform is normalized,
/// so backward(forward(u)) == u.
class FFT {
 public:
  explicit FFT(int n) : n_(n) {
    Field a(n), b(n);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~FFT() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  FFT(const FFT&) = delete;
  FFT& operator=(const FFT&) = delete;

  int size() const { return n_; }

  void forward(std::span<const cplx> in, std::span<cplx> out) const {
    fftw_execute_dft(fwd_, const_cast<fftw_complex*>(reinterpret_cast<const fftw_complex*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
  }
  void backward(std::span<const cplx> in, std::span<cplx> out) const {
    fftw_execute_dft(bwd_, const_cast<fftw_complex*>(reinterpret_cast<const fftw_complex*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double s = 1.0 / n_;
    for (auto& v : out) v *= s;
  }
  Field forward(std::span<const cplx> in) const {
    Field out(n_);
    forward(in, out);
    return out;
  }
  Field backward(std::span<const cplx> in) const {
    Field out(n_);
    backward(in, out);
    return out;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  int n_;
  fftw_plan fwd_{};
  fftw_plan bwd_{};
};

/// Spectral derivative of order `order` (multiplication by (i xi)^order).
inline Field derivative(const GridSpec& g, const FFT& fft, std::span<const cplx> u, int order = 1) {
  Field hat = fft.forward(u);
  for (int k = 0; k < g.n; ++k) {
    // the Nyquist mode has no well-defined odd derivative
    if (order % 2 == 1 && k == g.n / 2) {
      hat[k] = 0.0;
      continue;
    }
    hat[k] *= std::pow(cplx(0.0, g.xi(k)), order);
  }
  return fft.backward(hat);
}

/// Sum of |u|^2 dx.
inline double l2_squared(const GridSpec& g, std::span<const cplx> u) {
  double acc = 0.0;
  for (const auto& v : u) acc += std::norm(v);
  return acc * g.dx();
}

inline double l2_norm(const GridSpec& g, std::span<const cplx> u) { return std::sqrt(l2_squared(g, u)); }

inline double sup_norm(std::span<const cplx> u) {
  double m = 0.0;
  for (const auto& v : u) m = std::max(m, std::abs(v));
  return m;
}

/// Sobolev norm (sum_k (1 + xi^2)^s |u_hat|^2)^{1/2} consistent with l2_norm.
inline double sobolev_norm(const GridSpec& g, const FFT& fft, std::span<const cplx> u, int s) {
  const Field hat = fft.forward(u);
  double acc = 0.0;
  for (int k = 0; k < g.n; ++k) acc += std::pow(1.0 + g.xi(k) * g.xi(k), s) * std::norm(hat[k]);
  return std::sqrt(acc * g.dx() / g.n);
}

/// Continuous Fourier transform (2 pi)^{-1/2} int u(x) e^{-i x xi} dx sampled at grid wavenumbers,
/// in FFT ordering.
inline Field continuous_ft(const GridSpec& g, const FFT& fft, std::span<const cplx> u) {
  Field hat = fft.forward(u);
  const double scale = g.dx() / std::sqrt(2.0 * std::numbers::pi);
  for (int k = 0; k < g.n; ++k) {
    // grid starts at -L: e^{i xi L} = (-1)^m
    const double sign = (g.signed_index(k) % 2 == 0) ? 1.0 : -1.0;
    hat[k] *= scale * sign;
  }
  return hat;
}

/// Continuous Fourier transform at an arbitrary frequency by direct summation.
inline cplx continuous_ft_at(const GridSpec& g, std::span<const cplx> u, double xi) {
  cplx acc{};
  const cplx step = std::polar(1.0, -xi * g.dx());
  cplx phase = std::polar(1.0, -xi * g.x(0));
  for (int j = 0; j < g.n; ++j) {
    acc += u[j] * phase;
    phase *= step;
    // renormalize periodically against drift of the recurrence
    if ((j & 1023) == 1023) phase = std::polar(1.0, -xi * g.x(j + 1));
  }
  return acc * g.dx() / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace smflow::spectral
