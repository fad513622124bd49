#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature for complex-valued integrands.

#include <array>
#include <cmath>
#include <complex>
#include <functional>

#include "smflow/error.hpp"

namespace smflow::quadrature {

using cplx = std::complex<double>;

namespace detail {

constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Estimate {
  cplx value;
  double error;
};

template <class F>
Estimate gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const cplx fc = f(c);
  cplx kron = fc * kWgk[7];
  cplx gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const cplx sum = f(c - dx) + f(c + dx);
    kron += kWgk[j] * sum;
    // odd Kronrod nodes coincide with the Gauss nodes
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  return {kron * h, std::abs((kron - gauss) * h)};
}

template <class F>
cplx adapt(const F& f, double a, double b, double tol, const Estimate& whole, int depth, int max_depth) {
  if (whole.error <= tol || (b - a) < 1e-14 * std::max(1.0, std::abs(a))) return whole.value;
  if (depth >= max_depth) {
    throw Error(ErrorKind::QuadratureFailure,
                "tolerance not met on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  const double m = 0.5 * (a + b);
  const Estimate left = gk15(f, a, m);
  const Estimate right = gk15(f, m, b);
  return adapt(f, a, m, 0.5 * tol, left, depth + 1, max_depth) +
         adapt(f, m, b, 0.5 * tol, right, depth + 1, max_depth);
}

}  // namespace detail

/// Integral of f over [a, b] to absolute tolerance `tol` by recursive bisection.
template <class F>
cplx integrate(const F& f, double a, double b, double tol = 1e-10, int max_depth = 40) {
  if (a == b) return cplx(0.0);
  if (a > b) return -integrate(f, b, a, tol, max_depth);
  const auto whole = detail::gk15(f, a, b);
  return detail::adapt(f, a, b, tol, whole, 0, max_depth);
}

}  // namespace smflow::quadrature
