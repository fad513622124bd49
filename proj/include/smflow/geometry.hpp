#pragma once

// Conformal surface metrics h(z, zbar) dz dzbar: log-metric jets, curvature,
// the intrinsic vanishing residual, normal-form coefficients and the quartic
// change of variables that removes the quadratic and holomorphic cubic/quartic terms.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smflow/error.hpp"
#include "smflow/fd.hpp"

namespace smflow {

using cplx = std::complex<double>;

namespace geometry {

constexpr int kMaxJetOrder = 4;

/// Taylor coefficients of ln h = sum lambda_jk z^j zbar^k around the base point.
struct MetricJet {
  int order = kMaxJetOrder;
  std::array<std::array<cplx, kMaxJetOrder + 1>, kMaxJetOrder + 1> lambda{};
  double h0 = 1.0;

  cplx operator()(int j, int k) const { return lambda[j][k]; }
  cplx& at(int j, int k) { return lambda[j][k]; }

  /// max |lambda_jk - conj(lambda_kj)| over the table
  double reality_defect() const {
    double worst = 0.0;
    for (int j = 0; j <= order; ++j)
      for (int k = 0; j + k <= order; ++k)
        worst = std::max(worst, std::abs(lambda[j][k] - std::conj(lambda[k][j])));
    return worst;
  }

  /// ln h evaluated from the truncated series.
  cplx log_h(cplx z) const {
    cplx acc{};
    for (int j = 0; j <= order; ++j)
      for (int k = 0; j + k <= order; ++k)
        acc += lambda[j][k] * std::pow(z, j) * std::pow(std::conj(z), k);
    return acc;
  }

  /// (ln h)_z evaluated from the truncated series.
  cplx log_h_z(cplx z) const {
    cplx acc{};
    for (int j = 1; j <= order; ++j)
      for (int k = 0; j + k <= order; ++k)
        acc += static_cast<double>(j) * lambda[j][k] * std::pow(z, j - 1) * std::pow(std::conj(z), k);
    return acc;
  }
};

enum class MetricKind { CatalogEntry, ClosedForm, ExplicitJet };

/// A conformal metric given by an evaluator for h near the base point.
struct MetricSpec {
  MetricKind kind = MetricKind::ClosedForm;
  std::string name;
  std::function<double(cplx)> h;
  /// Optional closed form of (ln h)_z; when present the solver and the jet
  /// extraction use it instead of differentiating h.
  std::function<cplx(cplx)> log_h_z;
  cplx base_point{0.0, 0.0};
  std::optional<MetricJet> analytic_jet;
  double chart_radius = 0.3;

  double evaluate(cplx zeta) const { return h(zeta); }

  /// (ln h)_z at zeta, closed form when available, otherwise central differences.
  cplx dlog_h(cplx zeta) const {
    if (log_h_z) return log_h_z(zeta);
    const double step = 1e-5;
    auto lh = [&](double x, double y) { return std::log(h(cplx(x, y))); };
    const double dx = (lh(zeta.real() + step, zeta.imag()) - lh(zeta.real() - step, zeta.imag())) / (2 * step);
    const double dy = (lh(zeta.real(), zeta.imag() + step) - lh(zeta.real(), zeta.imag() - step)) / (2 * step);
    return 0.5 * cplx(dx, -dy);
  }

  /// Same surface, chart translated so that `center` becomes the origin.
  MetricSpec recentred(cplx center) const {
    MetricSpec out;
    out.kind = MetricKind::ClosedForm;
    out.name = name + "@recentred";
    auto hh = h;
    out.h = [hh, center](cplx zeta) { return hh(center + zeta); };
    if (log_h_z) {
      auto d = log_h_z;
      out.log_h_z = [d, center](cplx zeta) { return d(center + zeta); };
    }
    out.chart_radius = chart_radius;
    return out;
  }
};

/// Metric whose logarithm is exactly the given jet polynomial.
inline MetricSpec metric_from_jet(const MetricJet& jet, std::string name = "explicit-jet") {
  MetricSpec spec;
  spec.kind = MetricKind::ExplicitJet;
  spec.name = std::move(name);
  spec.h = [jet](cplx z) { return std::exp(jet.log_h(z).real()); };
  spec.log_h_z = [jet](cplx z) { return jet.log_h_z(z); };
  spec.analytic_jet = jet;
  return spec;
}

struct JetOptions {
  double fd_step = 5e-2;
  double reality_tol = 1e-8;
  double cross_check_tol = 1e-6;
};

namespace detail {

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline void check_positive_disk(const MetricSpec& spec, double radius) {
  constexpr int kRings = 4;
  constexpr int kSpokes = 16;
  for (int r = 0; r <= kRings; ++r) {
    for (int s = 0; s < kSpokes; ++s) {
      const double rho = radius * r / kRings;
      const cplx zeta = spec.base_point + std::polar(rho, 2.0 * M_PI * s / kSpokes);
      const double value = spec.h(zeta);
      if (!(value > 0.0) || !std::isfinite(value)) {
        throw Error(ErrorKind::NonPositiveMetric,
                    "h <= 0 or non-finite near base point of metric '" + spec.name + "'");
      }
      if (r == 0) break;
    }
  }
}

}  // namespace detail

/// Jet from finite differences, before any symmetrization. Uses (ln h)_z when a
/// closed form is present, which needs one derivative order fewer than differencing ln h.
inline MetricJet finite_difference_jet(const MetricSpec& spec, int order, const JetOptions& opts) {
  const double cx = spec.base_point.real();
  const double cy = spec.base_point.imag();
  MetricJet jet;
  jet.order = order;
  const double h0 = spec.h(spec.base_point);
  jet.h0 = h0;
  jet.at(0, 0) = std::log(h0);
  if (spec.log_h_z) {
    auto g = [&](double x, double y) { return spec.log_h_z(cplx(x, y)); };
    const auto d = fd::mixed_partials<cplx>(g, cx, cy, opts.fd_step, order - 1);
    for (int j = 1; j <= order; ++j) {
      for (int k = 0; j + k <= order; ++k) {
        // (ln h)_z = sum j lambda_jk z^{j-1} zbar^k
        jet.at(j, k) = fd::wirtinger(d, j - 1, k) / (detail::factorial(j) * detail::factorial(k));
      }
    }
    for (int k = 1; k <= order; ++k) jet.at(0, k) = std::conj(jet(k, 0));
  } else {
    auto lh = [&](double x, double y) { return std::log(spec.h(cplx(x, y))); };
    const auto d = fd::mixed_partials<double>(lh, cx, cy, opts.fd_step, order);
    for (int j = 0; j <= order; ++j) {
      for (int k = 0; j + k <= order; ++k) {
        if (j == 0 && k == 0) continue;
        jet.at(j, k) = fd::wirtinger(d, j, k) / (detail::factorial(j) * detail::factorial(k));
      }
    }
  }
  return jet;
}

namespace detail {

inline void symmetrize(MetricJet& jet) {
  for (int j = 0; j <= jet.order; ++j) {
    for (int k = j; j + k <= jet.order; ++k) {
      const cplx avg = 0.5 * (jet(j, k) + std::conj(jet(k, j)));
      jet.at(j, k) = avg;
      jet.at(k, j) = std::conj(avg);
    }
  }
  for (int j = 0; j <= jet.order; ++j) jet.at(j, j) = cplx(jet(j, j).real(), 0.0);
}

}  // namespace detail

/// Taylor jet of ln h at the base point. Analytic jets are validated against
/// finite differences and then returned verbatim.
inline MetricJet log_metric_jet(const MetricSpec& spec, int order = kMaxJetOrder, const JetOptions& opts = {}) {
  if (order < 1 || order > kMaxJetOrder) {
    throw Error(ErrorKind::InvalidArgument, "jet order must lie in [1, 4]");
  }
  detail::check_positive_disk(spec, 8.0 * opts.fd_step);
  MetricJet numeric = finite_difference_jet(spec, order, opts);
  const double defect = numeric.reality_defect();
  if (defect > opts.reality_tol) {
    throw Error(ErrorKind::JetInconsistency,
                "finite-difference jet violates lambda_jk = conj(lambda_kj) by " + std::to_string(defect));
  }
  detail::symmetrize(numeric);
  if (!spec.analytic_jet) return numeric;

  MetricJet analytic = *spec.analytic_jet;
  if (analytic.reality_defect() > 1e-14 || !(analytic.h0 > 0.0)) {
    throw Error(ErrorKind::JetInconsistency, "analytic jet of '" + spec.name + "' is not real");
  }
  for (int j = 0; j <= order; ++j) {
    for (int k = 0; j + k <= order; ++k) {
      // round-off of the highest differenced order dominates; scale tolerance by it
      const int deriv = spec.log_h_z ? std::max(0, j + k - 1) : j + k;
      const double tol = opts.cross_check_tol * std::max(1.0, std::pow(10.0, deriv - 2));
      if (std::abs(analytic(j, k) - numeric(j, k)) > tol * std::max(1.0, std::abs(analytic(j, k)))) {
        throw Error(ErrorKind::JetInconsistency,
                    "analytic jet of '" + spec.name + "' disagrees with finite differences at (" +
                        std::to_string(j) + "," + std::to_string(k) + ")");
      }
    }
  }
  analytic.order = order;
  for (int j = 0; j <= kMaxJetOrder; ++j)
    for (int k = 0; k <= kMaxJetOrder; ++k)
      if (j + k > order) analytic.at(j, k) = 0.0;
  return analytic;
}

/// Sectional curvature K = -(2 / h0) [ln h]_{z zbar}(0).
inline double curvature_at(const MetricJet& jet, double tol = 1e-10) {
  if (jet.order < 2) throw Error(ErrorKind::InvalidArgument, "curvature needs a jet of order >= 2");
  const cplx l11 = jet(1, 1);
  if (std::abs(l11.imag()) >= tol) {
    throw Error(ErrorKind::NonRealCurvature, "Im lambda_11 = " + std::to_string(l11.imag()));
  }
  return -2.0 * l11.real() / jet.h0;
}

/// [ln h]_z [ln h]_{z zbar} - [ln h]_{z zbar z} at the base point.
inline cplx intrinsic_vanishing_residual(const MetricJet& jet) {
  if (jet.order < 3) throw Error(ErrorKind::InvalidArgument, "vanishing residual needs a jet of order >= 3");
  return jet(1, 0) * jet(1, 1) - 2.0 * jet(2, 1);
}

/// Coefficients of h_z/h = c0 + c1 zbar + c2 z + c3 z^2 + c4 zbar^2 + c5 z zbar + O(|z|^3).
struct CCoefficients {
  std::array<cplx, 6> c{};
  cplx operator[](int i) const { return c[i]; }
};

inline CCoefficients extract_c_coefficients(const MetricJet& jet, double tol = 1e-10) {
  if (jet.order < 3) throw Error(ErrorKind::InvalidArgument, "c-coefficients need a jet of order >= 3");
  CCoefficients out;
  out.c = {jet(1, 0), jet(1, 1), 2.0 * jet(2, 0), 3.0 * jet(3, 0), jet(1, 2), 2.0 * jet(2, 1)};
  if (std::abs(out.c[1].imag()) > tol) {
    throw Error(ErrorKind::JetInconsistency, "c1 is not real");
  }
  if (std::abs(out.c[5] - 2.0 * std::conj(out.c[4])) > tol * std::max(1.0, std::abs(out.c[5]))) {
    throw Error(ErrorKind::JetInconsistency, "c5 != 2 conj(c4)");
  }
  return out;
}

struct Gammas {
  cplx g1{}, g2{}, g3{};
};

/// Triangular solve of 2g1 + c0 = 0, c2 + 2g1 c0 + 6g2 = 0, 12g3 + c3 + 2g1 c2 + 3g2 c0 = 0.
inline Gammas solve_gamma(cplx c0, cplx c2, cplx c3) {
  Gammas g;
  g.g1 = -c0 / 2.0;
  g.g2 = -(c2 + 2.0 * g.g1 * c0) / 6.0;
  g.g3 = -(c3 + 2.0 * g.g1 * c2 + 3.0 * g.g2 * c0) / 12.0;
  return g;
}

/// Residuals of the three defining equations; used as a self-check.
inline std::array<cplx, 3> gamma_residuals(const Gammas& g, cplx c0, cplx c2, cplx c3) {
  return {2.0 * g.g1 + c0, c2 + 2.0 * g.g1 * c0 + 6.0 * g.g2, 12.0 * g.g3 + c3 + 2.0 * g.g1 * c2 + 3.0 * g.g2 * c0};
}

struct Nus {
  cplx nu1{}, nu2{}, nu3{};
};

/// nu1 = c1, nu2 = c5 - 2 g1 c1, nu3 = c4 - c1 conj(g1).
inline Nus nu_coefficients(const CCoefficients& c, cplx gamma1) {
  Nus n;
  n.nu1 = c[1];
  n.nu2 = c[5] - 2.0 * gamma1 * c[1];
  n.nu3 = c[4] - c[1] * std::conj(gamma1);
  return n;
}

/// Every constant of the normal form at one point.
struct NormalFormCoefficients {
  CCoefficients c;
  Gammas gamma;
  Nus nu;
  double K = 0.0;
  double h0 = 1.0;
  double c_mod = 0.0;  ///< -K h0 / 2
  cplx vanishing_residual{};
};

inline NormalFormCoefficients normal_form(const MetricJet& jet) {
  NormalFormCoefficients out;
  out.c = extract_c_coefficients(jet);
  out.gamma = solve_gamma(out.c[0], out.c[2], out.c[3]);
  out.nu = nu_coefficients(out.c, out.gamma.g1);
  out.K = curvature_at(jet);
  out.h0 = jet.h0;
  out.c_mod = -0.5 * out.K * out.h0;
  out.vanishing_residual = intrinsic_vanishing_residual(jet);
  return out;
}

inline cplx forward_transform(cplx z, const Gammas& g) {
  return z + z * z * (g.g1 + z * (g.g2 + z * g.g3));
}

/// Inverts w = z + g1 z^2 + g2 z^3 + g3 z^4 by Newton iteration seeded at w.
inline cplx inverse_transform(cplx w, const Gammas& g, int max_iter = 30, double tol = 1e-13) {
  cplx z = w;
  for (int it = 0; it < max_iter; ++it) {
    const cplx f = forward_transform(z, g) - w;
    if (std::abs(f) < tol) return z;
    const cplx df = 1.0 + z * (2.0 * g.g1 + z * (3.0 * g.g2 + z * 4.0 * g.g3));
    z -= f / df;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
  }
  if (std::abs(forward_transform(z, g) - w) < tol) return z;
  throw Error(ErrorKind::NewtonDivergence, "quartic inverse failed for |w| = " + std::to_string(std::abs(w)));
}

inline std::vector<cplx> forward_transform(std::span<const cplx> z, const Gammas& g) {
  std::vector<cplx> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = forward_transform(z[i], g);
  return out;
}

inline std::vector<cplx> inverse_transform(std::span<const cplx> w, const Gammas& g) {
  std::vector<cplx> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = inverse_transform(w[i], g);
  return out;
}

/// Polynomial f(z) = a1 z + a2 z^2 + a3 z^3 + a4 z^4 (f(0) = 0).
struct HolomorphicMap {
  std::array<cplx, 4> a{cplx(1.0), cplx(0.0), cplx(0.0), cplx(0.0)};

  cplx operator()(cplx z) const { return z * (a[0] + z * (a[1] + z * (a[2] + z * a[3]))); }
  cplx d1(cplx z) const { return a[0] + z * (2.0 * a[1] + z * (3.0 * a[2] + z * 4.0 * a[3])); }
  cplx d2(cplx z) const { return 2.0 * a[1] + z * (6.0 * a[2] + z * 12.0 * a[3]); }
};

struct PushforwardCheck {
  cplx lhs{};
  cplx rhs{};
  double gap() const { return std::abs(lhs - rhs); }
};

/// Vanishing residual of the pulled-back metric h(f) |f'|^2 against
/// conj(f'(0)) f'(0)^2 times the residual of h. The left side differentiates the
/// composed metric numerically; the right side uses the jet directly.
inline PushforwardCheck holomorphic_pushforward_check(const MetricJet& jet_eta, const HolomorphicMap& f,
                                                      const JetOptions& opts = {}) {
  if (std::abs(f.a[0]) < 1e-10) throw Error(ErrorKind::DegenerateMap, "f'(0) vanishes");
  MetricSpec pulled;
  pulled.name = "pullback";
  pulled.h = [jet_eta, f](cplx z) {
    const cplx d = f.d1(z);
    return std::exp(jet_eta.log_h(f(z)).real()) * std::norm(d);
  };
  pulled.log_h_z = [jet_eta, f](cplx z) {
    const cplx d = f.d1(z);
    return jet_eta.log_h_z(f(z)) * d + f.d2(z) / d;
  };
  JetOptions o = opts;
  // the pulled-back jet has larger high-order terms; only orders <= 3 matter here
  o.fd_step = std::min(opts.fd_step, 1e-2);
  o.reality_tol = 1e-6;
  const MetricJet jet_z = log_metric_jet(pulled, 3, o);
  PushforwardCheck out;
  out.lhs = intrinsic_vanishing_residual(jet_z);
  const cplx a1 = f.a[0];
  out.rhs = std::conj(a1) * a1 * a1 * intrinsic_vanishing_residual(jet_eta);
  return out;
}

}  // namespace geometry
}  // namespace smflow
