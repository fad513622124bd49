#pragma once

// Numerical location of intrinsic vanishing points in a rectangle of the chart.

#include <algorithm>
#include <cmath>
#include <vector>

#include "smflow/error.hpp"
#include "smflow/geometry.hpp"

namespace smflow::geometry {

struct Region {
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
};

struct VanishingScan {
  std::vector<cplx> zeros;
  std::vector<double> residual_at_zero;
  bool identically_vanishing = false;
  double max_node_residual = 0.0;
  int nodes = 0;
};

/// Residual of the jet recentred at `center` (evaluator translated, not re-expanded).
inline cplx vanishing_residual_at(const MetricSpec& spec, cplx center, const JetOptions& opts = {}) {
  MetricSpec moved = spec.recentred(center);
  return intrinsic_vanishing_residual(log_metric_jet(moved, 3, opts));
}

/// Grid scan for local minima of |residual|, each polished by Newton on (Re, Im) with a
/// finite-difference Jacobian; zeros closer than `merge_tol` are merged.
inline VanishingScan scan_vanishing_points(const MetricSpec& spec, const Region& region, int resolution,
                                           double vanish_tol = 1e-8, const JetOptions& opts = {}) {
  if (resolution < 2) throw Error(ErrorKind::InvalidArgument, "resolution must be >= 2");
  const int n = resolution;
  const double hx = (region.x_max - region.x_min) / (n - 1);
  const double hy = (region.y_max - region.y_min) / (n - 1);
  auto node = [&](int i, int j) { return cplx(region.x_min + i * hx, region.y_min + j * hy); };

  std::vector<double> mag(static_cast<std::size_t>(n * n));
  VanishingScan out;
  out.nodes = n * n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      MetricSpec moved = spec.recentred(node(i, j));
      try {
        detail::check_positive_disk(moved, 8.0 * opts.fd_step);
      } catch (const Error&) {
        throw Error(ErrorKind::NonPositiveMetric, "h not positive near region node");
      }
      const double m = std::abs(vanishing_residual_at(spec, node(i, j), opts));
      mag[i * n + j] = m;
      out.max_node_residual = std::max(out.max_node_residual, m);
    }
  }
  if (out.max_node_residual < vanish_tol) {
    out.identically_vanishing = true;
    return out;
  }

  auto residual_vec = [&](cplx c) { return vanishing_residual_at(spec, c, opts); };
  const double merge_tol = 1e-6;
  const double fd = 1e-6;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double m = mag[i * n + j];
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          const int a = i + di, b = j + dj;
          if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= n || b >= n) continue;
          if (mag[a * n + b] < m) {
            is_min = false;
            break;
          }
        }
      }
      if (!is_min) continue;

      cplx c = node(i, j);
      cplx r = residual_vec(c);
      for (int it = 0; it < 40 && std::abs(r) >= 1e-2 * vanish_tol; ++it) {
        const cplx rx = (residual_vec(c + fd) - residual_vec(c - fd)) / (2 * fd);
        const cplx ry = (residual_vec(c + cplx(0, fd)) - residual_vec(c - cplx(0, fd))) / (2 * fd);
        const double a11 = rx.real(), a12 = ry.real(), a21 = rx.imag(), a22 = ry.imag();
        const double det = a11 * a22 - a12 * a21;
        if (std::abs(det) < 1e-300) break;
        const double dxs = (a22 * r.real() - a12 * r.imag()) / det;
        const double dys = (-a21 * r.real() + a11 * r.imag()) / det;
        c -= cplx(dxs, dys);
        r = residual_vec(c);
      }
      const bool inside = c.real() >= region.x_min - hx && c.real() <= region.x_max + hx &&
                          c.imag() >= region.y_min - hy && c.imag() <= region.y_max + hy;
      if (!inside || !(std::abs(r) < vanish_tol)) continue;
      const bool dup = std::any_of(out.zeros.begin(), out.zeros.end(),
                                   [&](cplx z) { return std::abs(z - c) < merge_tol; });
      if (!dup) {
        out.zeros.push_back(c);
        out.residual_at_zero.push_back(std::abs(r));
      }
    }
  }
  return out;
}

}  // namespace smflow::geometry
