#pragma once

// Finite-difference machinery for derivative jets on the real chart (x, y).

#include <array>
#include <cmath>
#include <complex>
#include <vector>

namespace smflow::fd {

/// Fornberg weights for the m-th derivative at 0 on the integer offsets -p..p.
inline std::vector<double> central_weights(int m, int p) {
  const int n = 2 * p + 1;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = static_cast<double>(i - p);
  // c[j][k]: weight of node j for derivative k
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

/// Half-width of the sixth-order central stencil for derivative order m.
inline int stencil_half_width(int m) {
  if (m == 0) return 0;
  return m <= 2 ? 3 : 4;
}

constexpr int kMaxMixedOrder = 4;

/// Table of mixed partials d^{a+b} F / dx^a dy^b at a point, a + b <= kMaxMixedOrder.
template <class T>
using MixedPartials = std::array<std::array<T, kMaxMixedOrder + 1>, kMaxMixedOrder + 1>;

template <class T, class F>
MixedPartials<T> mixed_partials_at_step(const F& f, double cx, double cy, double h, int max_order) {
  MixedPartials<T> out{};
  std::array<std::vector<double>, kMaxMixedOrder + 1> w;
  for (int m = 0; m <= max_order; ++m) w[m] = central_weights(m, stencil_half_width(m));
  const int pmax = stencil_half_width(max_order);
  const int width = 2 * pmax + 1;
  std::vector<T> samples(static_cast<std::size_t>(width * width));
  for (int i = -pmax; i <= pmax; ++i) {
    for (int j = -pmax; j <= pmax; ++j) {
      samples[(i + pmax) * width + (j + pmax)] = f(cx + i * h, cy + j * h);
    }
  }
  for (int a = 0; a <= max_order; ++a) {
    for (int b = 0; a + b <= max_order; ++b) {
      const int pa = stencil_half_width(a);
      const int pb = stencil_half_width(b);
      T acc{};
      for (int i = -pa; i <= pa; ++i) {
        const double wi = w[a][i + pa];
        if (wi == 0.0) continue;
        T row{};
        for (int j = -pb; j <= pb; ++j) {
          const double wj = w[b][j + pb];
          if (wj == 0.0) continue;
          row += wj * samples[(i + pmax) * width + (j + pmax)];
        }
        acc += wi * row;
      }
      out[a][b] = acc / std::pow(h, a + b);
    }
  }
  return out;
}

/// Sixth-order central differences with one Richardson extrapolation (h, h/2).
template <class T, class F>
MixedPartials<T> mixed_partials(const F& f, double cx, double cy, double h, int max_order) {
  const auto coarse = mixed_partials_at_step<T>(f, cx, cy, h, max_order);
  const auto fine = mixed_partials_at_step<T>(f, cx, cy, 0.5 * h, max_order);
  MixedPartials<T> out{};
  for (int a = 0; a <= max_order; ++a) {
    for (int b = 0; a + b <= max_order; ++b) {
      // the leading error term is O(h^6) for every order
      out[a][b] = (64.0 * fine[a][b] - coarse[a][b]) / 63.0;
    }
  }
  return out;
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Converts real mixed partials into d^p/dz^p d^q/dzbar^q using
/// d/dz = (d/dx - i d/dy)/2 and d/dzbar = (d/dx + i d/dy)/2.
template <class T>
std::complex<double> wirtinger(const MixedPartials<T>& d, int p, int q) {
  using cplx = std::complex<double>;
  const cplx mi(0.0, -1.0);
  const cplx pi(0.0, 1.0);
  cplx acc{};
  for (int r = 0; r <= p; ++r) {
    for (int s = 0; s <= q; ++s) {
      const int ax = r + s;
      const int ay = (p - r) + (q - s);
      const cplx coeff = binomial(p, r) * binomial(q, s) * std::pow(mi, p - r) * std::pow(pi, q - s);
      acc += coeff * cplx(d[ax][ay]);
    }
  }
  return acc / std::pow(2.0, p + q);
}

}  // namespace smflow::fd
