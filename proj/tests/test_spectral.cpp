#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "smflow/catalog.hpp"
#include "smflow/geometry.hpp"
#include "smflow/solver.hpp"
#include "smflow/spectral.hpp"

using namespace smflow;
using namespace smflow::spectral;

namespace {

Field sample(const GridSpec& g, const std::function<cplx(double)>& f) {
  Field out(g.n);
  for (int j = 0; j < g.n; ++j) out[j] = f(g.x(j));
  return out;
}

double max_gap(std::span<const cplx> a, std::span<const cplx> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// e^{it d_xx} e^{-x^2/2}
cplx free_gaussian(double t, double x) {
  const cplx s = 1.0 + cplx(0.0, 2.0 * t);
  return std::exp(-x * x / (2.0 * s)) / std::sqrt(s);
}

}  // namespace

TEST(Grid, Validation) {
  EXPECT_NO_THROW((GridSpec{20.0, 512}.validate()));
  EXPECT_THROW((GridSpec{20.0, 500}.validate()), Error);
  EXPECT_THROW((GridSpec{20.0, 128}.validate()), Error);
  EXPECT_THROW((GridSpec{-1.0, 512}.validate()), Error);
  EXPECT_THROW((GridSpec{1000.0, 512}.validate()), Error);
}

TEST(Grid, Wavenumbers) {
  const GridSpec g{10.0, 256};
  EXPECT_DOUBLE_EQ(g.xi(1), std::numbers::pi / 10.0);
  EXPECT_DOUBLE_EQ(g.xi(255), -std::numbers::pi / 10.0);
  EXPECT_EQ(g.signed_index(128), -128);
  EXPECT_DOUBLE_EQ(g.x(0), -10.0);
}

TEST(FFT, RoundTrip) {
  const GridSpec g{20.0, 512};
  FFT fft(g.n);
  const Field u = sample(g, [](double x) { return cplx(std::exp(-x * x), std::sin(x) * std::exp(-0.1 * x * x)); });
  EXPECT_LT(max_gap(fft.backward(fft.forward(u)), u), 1e-15);
}

TEST(Spectral, DerivativesOfGaussian) {
  const GridSpec g{20.0, 512};
  FFT fft(g.n);
  const Field u = sample(g, [](double x) { return cplx(std::exp(-x * x)); });
  const Field d1 = derivative(g, fft, u, 1);
  const Field d2 = derivative(g, fft, u, 2);
  EXPECT_LT(max_gap(d1, sample(g, [](double x) { return cplx(-2.0 * x * std::exp(-x * x)); })), 1e-12);
  EXPECT_LT(max_gap(d2, sample(g, [](double x) { return cplx((4.0 * x * x - 2.0) * std::exp(-x * x)); })), 1e-11);
}

TEST(Spectral, NormsOfGaussian) {
  const GridSpec g{20.0, 512};
  FFT fft(g.n);
  const Field u = sample(g, [](double x) { return cplx(std::exp(-0.5 * x * x)); });
  EXPECT_NEAR(l2_squared(g, u), std::sqrt(std::numbers::pi), 1e-13);
  EXPECT_NEAR(sup_norm(u), 1.0, 1e-15);
  // ||u||_{H^1}^2 = ||u||^2 + ||u_x||^2 = sqrt(pi) (1 + 1/2)
  EXPECT_NEAR(std::pow(sobolev_norm(g, fft, u, 1), 2), 1.5 * std::sqrt(std::numbers::pi), 1e-12);
  EXPECT_NEAR(sobolev_norm(g, fft, u, 0), l2_norm(g, u), 1e-14);
}

TEST(Spectral, ContinuousFourierTransform) {
  const GridSpec g{30.0, 1024};
  FFT fft(g.n);
  const Field u = sample(g, [](double x) { return cplx(std::exp(-0.5 * (x - 1.0) * (x - 1.0))); });
  const Field hat = continuous_ft(g, fft, u);
  for (int k : {0, 3, 17, 1000}) {
    const double xi = g.xi(k);
    const cplx exact = std::exp(-0.5 * xi * xi) * std::polar(1.0, -xi);
    EXPECT_LT(std::abs(hat[k] - exact), 1e-13) << k;
  }
  EXPECT_LT(std::abs(continuous_ft_at(g, u, 0.731) - std::exp(-0.5 * 0.731 * 0.731) * std::polar(1.0, -0.731)), 1e-13);
}

TEST(FreeFlow, GaussianClosedForm) {
  const GridSpec g{100.0, 2048};
  FFT fft(g.n);
  const Field u0 = sample(g, [](double x) { return free_gaussian(0.0, x); });
  const Field u = free_propagate(g, fft, u0, 3.0);
  EXPECT_LT(max_gap(u, sample(g, [](double x) { return free_gaussian(3.0, x); })), 1e-13);
}

TEST(Solver, FlatMatchesFreeFlow) {
  const GridSpec g{100.0, 2048};
  SolverConfig cfg;
  cfg.dt = 0.05;
  const Solver s(g, cfg, Nonlinearity::free());
  FieldState st{0.0, sample(g, [](double x) { return 0.1 * free_gaussian(0.0, x); })};
  const auto out = s.evolve(st, 3.0);
  EXPECT_DOUBLE_EQ(out.t, 3.0);
  EXPECT_LT(max_gap(out.z, sample(g, [](double x) { return 0.1 * free_gaussian(3.0, x); })), 1e-13);
}

TEST(Solver, SinkCadence) {
  const GridSpec g{50.0, 512};
  SolverConfig cfg;
  cfg.dt = 0.1;
  cfg.diag_stride = 3;
  const Solver s(g, cfg, Nonlinearity::free());
  std::vector<double> ts;
  s.evolve(FieldState{0.0, Field(g.n, cplx(0.0))}, 1.0, [&](const FieldState& f) { ts.push_back(f.t); });
  ASSERT_EQ(ts.size(), 5u);
  EXPECT_DOUBLE_EQ(ts.front(), 0.0);
  EXPECT_NEAR(ts[1], 0.3, 1e-12);
  EXPECT_DOUBLE_EQ(ts.back(), 1.0);
}

namespace {

Field sphere_run(double dt, Integrator integ) {
  const GridSpec g{32.0, 512};
  SolverConfig cfg;
  cfg.dt = dt;
  cfg.integrator = integ;
  const Solver s(g, cfg, Nonlinearity::full(geometry::make_metric("sphere")));
  InitialData id;
  id.epsilon = 0.2;
  return s.evolve(id.sample(g), 1.0).z;
}

double order(Integrator integ, double dt) {
  const Field ref = sphere_run(dt / 16.0, integ);
  const double e1 = max_gap(sphere_run(dt, integ), ref);
  const double e2 = max_gap(sphere_run(dt / 2.0, integ), ref);
  return std::log2(e1 / e2);
}

}  // namespace

TEST(Solver, IFRK4IsFourthOrder) { EXPECT_NEAR(order(Integrator::IFRK4, 0.05), 4.0, 0.3); }

TEST(Solver, StrangIsSecondOrder) { EXPECT_NEAR(order(Integrator::Strang, 0.02), 2.0, 0.2); }

TEST(Solver, Reversible) {
  const GridSpec g{32.0, 512};
  SolverConfig cfg;
  cfg.dt = 1e-3;
  const Solver s(g, cfg, Nonlinearity::full(geometry::make_metric("sphere")));
  InitialData id;
  id.epsilon = 0.1;
  const auto s0 = id.sample(g);
  const auto back = s.evolve(s.evolve(s0, 0.5), 0.0);
  EXPECT_LT(max_gap(back.z, s0.z) / sup_norm(s0.z), 1e-11);
}

TEST(Solver, ChartExitAborts) {
  const GridSpec g{32.0, 512};
  SolverConfig cfg;
  cfg.chart_radius = 0.05;
  const Solver s(g, cfg, Nonlinearity::full(geometry::make_metric("sphere")));
  InitialData id;
  id.epsilon = 0.1;
  try {
    s.evolve(id.sample(g), 1.0);
    FAIL() << "no abort";
  } catch (const EvolutionError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ChartExit);
    EXPECT_TRUE(e.is_numeric_abort());
  }
}

TEST(Solver, BoundaryMassAborts) {
  const GridSpec g{20.0, 512};
  SolverConfig cfg;
  cfg.dt = 0.05;
  cfg.diag_stride = 1;
  const Solver s(g, cfg, Nonlinearity::free());
  InitialData id;
  id.epsilon = 0.01;
  id.velocity = 2.0;
  try {
    s.evolve(id.sample(g), 10.0);
    FAIL() << "no abort";
  } catch (const EvolutionError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BoundaryMass);
    EXPECT_GT(e.time(), 0.0);
  }
}

TEST(Solver, BoundaryMassRatio) {
  const GridSpec g{10.0, 256};
  Field z(g.n, cplx(0.0));
  z[0] = 1.0;
  z[g.n / 2] = 1.0;
  EXPECT_DOUBLE_EQ(boundary_mass_ratio(g, z), 0.5);
  EXPECT_DOUBLE_EQ(boundary_mass_ratio(g, Field(g.n, cplx(0.0))), 0.0);
}

TEST(Solver, InvalidConfig) {
  SolverConfig cfg;
  cfg.dt = 0.0;
  EXPECT_THROW(Solver(GridSpec{}, cfg, Nonlinearity::free()), Error);
  cfg.dt = 0.01;
  cfg.dealias_fraction = 0.9;
  EXPECT_THROW(Solver(GridSpec{}, cfg, Nonlinearity::free()), Error);
}

TEST(Nonlinearity, TruncatedMatchesFullToThirdOrder) {
  const auto metric = geometry::make_metric("sphere");
  const auto nf = geometry::normal_form(geometry::log_metric_jet(metric));
  const auto full = Nonlinearity::full(metric);
  const auto trunc = Nonlinearity::truncated(nf.c);
  const cplx dir = std::polar(1.0, 0.7);
  const double e1 = std::abs(full.G(1e-2 * dir) - trunc.G(1e-2 * dir));
  const double e2 = std::abs(full.G(2e-2 * dir) - trunc.G(2e-2 * dir));
  EXPECT_NEAR(std::log2(e2 / e1), 3.0, 0.15);
}

TEST(Nonlinearity, ReducedZeroFlag) {
  EXPECT_TRUE(Nonlinearity::reduced(geometry::Nus{}).vanishes);
  geometry::Nus nu;
  nu.nu3 = cplx(0.5, 0.3);
  EXPECT_FALSE(Nonlinearity::reduced(nu).vanishes);
}

TEST(InitialData, Families) {
  InitialData id;
  id.epsilon = 0.3;
  EXPECT_DOUBLE_EQ(id(0.0).real(), 0.3);
  id.kind = ProfileKind::Sech;
  EXPECT_NEAR(id(1.0).real(), 0.3 / std::cosh(1.0), 1e-15);
  id.kind = ProfileKind::GaussianPoly;
  EXPECT_NEAR(id(-1.0).real(), 0.0, 1e-15);
  id.kind = ProfileKind::Gaussian;
  id.velocity = 1.5;
  EXPECT_NEAR(std::arg(id(1.0)), 1.5, 1e-15);
}
