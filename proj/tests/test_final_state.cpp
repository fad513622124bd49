#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "smflow/catalog.hpp"
#include "smflow/final_state.hpp"
#include "smflow/quadrature.hpp"

using namespace smflow;
using namespace smflow::final_state;

TEST(Quadrature, ClosedForms) {
  EXPECT_NEAR(quadrature::integrate([](double x) { return cplx(std::exp(-x * x)); }, -10.0, 10.0).real(),
              std::sqrt(std::numbers::pi), 1e-12);
  EXPECT_NEAR(quadrature::integrate([](double x) { return cplx(x * x * x, x); }, 0.0, 2.0).real(), 4.0, 1e-13);
  EXPECT_NEAR(quadrature::integrate([](double x) { return cplx(x * x * x, x); }, 0.0, 2.0).imag(), 2.0, 1e-13);
  EXPECT_NEAR(quadrature::integrate([](double x) { return cplx(std::cos(x)); }, 1.0, 0.0).real(), -std::sin(1.0),
              1e-13);
  EXPECT_EQ(quadrature::integrate([](double) { return cplx(1.0); }, 3.0, 3.0), cplx(0.0));
}

TEST(Quadrature, FailureReported) {
  const auto f = [](double x) { return cplx(1.0 / std::sqrt(std::abs(x - 0.3))); };
  EXPECT_THROW(quadrature::integrate(f, 0.0, 1.0, 1e-14, 4), Error);
}

TEST(Psi, Parsing) {
  const Psi g = parse_psi("gaussian:2,0.5");
  EXPECT_DOUBLE_EQ(g(0.0).real(), 0.5);
  EXPECT_NEAR(g(2.0).real(), 0.5 * std::exp(-0.5), 1e-15);
  EXPECT_EQ(g(1e3), cplx(0.0));
  EXPECT_EQ(parse_psi("zero")(0.0), cplx(0.0));
  EXPECT_THROW(parse_psi("gaussian:1"), Error);
  EXPECT_THROW(parse_psi("gaussian:-1,1"), Error);
  EXPECT_THROW(parse_psi("sech:1,1"), Error);
  EXPECT_THROW(parse_psi("file:/nonexistent/psi.txt"), Error);
}

TEST(Psi, FromFile) {
  const auto path = std::filesystem::temp_directory_path() / "smflow_psi_test.txt";
  {
    std::ofstream out(path);
    out << "# y re im\n";
    for (int i = -20; i <= 20; ++i) out << 0.25 * i << ", " << 1.0 - 0.01 * i * i << " 0.5\n";
  }
  const Psi p = parse_psi("file:" + path.string());
  EXPECT_NEAR(p(0.125).real(), 1.0 - 0.01 * 0.25, 1e-12);
  EXPECT_NEAR(p(0.125).imag(), 0.5, 1e-15);
  EXPECT_EQ(p(6.0), cplx(0.0));
  {
    std::ofstream out(path);
    out << "0 1\n1 1\n0.5 1\n2 1\n";
  }
  EXPECT_THROW(parse_psi("file:" + path.string()), Error);
  std::filesystem::remove(path);
}

TEST(Profile, ConventionExampleForV2) {
  // nu2 = 8i, psi(0) real: printed gives v2(1, 0) = -psi(0)^4, balanced the opposite sign
  const Psi psi = Psi::gaussian(1.0, 0.7);
  ProfileOptions printed;
  printed.convention = Convention::Printed;
  const FinalStateProfile p(psi, 0.0, cplx(0.0, 8.0), 0.0, printed);
  const FinalStateProfile b(psi, 0.0, cplx(0.0, 8.0), 0.0);
  EXPECT_NEAR(std::abs(p.v2(1.0, 0.0) + std::pow(0.7, 4)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b.v2(1.0, 0.0) - std::pow(0.7, 4)), 0.0, 1e-15);
}

TEST(Profile, ConstantPsiClosedForm) {
  // psi = 1: I(y) = -(i nu3 / 12) y^3, so Qt(y) = -(i nu3 / 12) y^2
  const cplx nu3(0.5, 0.3);
  const FinalStateProfile p(Psi::constant(1.0, 4.0), -2.0, 2.0 * std::conj(nu3), nu3);
  for (double y : {-3.0, -0.5, 1e-4, 0.2, 1.7, 3.9}) {
    const cplx exact = -cplx(0.0, 1.0) * nu3 / 12.0 * y * y;
    EXPECT_LT(std::abs(p.Qtilde(y) - exact), 1e-12) << y;
    EXPECT_LT(std::abs(p.Qtilde_direct(y) - exact), 1e-12) << y;
    EXPECT_LT(p.ode_residual(y), 1e-7) << y;
  }
  // P = -(i c / 4) conj(Qt) psi^2
  EXPECT_LT(std::abs(p.P(2.0) - (cplx(0.0, 0.5) * std::conj(-cplx(0.0, 1.0) * nu3 / 3.0))), 1e-12);
}

TEST(Profile, ModulusIdentities) {
  const cplx nu3(0.2, -0.4);
  const FinalStateProfile p(Psi::gaussian(1.0, 0.3), -2.0, 2.0 * std::conj(nu3), nu3);
  for (double t : {20.0, 150.0}) {
    for (double x : {0.0, 5.0, -31.0}) {
      const double y = x / (2.0 * t);
      const double a = std::abs(p.psi()(y));
      EXPECT_NEAR(std::abs(p.v1(t, x)), a / std::sqrt(2.0 * t), 1e-15);
      EXPECT_NEAR(std::abs(p.v2(t, x)), std::abs(p.nu2()) * std::pow(a, 4) / (8.0 * t * t), 1e-17);
      EXPECT_NEAR(std::abs(p.v3(t, x)), std::abs(p.Qtilde(y)) / t, 1e-17);
      EXPECT_NEAR(std::abs(p.v4(t, x)), std::abs(p.P(y)) / (t * t), 1e-17);
    }
  }
}

TEST(Profile, AblationAndZeroNu) {
  const FinalStateProfile p(Psi::gaussian(1.0, 0.05), -2.0, 0.0, 0.0);
  EXPECT_EQ(p.v(30.0, 4.0), p.v1(30.0, 4.0));
  const cplx nu3(0.5, 0.3);
  const FinalStateProfile q(Psi::gaussian(1.0, 0.5), -2.0, 2.0 * std::conj(nu3), nu3);
  EXPECT_EQ(q.v(30.0, 4.0, {false, false, false}), q.v1(30.0, 4.0));
  EXPECT_NE(q.v(30.0, 4.0), q.v1(30.0, 4.0));
}

TEST(Profile, EpsStarEnforced) {
  ProfileOptions o;
  o.eps_star = 1e-3;
  EXPECT_THROW(FinalStateProfile(Psi::gaussian(1.0, 0.05), -2.0, 0.0, 0.0, o), Error);
  o.eps_star = 1e3;
  EXPECT_NO_THROW(FinalStateProfile(Psi::gaussian(1.0, 0.05), -2.0, 0.0, 0.0, o));
}

TEST(Profile, WeightedNormScalesLinearly) {
  const double a = weighted_norm(Psi::gaussian(1.0, 0.05)).value;
  const double b = weighted_norm(Psi::gaussian(1.0, 0.10)).value;
  EXPECT_GT(a, 0.0);
  EXPECT_NEAR(b / a, 2.0, 1e-10);
  EXPECT_EQ(weighted_norm(Psi::zero()).value, 0.0);
}

TEST(MTheta, Condition) {
  const auto r = m_theta_condition(8, 0.75);
  EXPECT_NEAR(r.lhs, -0.75 + 9.0 * 1.75 / 16.0 + 0.5, 1e-15);
  EXPECT_FALSE(r.holds);
  EXPECT_TRUE(m_theta_condition(100, 1.0).holds);
}

TEST(Residual, SphereV1OnlyRate) {
  // nu2 = nu3 = 0: the four-term profile reduces to v1 and the residual decays like t^-5/2
  const FinalStateProfile p(Psi::gaussian(1.0, 0.05), -2.0, 0.0, 0.0);
  const auto s = residual_series(p, 20.0, 200.0, 6, {}, false);
  EXPECT_NEAR(s.fit.exponent, -2.5, 0.1);
}

TEST(WaveOperator, RejectsShortHorizon) {
  const FinalStateProfile p(Psi::gaussian(1.0, 0.05), -2.0, 0.0, 0.0);
  WaveOperatorConfig cfg;
  cfg.N = 20.0;
  EXPECT_THROW(wave_operator_experiment(p, geometry::make_metric("sphere"), cfg), Error);
}
