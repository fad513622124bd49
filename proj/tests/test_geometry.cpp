#include <gtest/gtest.h>

#include <random>

#include "smflow/catalog.hpp"
#include "smflow/geometry.hpp"
#include "smflow/vanishing.hpp"

using namespace smflow;
using namespace smflow::geometry;

namespace {

MetricJet numeric_only(const std::string& name, int order = 4) {
  MetricSpec spec = make_metric(name);
  spec.analytic_jet.reset();
  return log_metric_jet(spec, order);
}

MetricSpec strip_closed_forms(MetricSpec spec) {
  spec.analytic_jet.reset();
  spec.log_h_z = nullptr;
  return spec;
}

}  // namespace

TEST(Jet, SphereFromDifferences) {
  const MetricJet jet = numeric_only("sphere");
  EXPECT_NEAR(std::abs(jet(1, 0)), 0.0, 1e-10);
  EXPECT_NEAR(jet(1, 1).real(), -2.0, 1e-9);
  EXPECT_NEAR(std::abs(jet(2, 1)), 0.0, 1e-10);
  EXPECT_NEAR(jet(2, 2).real(), 1.0, 1e-6);
  EXPECT_LT(jet.reality_defect(), 1e-10);
}

TEST(Jet, SphereFromLogOfH) {
  const MetricJet jet = log_metric_jet(strip_closed_forms(make_metric("sphere")), 4);
  EXPECT_NEAR(jet(1, 1).real(), -2.0, 1e-8);
  EXPECT_NEAR(std::abs(jet(2, 1)), 0.0, 1e-8);
}

TEST(Jet, FlatIsZero) {
  const MetricJet jet = numeric_only("flat");
  for (int j = 0; j <= 4; ++j)
    for (int k = 0; j + k <= 4; ++k) EXPECT_EQ(jet(j, k), cplx(0.0));
}

TEST(Jet, ExpLinear) {
  const MetricJet jet = numeric_only("exp-linear");
  EXPECT_NEAR(std::abs(jet(1, 0) - 1.0), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(jet(0, 1) - 1.0), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(jet(1, 1)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(jet(2, 0)), 0.0, 1e-10);
}

TEST(Jet, AnalyticReturnedVerbatim) {
  const MetricSpec spec = make_metric("hyperbolic");
  const MetricJet jet = log_metric_jet(spec);
  EXPECT_EQ(jet(1, 1), cplx(2.0));
  EXPECT_DOUBLE_EQ(jet.h0, 4.0);
}

TEST(Jet, AnalyticMismatchRejected) {
  MetricSpec spec = make_metric("sphere");
  spec.analytic_jet->at(1, 1) = -2.5;
  EXPECT_THROW(log_metric_jet(spec), Error);
}

TEST(Jet, NonPositiveMetricRejected) {
  MetricSpec spec;
  spec.name = "bad";
  spec.h = [](cplx z) { return z.real(); };
  try {
    log_metric_jet(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveMetric);
  }
}

TEST(Curvature, CatalogValues) {
  EXPECT_NEAR(curvature_at(log_metric_jet(make_metric("sphere"))), 4.0, 1e-12);
  EXPECT_NEAR(curvature_at(log_metric_jet(make_metric("hyperbolic"))), -1.0, 1e-12);
  EXPECT_NEAR(curvature_at(log_metric_jet(make_metric("flat"))), 0.0, 1e-12);
  EXPECT_NEAR(curvature_at(numeric_only("hyperbolic")), -1.0, 1e-9);
}

TEST(Curvature, NonRealLambda11) {
  MetricJet jet;
  jet.at(1, 1) = cplx(1.0, 1e-3);
  EXPECT_THROW(curvature_at(jet), Error);
}

TEST(Residual, CatalogOracles) {
  EXPECT_LT(std::abs(intrinsic_vanishing_residual(numeric_only("sphere"))), 1e-10);
  EXPECT_LT(std::abs(intrinsic_vanishing_residual(numeric_only("hyperbolic"))), 1e-10);
  for (double a : {0.5, -1.0, 2.0}) {
    const cplx r = intrinsic_vanishing_residual(numeric_only("nonvanishing-a:" + std::to_string(a)));
    EXPECT_NEAR(std::abs(r - a), 0.0, 1e-9);
  }
  const cplx r = intrinsic_vanishing_residual(numeric_only("c5-nonzero"));
  EXPECT_NEAR(std::abs(r + 2.0), 0.0, 1e-9);
}

TEST(Residual, Remark11AtOne) {
  const MetricSpec spec = make_metric("remark11:0.5,0,0,0.25");
  EXPECT_LT(std::abs(vanishing_residual_at(spec, 1.0)), 1e-9);
  EXPECT_LT(std::abs(vanishing_residual_at(spec, 0.0)), 1e-10);
  const MetricSpec other = make_metric("remark11:0.3,0.1,0.1,0.1");
  EXPECT_LT(std::abs(vanishing_residual_at(other, 1.0)), 1e-9);
}

TEST(Coefficients, SphereAndExpLinear) {
  const auto s = extract_c_coefficients(log_metric_jet(make_metric("sphere")));
  const std::array<cplx, 6> sphere{0.0, -2.0, 0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(std::abs(s[i] - sphere[i]), 0.0, 1e-12);
  const auto e = extract_c_coefficients(numeric_only("exp-linear"));
  const std::array<cplx, 6> explin{1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(std::abs(e[i] - explin[i]), 0.0, 1e-10);
}

TEST(Gamma, Oracles) {
  const Gammas zero = solve_gamma(0.0, 0.0, 0.0);
  EXPECT_EQ(zero.g1, cplx(0.0));
  EXPECT_EQ(zero.g3, cplx(0.0));
  const Gammas g = solve_gamma(1.0, 0.0, 0.0);
  EXPECT_NEAR(std::abs(g.g1 + 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(g.g2 - 1.0 / 6.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(g.g3 + 1.0 / 24.0), 0.0, 1e-15);
}

TEST(Gamma, RandomBackSubstitution) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const cplx c0(u(rng), u(rng)), c2(u(rng), u(rng)), c3(u(rng), u(rng));
    const auto res = gamma_residuals(solve_gamma(c0, c2, c3), c0, c2, c3);
    for (const auto& r : res) EXPECT_LT(std::abs(r), 1e-12);
  }
}

TEST(Nu, Oracles) {
  const auto sphere = normal_form(log_metric_jet(make_metric("sphere")));
  EXPECT_NEAR(std::abs(sphere.nu.nu1 + 2.0), 0.0, 1e-12);
  EXPECT_LT(std::abs(sphere.nu.nu2), 1e-12);
  EXPECT_LT(std::abs(sphere.nu.nu3), 1e-12);
  for (double a : {0.5, 3.0}) {
    const auto nf = normal_form(numeric_only("nonvanishing-a:" + std::to_string(a)));
    EXPECT_NEAR(std::abs(nf.nu.nu1 - a), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(nf.nu.nu2 - a), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(nf.nu.nu3 - a / 2), 0.0, 1e-9);
  }
  const auto c5 = normal_form(log_metric_jet(make_metric("c5-nonzero")));
  EXPECT_NEAR(std::abs(c5.nu.nu2 - 2.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(c5.nu.nu3 - 1.0), 0.0, 1e-12);
}

TEST(Transform, PolynomialOracle) {
  const Gammas g = solve_gamma(1.0, 0.0, 0.0);
  const cplx w = forward_transform(cplx(0.1), g);
  EXPECT_NEAR(w.real(), 0.1 - 0.005 + 1.0 / 6e3 - 1.0 / 24e4, 1e-15);
  const Gammas id{};
  EXPECT_EQ(forward_transform(cplx(0.2, 0.1), id), cplx(0.2, 0.1));
}

TEST(Transform, RoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  const Gammas g = solve_gamma(cplx(1.0, 0.5), cplx(-0.3, 0.2), cplx(0.7, -0.1));
  for (int i = 0; i < 1000; ++i) {
    const cplx z(u(rng), u(rng));
    EXPECT_LT(std::abs(inverse_transform(forward_transform(z, g), g) - z), 1e-12);
  }
}

TEST(Transform, NewtonDivergence) {
  const Gammas g{cplx(10.0), cplx(10.0), cplx(10.0)};
  EXPECT_THROW(inverse_transform(cplx(0.3), g, 1), Error);
}

TEST(Pushforward, IdentityAndScaling) {
  const auto sphere = log_metric_jet(make_metric("sphere"));
  HolomorphicMap scale;
  scale.a = {2.0, 0.0, 0.0, 0.0};
  const auto chk = holomorphic_pushforward_check(sphere, scale);
  EXPECT_LT(std::abs(chk.lhs), 1e-8);
  EXPECT_LT(std::abs(chk.rhs), 1e-14);
  const auto nv = log_metric_jet(make_metric("nonvanishing-a:0.5"));
  const auto id = holomorphic_pushforward_check(nv, HolomorphicMap{});
  EXPECT_LT(id.gap(), 1e-9);
}

TEST(Pushforward, QuadraticMap) {
  const auto nv = log_metric_jet(make_metric("nonvanishing-a:0.5"));
  HolomorphicMap f;
  f.a = {1.0, 1.0, 0.0, 0.0};
  const auto chk = holomorphic_pushforward_check(nv, f);
  EXPECT_NEAR(std::abs(chk.rhs - 0.5), 0.0, 1e-14);
  EXPECT_LT(chk.gap(), 1e-8);
}

TEST(Pushforward, DegenerateMap) {
  HolomorphicMap f;
  f.a = {0.0, 1.0, 0.0, 0.0};
  EXPECT_THROW(holomorphic_pushforward_check(MetricJet{}, f), Error);
}

TEST(Scan, SphereIdenticallyVanishing) {
  const auto scan = scan_vanishing_points(make_metric("sphere"), Region{-0.5, 0.5, -0.5, 0.5}, 5);
  EXPECT_TRUE(scan.identically_vanishing);
}

TEST(Scan, Remark11Zeros) {
  const auto scan = scan_vanishing_points(make_metric("remark11:0.5,0,0,0.25"), Region{-0.5, 1.5, -0.5, 0.5}, 21);
  EXPECT_FALSE(scan.identically_vanishing);
  bool found0 = false, found1 = false;
  for (const cplx z : scan.zeros) {
    if (std::abs(z) < 1e-6) found0 = true;
    if (std::abs(z - 1.0) < 1e-6) found1 = true;
  }
  EXPECT_TRUE(found0);
  EXPECT_TRUE(found1);
}

TEST(Scan, NonvanishingZeroSet) {
  const auto scan = scan_vanishing_points(make_metric("nonvanishing-a:2"), Region{-1, 1, -1, 1}, 11);
  ASSERT_EQ(scan.zeros.size(), 1u);
  EXPECT_LT(std::abs(scan.zeros[0] + 0.5), 1e-7);
}

TEST(Catalog, UnknownName) {
  try {
    make_metric("torus");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("torus"), std::string::npos);
  }
}

TEST(Catalog, Report) {
  const auto nf = normal_form(log_metric_jet(make_metric("sphere")));
  const auto j = metric_report("sphere", nf);
  EXPECT_DOUBLE_EQ(j["K"].get<double>(), 4.0);
  EXPECT_EQ(j["classification"], "intrinsic vanishing, K!=0 => modified-scattering regime");
  const auto e = normal_form(log_metric_jet(make_metric("exp-linear")));
  EXPECT_EQ(classify(e), "intrinsic vanishing, K=0 => scattering regime");
}
