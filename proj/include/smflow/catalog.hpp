#pragma once

// Named metrics addressable from the command line, and the metric report.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smflow/error.hpp"
#include "smflow/geometry.hpp"

namespace smflow::geometry {

namespace detail {

inline std::vector<double> parse_params(const std::string& name, const std::string& body, std::size_t expected) {
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "bad numeric parameter '" + item + "' in metric '" + name + "'");
    }
  }
  if (out.size() != expected) {
    throw Error(ErrorKind::ParseError, "metric '" + name + "' expects " + std::to_string(expected) + " parameters");
  }
  return out;
}

inline MetricSpec catalog_spec(std::string name, std::function<double(cplx)> h, std::function<cplx(cplx)> dlog,
                               MetricJet jet) {
  MetricSpec spec;
  spec.kind = MetricKind::CatalogEntry;
  spec.name = std::move(name);
  spec.h = std::move(h);
  spec.log_h_z = std::move(dlog);
  jet.h0 = std::exp(jet(0, 0).real());
  spec.analytic_jet = jet;
  return spec;
}

}  // namespace detail

inline const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {"sphere",           "hyperbolic",          "flat",
                                                 "exp-linear",       "remark11:c1,c2,c3,c4", "nonvanishing-a:a",
                                                 "c5-nonzero"};
  return names;
}

/// Resolves a catalog selector such as "sphere" or "remark11:0.5,0,0,0.25".
inline MetricSpec make_metric(const std::string& selector) {
  const auto colon = selector.find(':');
  const std::string head = selector.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : selector.substr(colon + 1);
  auto no_params = [&] {
    if (colon != std::string::npos) throw Error(ErrorKind::ParseError, "metric '" + head + "' takes no parameters");
  };
  MetricJet jet;
  if (head == "sphere") {
    no_params();
    jet.at(1, 1) = -2.0;
    jet.at(2, 2) = 1.0;
    return detail::catalog_spec(
        "sphere", [](cplx z) { return std::pow(1.0 + std::norm(z), -2.0); },
        [](cplx z) { return -2.0 * std::conj(z) / (1.0 + std::norm(z)); }, jet);
  }
  if (head == "hyperbolic") {
    no_params();
    jet.at(0, 0) = std::log(4.0);
    jet.at(1, 1) = 2.0;
    jet.at(2, 2) = 1.0;
    MetricSpec spec = detail::catalog_spec(
        "hyperbolic", [](cplx z) { return 4.0 * std::pow(1.0 - std::norm(z), -2.0); },
        [](cplx z) { return 2.0 * std::conj(z) / (1.0 - std::norm(z)); }, jet);
    return spec;
  }
  if (head == "flat") {
    no_params();
    return detail::catalog_spec("flat", [](cplx) { return 1.0; }, [](cplx) { return cplx(0.0); }, jet);
  }
  if (head == "exp-linear") {
    no_params();
    jet.at(1, 0) = jet.at(0, 1) = 1.0;
    return detail::catalog_spec(
        "exp-linear", [](cplx z) { return std::exp(2.0 * z.real()); }, [](cplx) { return cplx(1.0); }, jet);
  }
  if (head == "remark11") {
    const auto p = detail::parse_params(head, body, 4);
    const double c1 = p[0], c2 = p[1], c3 = p[2], c4 = p[3];
    jet.at(1, 0) = jet.at(0, 1) = c1;
    jet.at(2, 0) = jet.at(0, 2) = c2;
    jet.at(3, 0) = jet.at(0, 3) = c3;
    jet.at(2, 2) = c4;
    return detail::catalog_spec(
        selector,
        [=](cplx z) {
          const cplx z2 = z * z;
          return std::exp(2.0 * c1 * z.real() + 2.0 * c2 * z2.real() + 2.0 * c3 * (z2 * z).real() +
                          c4 * std::norm(z) * std::norm(z));
        },
        [=](cplx z) { return c1 + 2.0 * c2 * z + 3.0 * c3 * z * z + 2.0 * c4 * z * std::conj(z) * std::conj(z); },
        jet);
  }
  if (head == "nonvanishing-a") {
    const double a = detail::parse_params(head, body, 1)[0];
    jet.at(1, 0) = jet.at(0, 1) = 1.0;
    jet.at(1, 1) = a;
    return detail::catalog_spec(
        selector, [=](cplx z) { return std::exp(2.0 * z.real() + a * std::norm(z)); },
        [=](cplx z) { return 1.0 + a * std::conj(z); }, jet);
  }
  if (head == "c5-nonzero") {
    no_params();
    jet.at(2, 1) = jet.at(1, 2) = 1.0;
    return detail::catalog_spec(
        "c5-nonzero", [](cplx z) { return std::exp(2.0 * std::norm(z) * z.real()); },
        [](cplx z) { return 2.0 * std::norm(z) + std::conj(z) * std::conj(z); }, jet);
  }
  throw Error(ErrorKind::ParseError, "unknown metric '" + selector + "'");
}

inline std::string classify(const NormalFormCoefficients& nf, double vanish_tol = 1e-8, double k_tol = 1e-10) {
  if (std::abs(nf.vanishing_residual) >= vanish_tol) return "not an intrinsic vanishing point";
  if (std::abs(nf.K) > k_tol) return "intrinsic vanishing, K!=0 => modified-scattering regime";
  return "intrinsic vanishing, K=0 => scattering regime";
}

inline nlohmann::json to_json(cplx v) { return nlohmann::json::array({v.real(), v.imag()}); }

/// {metric, K, h0, c, gamma, nu, vanishing_residual, classification}; complex values as [re, im].
inline nlohmann::json metric_report(const std::string& name, const NormalFormCoefficients& nf) {
  nlohmann::json j;
  j["metric"] = name;
  j["K"] = nf.K;
  j["h0"] = nf.h0;
  j["c_mod"] = nf.c_mod;
  nlohmann::json c = nlohmann::json::array();
  for (const auto& v : nf.c.c) c.push_back(to_json(v));
  j["c"] = c;
  j["gamma"] = nlohmann::json::array({to_json(nf.gamma.g1), to_json(nf.gamma.g2), to_json(nf.gamma.g3)});
  j["nu"] = nlohmann::json::array({to_json(nf.nu.nu1), to_json(nf.nu.nu2), to_json(nf.nu.nu3)});
  j["vanishing_residual"] = to_json(nf.vanishing_residual);
  j["classification"] = classify(nf);
  return j;
}

}  // namespace smflow::geometry
