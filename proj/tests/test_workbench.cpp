#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "smflow/experiments.hpp"

using namespace smflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("smflow_wb_" + name);
  fs::remove_all(dir);
  return dir;
}

config::ExperimentConfig small(const std::string& experiment, const fs::path& out) {
  auto c = config::parse_string("experiment = " + experiment +
                                "\nhalf_length = 64\nn = 1024\ndt = 0.02\nt_end = 2\ndiag_stride = 5\n");
  config::set_value(c, "output", out.string());
  return c;
}

}  // namespace

TEST(Workbench, ModelSelection) {
  auto c = config::parse_string("metric = sphere\nmodel = reduced\nnu3 = 0.5,0.3\n");
  const auto m = workbench::build_model(c);
  EXPECT_EQ(m.nl.label, "reduced");
  EXPECT_EQ(m.nf.nu.nu3, cplx(0.5, 0.3));
  EXPECT_NEAR(m.nf.c_mod, -2.0, 1e-12);
  config::set_value(c, "model", "exact");
  EXPECT_THROW(workbench::build_model(c), Error);
}

TEST(Workbench, FlatSimulationMatchesFreeFlow) {
  const auto dir = scratch("flat");
  auto c = small("simulate", dir);
  config::set_value(c, "metric", "flat");
  const auto rep = experiments::run(c);
  EXPECT_TRUE(rep.passed());
  EXPECT_FALSE(rep.numeric_abort);
  int a4 = 0, a9 = 0;
  for (const auto& ch : rep.checks) {
    a4 += ch.id == "A4";
    a9 += ch.id == "A9";
    EXPECT_TRUE(ch.passed) << ch.name << ": " << ch.detail;
  }
  EXPECT_EQ(a4, 1);
  EXPECT_EQ(a9, 2);
  for (const char* f : {"series.csv", "frequencies.csv", "final.ckpt", "report.json"})
    EXPECT_TRUE(fs::exists(dir / "simulate" / f)) << f;
  std::istringstream csv(slurp(dir / "simulate" / "series.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("t,", 0), 0u);
  fs::remove_all(dir);
}

TEST(Workbench, ReportIsDeterministic) {
  const auto dir = scratch("det");
  auto c = small("simulate", dir);
  experiments::run(c);
  const std::string a = slurp(dir / "simulate" / "report.json");
  const std::string sa = slurp(dir / "simulate" / "series.csv");
  experiments::run(c);
  EXPECT_EQ(slurp(dir / "simulate" / "report.json"), a);
  EXPECT_EQ(slurp(dir / "simulate" / "series.csv"), sa);
  const auto j = workbench::json::parse(a);
  for (const char* key : {"build_id", "config", "defaults_filled", "summary", "checks", "artifacts", "passed"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["config"]["n"], "1024");
  fs::remove_all(dir);
}

TEST(Workbench, RestartContinuesRun) {
  const auto dir = scratch("restart");
  auto c = small("simulate", dir / "a");
  config::set_value(c, "epsilon", "0.1");
  config::set_value(c, "t_end", "1");
  experiments::run(c);
  auto r = c;
  config::set_value(r, "restart", (dir / "a" / "simulate" / "final.ckpt").string());
  config::set_value(r, "t_end", "2");
  config::set_value(r, "output", (dir / "b").string());
  experiments::run(r);
  auto d = c;
  config::set_value(d, "t_end", "2");
  config::set_value(d, "output", (dir / "c").string());
  experiments::run(d);
  const auto x = checkpoint::load(dir / "b" / "simulate" / "final.ckpt");
  const auto y = checkpoint::load(dir / "c" / "simulate" / "final.ckpt");
  EXPECT_DOUBLE_EQ(x.state.t, 2.0);
  double gap = 0.0;
  for (std::size_t i = 0; i < x.state.z.size(); ++i) gap = std::max(gap, std::abs(x.state.z[i] - y.state.z[i]));
  EXPECT_LT(gap, 1e-14);
  fs::remove_all(dir);
}

TEST(Workbench, NumericAbortKeepsPartialSeries) {
  const auto dir = scratch("abort");
  auto c = small("simulate", dir);
  config::set_value(c, "metric", "flat");
  config::set_value(c, "velocity", "1");
  config::set_value(c, "t_end", "40");
  const auto rep = experiments::run(c);
  EXPECT_TRUE(rep.numeric_abort);
  EXPECT_FALSE(rep.doc["passed"].get<bool>());
  EXPECT_TRUE(fs::exists(dir / "simulate" / "series.csv"));
  EXPECT_FALSE(fs::exists(dir / "simulate" / "final.ckpt"));
  fs::remove_all(dir);
}

TEST(Workbench, AnalyzeMetricChecks) {
  const auto dir = scratch("analyze");
  auto c = config::parse_string("experiment = analyze-metric\nmetric = hyperbolic\n");
  config::set_value(c, "output", dir.string());
  const auto rep = experiments::run(c);
  EXPECT_TRUE(rep.passed());
  const auto j = workbench::json::parse(slurp(dir / "analyze-metric" / "metric.json"));
  EXPECT_NEAR(j["K"].get<double>(), -1.0, 1e-8);
  fs::remove_all(dir);
}

TEST(Workbench, ScanVanishingCsv) {
  const auto dir = scratch("scan");
  auto c = config::parse_string("experiment = scan-vanishing\nmetric = remark11:0.5,0,0,0.25\n");
  config::set_value(c, "output", dir.string());
  experiments::run(c);
  std::istringstream csv(slurp(dir / "scan-vanishing" / "zeros.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "re,im,residual,K");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 2);
  fs::remove_all(dir);
}

TEST(Workbench, FinalStateResidualOnly) {
  const auto dir = scratch("fs");
  auto c = config::parse_string("experiment = final-state\nN = 0\nresidual_samples = 4\nablate = v2\n");
  config::set_value(c, "output", dir.string());
  const auto rep = experiments::run(c);
  EXPECT_TRUE(fs::exists(dir / "final-state" / "residual.csv"));
  EXPECT_FALSE(fs::exists(dir / "final-state" / "wave_operator.csv"));
  EXPECT_EQ(rep.checks.size(), 2u);
  EXPECT_EQ(rep.doc["summary"]["convention"], "balanced");
  fs::remove_all(dir);
}

TEST(Workbench, ErrorsKeepKindAndNameExperiment) {
  auto c = config::parse_string("experiment = final-state\npsi = file:/nonexistent/psi\nN = 0\n");
  config::set_value(c, "output", scratch("err").string());
  try {
    experiments::run(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
    EXPECT_NE(std::string(e.what()).find("final-state"), std::string::npos);
  }
}

TEST(Workbench, CauchyNoiseFloor) {
  workbench::DiagnosticSeries s;
  s.sigmas = {1.0, 2.0};
  for (double t : {1.0, 2.0, 4.0, 8.0}) {
    workbench::FrequencyRow r;
    r.t = t;
    r.fhat = {cplx(1.0 + 1.0 / t), cplx(1.0 + 1e-13 * std::sin(t))};
    r.Fhat = r.fhat;
    r.phi = {0.0, 0.0};
    s.freq.push_back(r);
    workbench::DiagnosticRow d;
    d.t = t;
    s.rows.push_back(d);
  }
  const auto rep = workbench::cauchy_analysis(s, {1.0, 2.0, 4.0, 8.0}, false);
  EXPECT_EQ(rep.count, 2);
}
