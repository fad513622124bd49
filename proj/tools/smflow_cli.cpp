#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smflow/experiments.hpp"

namespace {

using smflow::Error;
using smflow::ErrorKind;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kNumeric = 3;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::Io:
    case ErrorKind::NonPositiveMetric:
    case ErrorKind::DegenerateMap:
      return kUsage;
    default:
      return kNumeric;
  }
}

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string output;
  std::string metric;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "key=value configuration file")->check(CLI::ExistingFile);
  sub->add_option("--set", c.sets, "override one key, KEY=VALUE (repeatable)");
  sub->add_option("--output", c.output, "output directory");
  sub->add_option("--metric", c.metric, "metric name");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral workbench for Schroedinger map flows"};
  app.set_version_flag("--version", smflow::workbench::build_id());
  app.require_subcommand(1);

  Common common;
  std::string psi, ablate, N, N0;
  bool quick = false;

  for (const char* name : {"analyze-metric", "simulate", "final-state", "rigidity-probe", "scan-vanishing",
                           "reproduce-all"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub, common);
    if (std::string(name) == "final-state") {
      sub->add_option("--psi", psi, "final-state profile: gaussian:sigma,amp | file:path | zero");
      sub->add_option("--N", N, "backward horizon (0 skips the wave-operator run)");
      sub->add_option("--N0", N0, "end of the backward run");
      sub->add_option("--ablate", ablate, "comma list of v2,v3,v4,tail");
    }
    if (std::string(name) == "reproduce-all") sub->add_flag("--quick", quick, "reduced-cost acceptance suite");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    smflow::config::ExperimentConfig cfg;
    if (!common.config.empty()) cfg = smflow::config::load(common.config);
    for (const auto& s : common.sets) smflow::config::apply_assignment(cfg, s);
    smflow::config::set_value(cfg, "experiment", experiment);
    if (!common.output.empty()) smflow::config::set_value(cfg, "output", common.output);
    if (!common.metric.empty()) smflow::config::set_value(cfg, "metric", common.metric);
    if (!psi.empty()) smflow::config::set_value(cfg, "psi", psi);
    if (!N.empty()) smflow::config::set_value(cfg, "N", N);
    if (!N0.empty()) smflow::config::set_value(cfg, "N0", N0);
    if (!ablate.empty()) smflow::config::set_value(cfg, "ablate", ablate);
    if (quick) smflow::config::set_value(cfg, "quick", "true");

    const auto rep = smflow::experiments::run(cfg);
    for (const auto& c : rep.checks) {
      const char* tag = c.informational ? "info" : (c.passed ? "pass" : "FAIL");
      std::printf("%-4s %-5s %s: %s\n", c.id.c_str(), tag, c.name.c_str(), c.detail.c_str());
    }
    for (const auto& a : rep.artifacts) std::printf("wrote %s\n", a.c_str());
    if (rep.numeric_abort) {
      std::fprintf(stderr, "%s: numeric abort: %s\n", experiment.c_str(),
                   rep.doc["summary"].value("aborted", std::string("unknown")).c_str());
      return kNumeric;
    }
    return rep.passed() ? kPass : kFail;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
}
