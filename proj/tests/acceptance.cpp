// One PASS/FAIL line per acceptance criterion, then the individual checks.

#include <cstdio>
#include <cstring>

#include "smflow/acceptance.hpp"

int main(int argc, char** argv) {
  smflow::acceptance::Options opt;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) opt.quick = true;
  }
  opt.threads = smflow::acceptance::thread_budget();
  const auto results = smflow::acceptance::run_suite(opt);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s %s (%.1f s)\n", r.id.c_str(), r.passed() ? "PASS" : "FAIL", r.seconds);
    ok = ok && r.passed();
  }
  std::printf("\n");
  for (const auto& r : results) {
    for (const auto& c : r.checks) {
      const char* tag = c.informational ? "info" : (c.passed ? "pass" : "FAIL");
      std::printf("  %s [%s] %s: %s\n", r.id.c_str(), tag, c.name.c_str(), c.detail.c_str());
    }
  }
  std::fflush(stdout);
  return ok ? 0 : 1;
}
