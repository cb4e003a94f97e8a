// Acceptance runner: one PASS/FAIL line per criterion. Tolerances are pinned
// in src/validation.cpp.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mesofcs/validation.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria 1-13"};
  std::vector<int> criteria;
  mesofcs::Index threads = 1;
  app.add_option("--criterion", criteria, "criterion numbers (default: all)")
      ->check(CLI::Range(1, 13));
  app.add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  if (criteria.empty())
    for (int k = 1; k <= 13; ++k) criteria.push_back(k);

  mesofcs::ValidationOptions options;
  options.threads = threads;
  bool ok = true;
  for (int k : criteria) {
    const auto r = mesofcs::run_check("criterion-" + std::to_string(k), options);
    std::printf("%s\n", mesofcs::format_line(r).c_str());
    std::fflush(stdout);
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}
