#pragma once

#include <string>
#include <vector>

#include "mesofcs/config.hpp"

namespace mesofcs {

enum class ValidationLevel { quick, full };

struct ValidationOptions {
  Index threads = 1;
  bool inject_counting_sign_error = false;  // mutation test for the oracle checks
};

struct CheckResult {
  std::string id;  // "criterion-4", "quick-leads", ...
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  Json data;
};

/// quick: leads convergence trend plus Gaussian-vs-oracle on the cosine
/// 3-mode instance. full: acceptance criteria 1-13.
std::vector<std::string> checks_for(ValidationLevel level);

/// Runs one named check; unknown ids throw ConfigError.
CheckResult run_check(const std::string& id, const ValidationOptions& options = {});

struct ValidationReport {
  std::vector<CheckResult> results;

  bool passed() const;
  Json to_json() const;
  std::string text() const;
};

ValidationReport validate(ValidationLevel level, const ValidationOptions& options = {});

/// One-line form "criterion-4 PASS (12.3 s) title: detail".
std::string format_line(const CheckResult& r);

}  // namespace mesofcs
