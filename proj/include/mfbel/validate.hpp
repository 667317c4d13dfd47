#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mfbel {

enum class ValidationLevel { fast, full };

[[nodiscard]] ValidationLevel parse_validation_level(const std::string& name);
[[nodiscard]] const char* to_string(ValidationLevel level) noexcept;

struct ValidationOptions {
  ValidationLevel level = ValidationLevel::fast;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// "model.partial" (e.g. "mean_vol.d1_sigma"): that partial is scaled by
  /// 1.01 in every model built for the run. Empty disables injection.
  std::string inject_fault;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  [[nodiscard]] bool passed() const noexcept;
  [[nodiscard]] std::vector<std::string> failed_names() const;
};

/// Runs the invariant suites of every module. Each finished check is echoed to
/// `progress` when it is non-null.
[[nodiscard]] ValidationReport run_validation(const ValidationOptions& options, std::ostream* progress = nullptr);

}  // namespace mfbel
