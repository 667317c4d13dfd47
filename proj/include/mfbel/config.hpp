#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mfbel/estimators.hpp"
#include "mfbel/model_spec.hpp"
#include "mfbel/models.hpp"

namespace mfbel {

/// One experiment as read from a config file. Every field has a default.
struct RunConfig {
  std::string model = "mean_vol";
  Parameters params{{"sigma", 0.8}, {"mu", 1.0}};
  PayoffKind payoff = PayoffKind::call;
  double strike = 2.0;
  double x0 = 1.0;
  double horizon = 1.0;
  std::size_t n_steps = 512;
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  std::vector<std::string> methods{"malliavin", "fd", "pathwise"};
  std::vector<double> h_list{0.1, 0.01};
  FdScheme fd_scheme = FdScheme::central;
  bool crn = true;
  CurveResolver resolver = CurveResolver::analytic;
  std::size_t n_particles = 100000;
  double particle_tol = 1e-6;
  std::size_t particle_max_iters = 50;
  bool log_euler = false;
  bool generic_weight = false;
  /// Number of leading paths written to paths.csv; 0 disables the dump.
  std::size_t dump_paths = 0;
  bool record_wall_time = false;
  DividendConvention dividend_convention = DividendConvention::risk_neutral;
  std::string output = "out";
  unsigned threads = 1;

  [[nodiscard]] EstimatorConfig estimator_config() const;
  [[nodiscard]] CompareOptions compare_options() const;
  [[nodiscard]] Payoff payoff_spec() const { return {payoff, strike}; }
  [[nodiscard]] bool has_method(const std::string& name) const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct ParsedConfig {
  RunConfig config;
  /// Defaults worth telling the user about (e.g. a missing n_paths).
  std::vector<std::string> notes;
};

/// Parses YAML text. Unknown keys, bad types and invalid values raise
/// ConfigParse with the offending line.
[[nodiscard]] ParsedConfig parse_config(const std::string& text, const std::string& source = "<config>");
[[nodiscard]] ParsedConfig load_config(const std::filesystem::path& path);

/// Writes every resolved field so that parse_config(serialize_config(c)) == c.
[[nodiscard]] std::string serialize_config(const RunConfig& config);

/// Range checks shared by the parser and programmatic callers.
void validate_config(const RunConfig& config);

[[nodiscard]] const char* to_string(FdScheme scheme) noexcept;
[[nodiscard]] const char* to_string(CurveResolver resolver) noexcept;
[[nodiscard]] const char* to_string(DividendConvention convention) noexcept;

}  // namespace mfbel
