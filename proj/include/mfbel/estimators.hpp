#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfbel/meanfield.hpp"
#include "mfbel/model_spec.hpp"
#include "mfbel/models.hpp"
#include "mfbel/weights.hpp"

namespace mfbel {

enum class DeltaMethod { malliavin, fd_forward, fd_central, pathwise };

[[nodiscard]] const char* to_string(DeltaMethod method) noexcept;

enum class CurveResolver { analytic, particle };

struct EstimatorConfig {
  double x0 = 1.0;
  double horizon = 1.0;
  std::size_t n_steps = 512;
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  Scheme scheme = Scheme::euler;
  CurveResolver resolver = CurveResolver::analytic;
  ParticleSettings particles;
  bool generic_weight = false;
  bool common_random_numbers = true;
  DividendConvention dividend_convention = DividendConvention::risk_neutral;
  bool record_wall_time = false;

  [[nodiscard]] TimeGrid grid() const { return TimeGrid(horizon, n_steps); }
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  double variance = 0.0;  // per-path sample variance
  std::size_t n_paths = 0;
};

struct DeltaEstimate {
  DeltaMethod method = DeltaMethod::malliavin;
  double value = 0.0;
  double std_error = 0.0;
  double variance = 0.0;
  std::size_t n_paths = 0;
  std::optional<double> h;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
};

struct TracePoint {
  std::size_t n = 0;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct ConvergenceTrace {
  std::vector<TracePoint> checkpoints;
};

/// Running estimates at n = 1000 * 2^k below n_paths, plus n_paths itself.
[[nodiscard]] ConvergenceTrace convergence_trace(std::span<const double> per_path);

/// Curves for `config.x0` (or an explicit x) per the configured resolver.
[[nodiscard]] MeanFieldCurves curves_for(const ModelSpec& model, double x, const EstimatorConfig& config);

/// Discounted E[Phi(X_T)].
[[nodiscard]] Estimate estimate_price(const ModelSpec& model, const Payoff& payoff, const EstimatorConfig& config);

struct DeltaResult {
  DeltaEstimate estimate;
  ConvergenceTrace trace;
};

/// Weight routine the Malliavin estimator uses for this model and config.
[[nodiscard]] WeightMethod resolve_weight_method(const ModelSpec& model, const EstimatorConfig& config);

/// Per-path weights (undiscounted) on the shared noise streams.
[[nodiscard]] std::vector<double> malliavin_weights(const ModelSpec& model, const EstimatorConfig& config,
                                                    std::optional<WeightMethod> method = std::nullopt);

[[nodiscard]] DeltaResult estimate_delta_malliavin(const ModelSpec& model, const Payoff& payoff,
                                                   const EstimatorConfig& config);

enum class FdScheme { forward, central };

[[nodiscard]] DeltaResult estimate_delta_fd(const ModelSpec& model, const Payoff& payoff,
                                            const EstimatorConfig& config, double h, FdScheme scheme);

[[nodiscard]] DeltaResult estimate_delta_pathwise(const ModelSpec& model, const Payoff& payoff,
                                                  const EstimatorConfig& config);

struct MethodRow {
  std::string label;  // e.g. "malliavin", "fd_forward(h=0.1)"
  std::optional<DeltaResult> result;
  std::string error;  // set when the method failed
};

struct CompareOptions {
  FdScheme fd_scheme = FdScheme::central;
  bool include_malliavin = true;
  bool include_pathwise = true;
};

/// Malliavin, one FD run per h and the pathwise oracle when the payoff allows
/// it, all on the same seed. Individual failures are recorded, not thrown.
[[nodiscard]] std::vector<MethodRow> compare_methods(const ModelSpec& model, const Payoff& payoff,
                                                     const EstimatorConfig& config, const std::vector<double>& h_list,
                                                     const CompareOptions& options = {});

/// Columns method, n_paths, n_steps, h, estimate, std_error, seed, wall_time_ms.
void write_estimates_csv(std::ostream& out, const std::vector<MethodRow>& rows);
/// Columns method, n, estimate, std_error.
void write_trace_csv(std::ostream& out, const std::vector<MethodRow>& rows);

}  // namespace mfbel
