#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "mfbel/errors.hpp"
#include "mfbel/time_grid.hpp"

namespace mfbel {

struct MeanFieldCurves;

/// Named scalar parameters plus string-valued options (e.g. the drift shape).
class Parameters {
 public:
  Parameters() = default;
  Parameters(std::initializer_list<std::pair<const std::string, double>> values) : values_(values) {}

  void set(const std::string& name, double value) { values_[name] = value; }
  void set_option(const std::string& name, std::string value) { options_[name] = std::move(value); }

  [[nodiscard]] bool has(const std::string& name) const { return values_.contains(name); }
  [[nodiscard]] double get(const std::string& name) const;
  [[nodiscard]] double get_or(const std::string& name, double fallback) const;
  [[nodiscard]] std::string option_or(const std::string& name, const std::string& fallback) const;

  [[nodiscard]] const std::map<std::string, double>& values() const noexcept { return values_; }
  [[nodiscard]] const std::map<std::string, std::string>& options() const noexcept { return options_; }

  friend bool operator==(const Parameters&, const Parameters&) = default;

 private:
  std::map<std::string, double> values_;
  std::map<std::string, std::string> options_;
};

using DriftFn = std::function<double(double t, double x, double rho)>;
using DiffusionFn = std::function<double(double t, double x, double pi)>;
using ScalarFn = std::function<double(double)>;

/// Drift b(t, x, rho), diffusion sigma(t, x, pi) and their four partials.
/// Index 1 is the state argument, index 2 the law argument.
struct Coefficients {
  DriftFn b;
  DriftFn d1_b;
  DriftFn d2_b;
  DiffusionFn sigma;
  DiffusionFn d1_sigma;
  DiffusionFn d2_sigma;
  /// b = x * a(t, rho) and sigma = x * s(t, pi); enables log-Euler stepping.
  bool geometric = false;
  bool drift_depends_on_law = true;
  bool diffusion_depends_on_law = true;

  [[nodiscard]] bool depends_on_law() const noexcept {
    return drift_depends_on_law || diffusion_depends_on_law;
  }
};

/// Euler-Maruyama, or exact exponential stepping for geometric coefficients.
enum class Scheme { euler, log_euler };

enum class WeightMethod { generic_bel2, bs_dividend, mean_drift, mean_vol };

[[nodiscard]] const char* to_string(WeightMethod method) noexcept;

using CurveProvider = std::function<MeanFieldCurves(double x, const TimeGrid& grid)>;

struct ModelSpec {
  std::string id;
  Coefficients dynamics;
  /// Dynamics used for pricing simulations when they differ from `dynamics`
  /// (risk-neutral drift for the dividend model). Curves always come from
  /// `dynamics`.
  std::optional<Coefficients> pricing_dynamics;
  double discount_rate = 0.0;

  ScalarFn phi;
  ScalarFn d_phi;
  ScalarFn psi;
  ScalarFn d_psi;

  CurveProvider analytic_curves;  // empty when the law must be resolved by particles
  std::optional<WeightMethod> closed_form_weight;
  Parameters parameters;
  double ellipticity_floor = 1e-12;

  [[nodiscard]] const Coefficients& simulation_dynamics() const noexcept {
    return pricing_dynamics ? *pricing_dynamics : dynamics;
  }
};

/// sigma(t, x, pi), aborting with EllipticityFloor when |sigma| < floor.
[[nodiscard]] double checked_diffusion(const Coefficients& coeffs, double floor, double t, double x,
                                       double pi);

}  // namespace mfbel
