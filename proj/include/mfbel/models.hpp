#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfbel/model_spec.hpp"
#include "mfbel/time_grid.hpp"

namespace mfbel {

enum class PayoffKind { call, digital, identity, constant };

[[nodiscard]] const char* to_string(PayoffKind kind) noexcept;
[[nodiscard]] PayoffKind parse_payoff_kind(const std::string& name);

struct Payoff {
  PayoffKind kind = PayoffKind::call;
  double strike = 0.0;

  [[nodiscard]] double evaluate(double x) const noexcept;
  [[nodiscard]] bool differentiable() const noexcept { return kind != PayoffKind::digital; }
  /// Almost-everywhere derivative; PayoffNotDifferentiable for digital.
  [[nodiscard]] double derivative(double x) const;
};

/// Ids accepted by build_model and the CLI config.
inline constexpr const char* kModelIds[] = {"bs_dividend", "mean_drift", "mean_vol", "classical_gbm"};

/// Coefficients, analytic curves and weight tag for a catalog model.
/// Parameters: mu, sigma for all; q for bs_dividend and mean_drift (linear
/// drift shape); r for bs_dividend (default 0.05). mean_drift reads option
/// "f" in {linear, tanh}.
[[nodiscard]] ModelSpec build_model(const std::string& id, const Parameters& params);

/// Initial state, horizon and strike that travel with a parameter set.
struct ParameterSet {
  Parameters params;
  double x0 = 0.0;
  double strike = 0.0;
  double horizon = 0.0;
};

/// Preset parameter sets: 'A' = {sigma 0.8, mu 1, x 1, K 2, T 1},
/// 'B' = {sigma 1.2, mu 1, x 0.5, K 0.7, T 1}.
[[nodiscard]] ParameterSet parameter_set(char which);

struct PriceDelta {
  double price = 0.0;
  double delta = 0.0;
};

/// Closed-form price and delta in the initial state, or nullopt when the
/// (model, payoff) pair has none. Dividend prices are risk-neutral and
/// discounted.
[[nodiscard]] std::optional<PriceDelta> closed_form_price_and_delta(const ModelSpec& model, const Payoff& payoff,
                                                                    double x, double horizon);

/// int_0^T rho_s^2 ds for the exponential mean curve x e^{mu s}.
[[nodiscard]] double mean_vol_variance(double x, double mu, double horizon) noexcept;

}  // namespace mfbel
