#pragma once

// Reference values computed from scratch, without the library's closed forms.

#include <cmath>
#include <functional>

namespace oracle {

inline double ncdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Undiscounted E[(F e^{sZ - s^2/2} - K)^+].
inline double lognormal_call(double forward, double s, double strike) {
  const double d1 = (std::log(forward / strike) + 0.5 * s * s) / s;
  return forward * ncdf(d1) - strike * ncdf(d1 - s);
}

/// P(F e^{sZ - s^2/2} >= K).
inline double lognormal_digital(double forward, double s, double strike) {
  return ncdf((std::log(forward / strike) - 0.5 * s * s) / s);
}

/// Black-Scholes call delta at rate r: N(d1).
inline double bs_call_delta(double x, double r, double sigma, double strike, double T) {
  const double d1 = (std::log(x / strike) + (r + 0.5 * sigma * sigma) * T) / (sigma * std::sqrt(T));
  return ncdf(d1);
}

/// Fourth-order central difference.
inline double derivative(const std::function<double(double)>& f, double x, double h = 1e-3) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

/// Mean of dX = X (mu - q E[X]) dt + ..., X_0 = x.
inline double riccati_mean(double mu, double q, double x, double t) {
  const double g = std::exp(mu * t);
  return x * mu * g / (q * x * g + mu - q * x);
}

/// Mean-volatility model: X_T lognormal with forward x e^{mu T} and log-variance
/// sigma^2 x^2 (e^{2 mu T} - 1) / (2 mu).
inline double mean_vol_log_sd(double x, double mu, double sigma, double T) {
  return sigma * x * std::sqrt(std::expm1(2 * mu * T) / (2 * mu));
}

inline double mean_vol_call(double x, double mu, double sigma, double strike, double T) {
  return lognormal_call(x * std::exp(mu * T), mean_vol_log_sd(x, mu, sigma, T), strike);
}

inline double mean_vol_digital(double x, double mu, double sigma, double strike, double T) {
  return lognormal_digital(x * std::exp(mu * T), mean_vol_log_sd(x, mu, sigma, T), strike);
}

}  // namespace oracle
