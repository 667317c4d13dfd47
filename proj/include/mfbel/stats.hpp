#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace mfbel {

/// Recursive pairwise summation; the association order depends only on the
/// length, so the result is independent of how the values were produced.
[[nodiscard]] double pairwise_sum(std::span<const double> values) noexcept;

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Two-pass mean / variance with pairwise sums.
[[nodiscard]] SampleSummary summarize(std::span<const double> values);

[[nodiscard]] inline double normal_pdf(double z) noexcept {
  constexpr double inv_sqrt_2pi = 0.39894228040143267794;
  return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

[[nodiscard]] inline double normal_cdf(double z) noexcept {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Trapezoid rule over equally spaced samples.
[[nodiscard]] double trapezoid(std::span<const double> samples, double dt) noexcept;

}  // namespace mfbel
