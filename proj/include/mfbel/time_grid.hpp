#pragma once

#include <cstddef>

#include "mfbel/errors.hpp"

namespace mfbel {

/// Uniform grid t_0 = 0 < t_1 < ... < t_M = T shared by the ODE solvers, the
/// Euler schemes and every time quadrature.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    require(horizon > 0.0, "time horizon must be positive");
    require(steps >= 1, "step count must be at least 1");
  }

  [[nodiscard]] double horizon() const noexcept { return horizon_; }
  [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
  [[nodiscard]] std::size_t nodes() const noexcept { return steps_ + 1; }
  [[nodiscard]] double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }

  [[nodiscard]] double time(std::size_t i) const noexcept {
    if (i >= steps_) return horizon_;
    return horizon_ * static_cast<double>(i) / static_cast<double>(steps_);
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double horizon_;
  std::size_t steps_;
};

}  // namespace mfbel
