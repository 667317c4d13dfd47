#pragma once

#include <cstddef>
#include <vector>

#include "mfbel/time_grid.hpp"

namespace mfbel {

enum class CurveProvenance { analytic, particle };

/// rho_t = E[phi(X_t)], pi_t = E[psi(X_t)] and their derivatives in the
/// initial state, sampled on every grid node.
struct MeanFieldCurves {
  std::vector<double> rho;
  std::vector<double> pi;
  std::vector<double> drho_dx;
  std::vector<double> dpi_dx;
  CurveProvenance provenance = CurveProvenance::analytic;

  [[nodiscard]] std::size_t size() const noexcept { return rho.size(); }
  /// Length M+1 and finite entries.
  [[nodiscard]] bool valid_for(const TimeGrid& grid) const noexcept;
};

}  // namespace mfbel
