#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfbel/curves.hpp"
#include "mfbel/model_spec.hpp"
#include "mfbel/time_grid.hpp"

namespace mfbel {

/// Logistic curve of the dividend model: rho' = rho (mu - q rho), rho_0 = x.
[[nodiscard]] MeanFieldCurves analytic_curves_riccati(double mu, double q, double x, const TimeGrid& grid);

/// rho' = rho f(rho) and its variational equation integrated together with
/// fixed-step RK4 on the grid.
[[nodiscard]] MeanFieldCurves analytic_curves_ode(const ScalarFn& f, const ScalarFn& f_prime, double x,
                                                  const TimeGrid& grid);

/// Exponential mean curve rho_t = x e^{mu t}.
[[nodiscard]] MeanFieldCurves analytic_curves_exponential(double mu, double x, const TimeGrid& grid);

struct ParticleSettings {
  std::size_t n_particles = 100000;
  std::size_t max_iters = 50;
  double tol = 1e-6;
  std::uint64_t seed = 0x5eed;
  Scheme scheme = Scheme::euler;
  unsigned threads = 1;
  bool sensitivities = true;
  /// Increments are cached across sweeps when they fit in this many MiB.
  double noise_cache_mb = 1024.0;
};

/// Raised when the Picard iteration exhausts max_iters. Carries the last
/// iterate so callers may accept it.
class NoConvergence : public Error {
 public:
  NoConvergence(double distance, std::size_t iterations, MeanFieldCurves last);

  [[nodiscard]] double distance() const noexcept { return distance_; }
  [[nodiscard]] std::size_t iterations() const noexcept { return iterations_; }
  [[nodiscard]] const MeanFieldCurves& last_curves() const noexcept { return last_; }

 private:
  double distance_;
  std::size_t iterations_;
  MeanFieldCurves last_;
};

struct FixedPointDiagnostics {
  std::size_t iterations = 0;
  double final_distance = 0.0;
};

/// Interacting-particle Picard iteration for the law curves. Sensitivities
/// come from whole fixed points at x +/- delta on the same particle noise.
[[nodiscard]] MeanFieldCurves particle_fixed_point(const ModelSpec& model, double x, const TimeGrid& grid,
                                                   const ParticleSettings& settings,
                                                   FixedPointDiagnostics* diagnostics = nullptr);

/// Bump used by the particle resolver for d/dx.
[[nodiscard]] double sensitivity_bump(double x) noexcept;

/// Analytic provider when the model declares one; particle resolver otherwise.
[[nodiscard]] MeanFieldCurves resolve_curves(const ModelSpec& model, double x, const TimeGrid& grid,
                                             const ParticleSettings& fallback);

[[nodiscard]] double sup_distance(const MeanFieldCurves& a, const MeanFieldCurves& b);

struct DerivativeSample {
  double t = 0.0;
  double x = 0.0;
  double rho = 0.0;
  double pi = 0.0;
};

struct DerivativeCheck {
  std::string name;
  double max_discrepancy = 0.0;
  bool flagged = false;
};

struct DerivativeReport {
  std::vector<DerivativeCheck> checks;
  double threshold = 0.0;

  [[nodiscard]] double max_discrepancy() const noexcept;
  [[nodiscard]] bool passed() const noexcept;
};

/// Compares each supplied partial against a central difference with bump h.
/// Discrepancy is |analytic - fd| / max(1, |fd|).
[[nodiscard]] DerivativeReport validate_derivatives(const ModelSpec& model,
                                                    const std::vector<DerivativeSample>& samples, double h,
                                                    double threshold = 1e-6);

/// Columns t, rho, pi, drho_dx, dpi_dx with 17 significant digits.
void write_curves_csv(std::ostream& out, const MeanFieldCurves& curves, const TimeGrid& grid);

}  // namespace mfbel
