#pragma once

#include <iosfwd>
#include <vector>

#include "mfbel/curves.hpp"
#include "mfbel/model_spec.hpp"
#include "mfbel/rng.hpp"
#include "mfbel/time_grid.hpp"

namespace mfbel {

/// Coefficient processes along a path and the homogeneous tangent Y:
/// A = d1 b, B = d1 sigma, alpha = d2 b * drho/dx, beta = d2 sigma * dpi/dx.
struct TangentPath {
  std::vector<double> y;
  std::vector<double> A;
  std::vector<double> B;
  std::vector<double> alpha;
  std::vector<double> beta;
};

/// Everything one simulated path contributes to the estimators.
struct PathBundle {
  double x0 = 0.0;
  std::vector<double> x_path;
  TangentPath tangent;
  std::vector<double> jac_path;
  const NoiseGrid* noise = nullptr;  // non-owning
};

/// X_{i+1} = X_i + b dt + sigma dW (or the exponential step for geometric models).
[[nodiscard]] std::vector<double> simulate_x(const Coefficients& coeffs, const ModelSpec& model,
                                             const MeanFieldCurves& curves, double x, const TimeGrid& grid,
                                             const NoiseGrid& noise, Scheme scheme = Scheme::euler);

/// Convenience overload simulating `model.dynamics`.
[[nodiscard]] std::vector<double> simulate_x(const ModelSpec& model, const MeanFieldCurves& curves, double x,
                                             const TimeGrid& grid, const NoiseGrid& noise,
                                             Scheme scheme = Scheme::euler);

[[nodiscard]] TangentPath simulate_tangent(const Coefficients& coeffs, const MeanFieldCurves& curves,
                                           const std::vector<double>& x_path, const TimeGrid& grid,
                                           const NoiseGrid& noise, Scheme scheme = Scheme::euler);

/// Full derivative dX/dx including the law feedback terms alpha, beta. For
/// each scheme this is the exact derivative of the discrete recursion.
[[nodiscard]] std::vector<double> simulate_jacobian(const TangentPath& tangent, const std::vector<double>& x_path,
                                                    const TimeGrid& grid, const NoiseGrid& noise,
                                                    Scheme scheme = Scheme::euler);

[[nodiscard]] PathBundle simulate_path(const Coefficients& coeffs, const ModelSpec& model,
                                       const MeanFieldCurves& curves, double x, const TimeGrid& grid,
                                       const NoiseGrid& noise, Scheme scheme = Scheme::euler);

[[nodiscard]] PathBundle simulate_path(const ModelSpec& model, const MeanFieldCurves& curves, double x,
                                       const TimeGrid& grid, const NoiseGrid& noise,
                                       Scheme scheme = Scheme::euler);

/// Reuses the vectors already held by `out`.
void simulate_path_into(const Coefficients& coeffs, const ModelSpec& model, const MeanFieldCurves& curves, double x,
                        const TimeGrid& grid, const NoiseGrid& noise, Scheme scheme, PathBundle& out);

/// Reference exponential the tangent is compared against.
///   realized_variation: exp(sum A dt + sum B dW - 1/2 sum B^2 dW^2)
///   calendar_time:      exp(sum (A - B^2/2) dt + sum B dW)
///   plus_half_b2:       exp(sum (A + B^2/2) dt + sum B dW)  (diagnostic only)
enum class LiouvilleForm { realized_variation, calendar_time, plus_half_b2 };

/// |Y_T - E_T| / |E_T| for the stochastic-exponential reference E_T.
[[nodiscard]] double liouville_det_check(const TangentPath& tangent, const TimeGrid& grid, const NoiseGrid& noise,
                                         LiouvilleForm form = LiouvilleForm::realized_variation);

/// Debug dump with columns t, W, X, Y, J.
void write_path_csv(std::ostream& out, const PathBundle& bundle, const TimeGrid& grid);

}  // namespace mfbel
