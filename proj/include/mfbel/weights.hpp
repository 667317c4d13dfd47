#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mfbel/curves.hpp"
#include "mfbel/model_spec.hpp"
#include "mfbel/sde.hpp"

namespace mfbel {

/// u(T) = 1 + int Y^{-1}(alpha - B beta) du + int Y^{-1} beta dW, split into
/// its two integrals (left-point quadrature on the grid).
struct CorrectionProcess {
  double u_final = 1.0;
  double lebesgue_part = 0.0;
  double ito_part = 0.0;
};

struct MalliavinWeight {
  double value = 0.0;
  WeightMethod method = WeightMethod::generic_bel2;
  /// Identifier of the averaging function a(s); only the constant 1/T ships.
  const char* a_choice = "constant_inverse_horizon";
};

/// F = int rho dW, G = int rho^{-1} dW and their covariance.
struct GaussianPair {
  double F = 0.0;
  double G = 0.0;
  double sigma_ff = 0.0;  // int rho^2 ds
  double sigma_fg = 0.0;  // T
  double sigma_gg = 0.0;  // int rho^{-2} ds
  /// Left-point sum of rho^2 dt: the discrete compensator paired with F.
  double compensator = 0.0;

  [[nodiscard]] double determinant() const noexcept { return sigma_ff * sigma_gg - sigma_fg * sigma_fg; }
};

[[nodiscard]] CorrectionProcess correction_u(const PathBundle& bundle, const TimeGrid& grid);

/// Integrand sigma^{-1}(s, X_s, pi_s) Y_s of the classical weight on every node.
[[nodiscard]] std::vector<double> inverse_diffusion_tangent(const Coefficients& coeffs, const ModelSpec& model,
                                                            const MeanFieldCurves& curves, const PathBundle& bundle,
                                                            const TimeGrid& grid);

/// Ito-plus-correction form of the Skorokhod weight with a = 1/T:
///   w = u(T) (1/T) int sigma^{-1} Y dW - (1/T) int sigma^{-1} Y D_s u(T) ds.
/// `dsu` holds D_s u(T) at nodes 0..M-1.
[[nodiscard]] MalliavinWeight weight_generic_bel2(const Coefficients& coeffs, const ModelSpec& model,
                                                  const MeanFieldCurves& curves, const PathBundle& bundle,
                                                  const CorrectionProcess& corr, const TimeGrid& grid,
                                                  std::span<const double> dsu);

/// Default noise bump for the Malliavin derivative of u(T).
[[nodiscard]] inline double default_dsu_eps(const TimeGrid& grid) noexcept { return 1e-4 * std::sqrt(grid.dt()); }

/// (u(T; dW_s + eps) - u(T)) / eps for the single increment s_index.
[[nodiscard]] double dsu_noise_bump(const Coefficients& coeffs, const ModelSpec& model,
                                    const MeanFieldCurves& curves, double x, const TimeGrid& grid,
                                    const NoiseGrid& noise, std::size_t s_index, double eps,
                                    Scheme scheme = Scheme::euler);

/// D_s u(T) on nodes 0..M-1. Re-simulates only the suffix after each bumped
/// increment; O(M^2) per path. Zero without bumping for law-free models.
[[nodiscard]] std::vector<double> dsu_profile(const Coefficients& coeffs, const ModelSpec& model,
                                              const MeanFieldCurves& curves, const PathBundle& bundle,
                                              const TimeGrid& grid, double eps, Scheme scheme = Scheme::euler);

/// How the stochastic integrals of the dividend-model weight are read.
enum class DividendConvention {
  /// Integrals against the simulated risk-neutral noise, drift corrections
  /// resolved so that the weight has zero mean.
  risk_neutral,
  /// Formula as printed, with dW read as the simulated noise.
  literal,
};

struct DividendParams {
  double mu = 0.0;
  double q = 0.0;
  double sigma = 0.0;
  double r = 0.0;
};

[[nodiscard]] MalliavinWeight weight_bs_dividend(const PathBundle& bundle, const MeanFieldCurves& curves,
                                                 const DividendParams& params, const TimeGrid& grid,
                                                 DividendConvention convention = DividendConvention::risk_neutral);

/// w = u(T) W_T / (sigma x T); rejects paths with beta != 0.
[[nodiscard]] MalliavinWeight weight_mean_drift(const PathBundle& bundle, const CorrectionProcess& corr,
                                                const TimeGrid& grid, double sigma);

[[nodiscard]] GaussianPair gaussian_pair(const MeanFieldCurves& curves, const NoiseGrid& noise,
                                         const TimeGrid& grid);

struct MeanVolParams {
  double sigma = 0.0;
  double mu = 0.0;
  double x = 0.0;
  double T = 0.0;
};

/// (1/(sigma x T)) ((1 - sigma^2 int rho^2 + sigma F) G - sigma T), with the
/// time integral taken as the left-point compensator of F.
[[nodiscard]] MalliavinWeight weight_mean_vol(const GaussianPair& pair, const MeanFieldCurves& curves,
                                              const MeanVolParams& params);

struct DigitalParams {
  double K = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double x = 0.0;
  double T = 0.0;
};

/// Threshold d(x) with {X_T >= K} = {F >= d(x)} for the mean-volatility model;
/// exact path by path under log-Euler stepping.
[[nodiscard]] double digital_threshold(const DigitalParams& params, const MeanFieldCurves& curves,
                                       const TimeGrid& grid);

/// sum_{i<M} rho_i^2 dt, the quadrature matching left-point Ito sums.
[[nodiscard]] double compensator_rho_squared(const MeanFieldCurves& curves, const TimeGrid& grid);

/// int_0^T rho_s^2 ds by the trapezoid rule.
[[nodiscard]] double integrated_rho_squared(const MeanFieldCurves& curves, const TimeGrid& grid);

}  // namespace mfbel
