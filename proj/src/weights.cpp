#include "mfbel/weights.hpp"

#include <cmath>
#include <sstream>

#include "mfbel/stats.hpp"

namespace mfbel {

namespace {

double inverse_tangent(double y, std::size_t i) {
  if (y == 0.0) {
    std::ostringstream msg;
    msg << "tangent vanished at node " << i;
    fail(ErrorCode::tangent_degenerate, msg.str());
  }
  return 1.0 / y;
}

/// Integrand contributions of node i to the two integrals of u(T).
struct UTerms {
  double lebesgue;
  double ito;
};

inline UTerms u_terms(double y, double B, double alpha, double beta, double dt, double dw, std::size_t i) {
  const double inv_y = inverse_tangent(y, i);
  return {inv_y * (alpha - B * beta) * dt, inv_y * beta * dw};
}

/// Re-runs the state and tangent recursions from node s with increment s
/// shifted by eps and returns the bumped u(T). `lebesgue` and `ito` enter as
/// the sums over nodes < s.
double bumped_u(const Coefficients& coeffs, const ModelSpec& model, const MeanFieldCurves& curves,
                const PathBundle& bundle, const TimeGrid& grid, std::size_t s, double eps, Scheme scheme,
                double lebesgue, double ito) {
  const auto& dws = bundle.noise->increments;
  const double dt = grid.dt();
  double xi = bundle.x_path[s];
  double yi = bundle.tangent.y[s];
  double A = bundle.tangent.A[s];
  double B = bundle.tangent.B[s];
  double alpha = bundle.tangent.alpha[s];
  double beta = bundle.tangent.beta[s];
  for (std::size_t i = s; i < grid.steps(); ++i) {
    const double t = grid.time(i);
    if (i > s) {
      A = coeffs.d1_b(t, xi, curves.rho[i]);
      B = coeffs.d1_sigma(t, xi, curves.pi[i]);
      alpha = coeffs.drift_depends_on_law ? coeffs.d2_b(t, xi, curves.rho[i]) * curves.drho_dx[i] : 0.0;
      beta = coeffs.diffusion_depends_on_law ? coeffs.d2_sigma(t, xi, curves.pi[i]) * curves.dpi_dx[i] : 0.0;
    }
    const double dw = i == s ? dws[i] + eps : dws[i];
    const UTerms terms = u_terms(yi, B, alpha, beta, dt, dw, i);
    lebesgue += terms.lebesgue;
    ito += terms.ito;

    const double diffusion = checked_diffusion(coeffs, model.ellipticity_floor, t, xi, curves.pi[i]);
    if (scheme == Scheme::euler) {
      const double x_next = xi + coeffs.b(t, xi, curves.rho[i]) * dt + diffusion * dw;
      yi = yi + (A * yi) * dt + (B * yi) * dw;
      xi = x_next;
    } else {
      const double growth = std::exp((A - 0.5 * B * B) * dt + B * dw);
      xi = xi * growth;
      yi = yi * growth;
    }
    if (!std::isfinite(xi) || !std::isfinite(yi)) fail(ErrorCode::non_finite, "bumped path overflowed");
  }
  return 1.0 + lebesgue + ito;
}

}  // namespace

CorrectionProcess correction_u(const PathBundle& bundle, const TimeGrid& grid) {
  require(bundle.noise != nullptr, "path bundle has no noise attached");
  const auto& tp = bundle.tangent;
  const auto& dws = bundle.noise->increments;
  const double dt = grid.dt();
  CorrectionProcess corr;
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const UTerms terms = u_terms(tp.y[i], tp.B[i], tp.alpha[i], tp.beta[i], dt, dws[i], i);
    corr.lebesgue_part += terms.lebesgue;
    corr.ito_part += terms.ito;
  }
  corr.u_final = 1.0 + corr.lebesgue_part + corr.ito_part;
  return corr;
}

std::vector<double> inverse_diffusion_tangent(const Coefficients& coeffs, const ModelSpec& model,
                                              const MeanFieldCurves& curves, const PathBundle& bundle,
                                              const TimeGrid& grid) {
  std::vector<double> g(grid.steps());
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double s = checked_diffusion(coeffs, model.ellipticity_floor, grid.time(i), bundle.x_path[i], curves.pi[i]);
    g[i] = bundle.tangent.y[i] / s;
  }
  return g;
}

MalliavinWeight weight_generic_bel2(const Coefficients& coeffs, const ModelSpec& model, const MeanFieldCurves& curves,
                                    const PathBundle& bundle, const CorrectionProcess& corr, const TimeGrid& grid,
                                    std::span<const double> dsu) {
  require(dsu.size() == grid.steps(), "D_s u(T) must be given on nodes 0..M-1");
  const std::vector<double> g = inverse_diffusion_tangent(coeffs, model, curves, bundle, grid);
  const auto& dws = bundle.noise->increments;
  const double dt = grid.dt();
  double ito = 0.0;
  double trace = 0.0;
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    ito += g[i] * dws[i];
    trace += g[i] * dsu[i] * dt;
  }
  const double a = 1.0 / grid.horizon();
  return {a * ito * corr.u_final - a * trace, WeightMethod::generic_bel2};
}

double dsu_noise_bump(const Coefficients& coeffs, const ModelSpec& model, const MeanFieldCurves& curves, double x,
                      const TimeGrid& grid, const NoiseGrid& noise, std::size_t s_index, double eps, Scheme scheme) {
  require(eps > 0.0, "noise bump must be positive");
  require(s_index < grid.steps(), "bump index outside [0, M)");
  const PathBundle bundle = simulate_path(coeffs, model, curves, x, grid, noise, scheme);
  const auto& tp = bundle.tangent;
  double lebesgue = 0.0;
  double ito = 0.0;
  for (std::size_t i = 0; i < s_index; ++i) {
    const UTerms terms = u_terms(tp.y[i], tp.B[i], tp.alpha[i], tp.beta[i], grid.dt(), noise.increments[i], i);
    lebesgue += terms.lebesgue;
    ito += terms.ito;
  }
  const double u_base = correction_u(bundle, grid).u_final;
  const double u_bumped = bumped_u(coeffs, model, curves, bundle, grid, s_index, eps, scheme, lebesgue, ito);
  return (u_bumped - u_base) / eps;
}

std::vector<double> dsu_profile(const Coefficients& coeffs, const ModelSpec& model, const MeanFieldCurves& curves,
                                const PathBundle& bundle, const TimeGrid& grid, double eps, Scheme scheme) {
  require(eps > 0.0, "noise bump must be positive");
  std::vector<double> dsu(grid.steps(), 0.0);
  if (!coeffs.depends_on_law()) return dsu;
  const auto& tp = bundle.tangent;
  const double u_base = correction_u(bundle, grid).u_final;
  double lebesgue = 0.0;
  double ito = 0.0;
  for (std::size_t s = 0; s < grid.steps(); ++s) {
    dsu[s] = (bumped_u(coeffs, model, curves, bundle, grid, s, eps, scheme, lebesgue, ito) - u_base) / eps;
    const UTerms terms = u_terms(tp.y[s], tp.B[s], tp.alpha[s], tp.beta[s], grid.dt(), bundle.noise->increments[s], s);
    lebesgue += terms.lebesgue;
    ito += terms.ito;
  }
  return dsu;
}

MalliavinWeight weight_bs_dividend(const PathBundle& bundle, const MeanFieldCurves& curves,
                                   const DividendParams& p, const TimeGrid& grid, DividendConvention convention) {
  require(bundle.noise != nullptr, "path bundle has no noise attached");
  const double x = bundle.x0;
  const double T = grid.horizon();
  const auto& dws = bundle.noise->increments;
  double w_T = 0.0;
  for (double dw : dws) w_T += dw;
  if (p.q == 0.0) return {w_T / (x * p.sigma * T), WeightMethod::bs_dividend};

  const double dt = grid.dt();
  double ito = 0.0;
  std::vector<double> theta(grid.nodes());
  std::vector<double> theta_kernel(grid.nodes());
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    const double kernel = std::exp(-p.mu * grid.time(i)) * curves.rho[i] * curves.rho[i];
    if (i < grid.steps()) ito += kernel * dws[i];
    theta[i] = (p.mu - p.r - p.q * curves.rho[i]) / p.sigma;
    theta_kernel[i] = theta[i] * kernel;
  }
  const double terminal = std::exp(-p.mu * T) * curves.rho.back();
  const double scale = p.q / (x * x * p.sigma);
  if (convention == DividendConvention::risk_neutral) {
    return {scale * ito + terminal * w_T / (x * x * p.sigma * T), WeightMethod::bs_dividend};
  }
  const double int_theta_kernel = trapezoid(theta_kernel, dt);
  const double int_theta = trapezoid(theta, dt);
  return {scale * (ito + int_theta_kernel + terminal / p.q * (w_T - int_theta) / T), WeightMethod::bs_dividend};
}

MalliavinWeight weight_mean_drift(const PathBundle& bundle, const CorrectionProcess& corr, const TimeGrid& grid,
                                  double sigma) {
  for (double b : bundle.tangent.beta) {
    if (b != 0.0) fail(ErrorCode::weight_not_applicable, "mean-drift weight needs a law-free diffusion (beta = 0)");
  }
  const double w_T = bundle.noise->terminal();
  return {corr.u_final * w_T / (sigma * bundle.x0 * grid.horizon()), WeightMethod::mean_drift};
}

double compensator_rho_squared(const MeanFieldCurves& curves, const TimeGrid& grid) {
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.steps(); ++i) sum += curves.rho[i] * curves.rho[i];
  return sum * grid.dt();
}

double integrated_rho_squared(const MeanFieldCurves& curves, const TimeGrid& grid) {
  std::vector<double> sq(curves.rho.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = curves.rho[i] * curves.rho[i];
  return trapezoid(sq, grid.dt());
}

GaussianPair gaussian_pair(const MeanFieldCurves& curves, const NoiseGrid& noise, const TimeGrid& grid) {
  require(curves.size() == grid.nodes() && noise.increments.size() == grid.steps(), "inputs do not match the grid");
  GaussianPair pair;
  std::vector<double> inv_sq(grid.nodes());
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    const double rho = curves.rho[i];
    require(rho > 0.0, "mean curve must be strictly positive");
    inv_sq[i] = 1.0 / (rho * rho);
    if (i < grid.steps()) {
      pair.F += rho * noise.increments[i];
      pair.G += noise.increments[i] / rho;
    }
  }
  pair.compensator = compensator_rho_squared(curves, grid);
  pair.sigma_ff = integrated_rho_squared(curves, grid);
  pair.sigma_fg = grid.horizon();
  pair.sigma_gg = trapezoid(inv_sq, grid.dt());
  return pair;
}

MalliavinWeight weight_mean_vol(const GaussianPair& pair, const MeanFieldCurves& curves, const MeanVolParams& p) {
  require(!curves.rho.empty(), "empty mean curve");
  const double u = 1.0 - p.sigma * p.sigma * pair.compensator + p.sigma * pair.F;
  return {(u * pair.G - p.sigma * p.T) / (p.sigma * p.x * p.T), WeightMethod::mean_vol};
}

double digital_threshold(const DigitalParams& p, const MeanFieldCurves& curves, const TimeGrid& grid) {
  require(p.K > 0.0 && p.x > 0.0, "digital threshold needs K, x > 0");
  const double v = compensator_rho_squared(curves, grid);
  return (std::log(p.K / p.x) - p.mu * p.T + 0.5 * p.sigma * p.sigma * v) / p.sigma;
}

}  // namespace mfbel
