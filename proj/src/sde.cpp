#include "mfbel/sde.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace mfbel {

namespace {

void check_inputs(const MeanFieldCurves& curves, const TimeGrid& grid, const NoiseGrid& noise) {
  require(curves.size() == grid.nodes(), "mean-field curves are not defined on the simulation grid");
  require(noise.increments.size() == grid.steps(), "noise does not match the simulation grid");
}

[[noreturn]] void non_finite(const char* what, std::size_t step) {
  std::ostringstream msg;
  msg << what << " is not finite at step " << step;
  fail(ErrorCode::non_finite, msg.str());
}

}  // namespace

std::vector<double> simulate_x(const Coefficients& coeffs, const ModelSpec& model, const MeanFieldCurves& curves,
                               double x, const TimeGrid& grid, const NoiseGrid& noise, Scheme scheme) {
  check_inputs(curves, grid, noise);
  if (scheme == Scheme::log_euler) require(coeffs.geometric, "log-Euler stepping needs geometric coefficients");
  const double dt = grid.dt();
  std::vector<double> path(grid.nodes());
  path[0] = x;
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double t = grid.time(i);
    const double xi = path[i];
    const double dw = noise.increments[i];
    const double diffusion = checked_diffusion(coeffs, model.ellipticity_floor, t, xi, curves.pi[i]);
    double next;
    if (scheme == Scheme::euler) {
      next = xi + coeffs.b(t, xi, curves.rho[i]) * dt + diffusion * dw;
    } else {
      const double a = coeffs.d1_b(t, xi, curves.rho[i]);
      const double s = coeffs.d1_sigma(t, xi, curves.pi[i]);
      next = xi * std::exp((a - 0.5 * s * s) * dt + s * dw);
    }
    if (!std::isfinite(next)) non_finite("state", i + 1);
    path[i + 1] = next;
  }
  return path;
}

std::vector<double> simulate_x(const ModelSpec& model, const MeanFieldCurves& curves, double x, const TimeGrid& grid,
                               const NoiseGrid& noise, Scheme scheme) {
  return simulate_x(model.dynamics, model, curves, x, grid, noise, scheme);
}

TangentPath simulate_tangent(const Coefficients& coeffs, const MeanFieldCurves& curves,
                             const std::vector<double>& x_path, const TimeGrid& grid, const NoiseGrid& noise,
                             Scheme scheme) {
  check_inputs(curves, grid, noise);
  require(x_path.size() == grid.nodes(), "state path does not match the grid");
  const std::size_t nodes = grid.nodes();
  const double dt = grid.dt();
  TangentPath tp;
  tp.y.resize(nodes);
  tp.A.resize(nodes);
  tp.B.resize(nodes);
  tp.alpha.assign(nodes, 0.0);
  tp.beta.assign(nodes, 0.0);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double t = grid.time(i);
    const double xi = x_path[i];
    tp.A[i] = coeffs.d1_b(t, xi, curves.rho[i]);
    tp.B[i] = coeffs.d1_sigma(t, xi, curves.pi[i]);
    if (coeffs.drift_depends_on_law) tp.alpha[i] = coeffs.d2_b(t, xi, curves.rho[i]) * curves.drho_dx[i];
    if (coeffs.diffusion_depends_on_law) tp.beta[i] = coeffs.d2_sigma(t, xi, curves.pi[i]) * curves.dpi_dx[i];
  }
  tp.y[0] = 1.0;
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double dw = noise.increments[i];
    const double yi = tp.y[i];
    double next;
    if (scheme == Scheme::euler) {
      next = yi + (tp.A[i] * yi) * dt + (tp.B[i] * yi) * dw;
    } else {
      next = yi * std::exp((tp.A[i] - 0.5 * tp.B[i] * tp.B[i]) * dt + tp.B[i] * dw);
    }
    if (!std::isfinite(next)) non_finite("tangent", i + 1);
    if (next == 0.0) {
      std::ostringstream msg;
      msg << "tangent vanished at step " << i + 1;
      fail(ErrorCode::tangent_degenerate, msg.str());
    }
    tp.y[i + 1] = next;
  }
  return tp;
}

std::vector<double> simulate_jacobian(const TangentPath& tp, const std::vector<double>& x_path, const TimeGrid& grid,
                                      const NoiseGrid& noise, Scheme scheme) {
  require(tp.y.size() == grid.nodes() && x_path.size() == grid.nodes(), "tangent does not match the grid");
  require(noise.increments.size() == grid.steps(), "noise does not match the simulation grid");
  const double dt = grid.dt();
  std::vector<double> jac(grid.nodes());
  jac[0] = 1.0;
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double dw = noise.increments[i];
    const double ji = jac[i];
    double next;
    if (scheme == Scheme::euler) {
      next = ji + (tp.A[i] * ji + tp.alpha[i]) * dt + (tp.B[i] * ji + tp.beta[i]) * dw;
    } else {
      // derivative of the exponential step X_{i+1} = X_i exp(c_i) for x-free a, s
      const double growth = std::exp((tp.A[i] - 0.5 * tp.B[i] * tp.B[i]) * dt + tp.B[i] * dw);
      next = growth * (ji + (tp.alpha[i] - tp.B[i] * tp.beta[i]) * dt + tp.beta[i] * dw);
    }
    if (!std::isfinite(next)) non_finite("Jacobian", i + 1);
    jac[i + 1] = next;
  }
  return jac;
}

void simulate_path_into(const Coefficients& coeffs, const ModelSpec& model, const MeanFieldCurves& curves, double x,
                        const TimeGrid& grid, const NoiseGrid& noise, Scheme scheme, PathBundle& out) {
  out.x0 = x;
  out.noise = &noise;
  out.x_path = simulate_x(coeffs, model, curves, x, grid, noise, scheme);
  out.tangent = simulate_tangent(coeffs, curves, out.x_path, grid, noise, scheme);
  out.jac_path = simulate_jacobian(out.tangent, out.x_path, grid, noise, scheme);
}

PathBundle simulate_path(const Coefficients& coeffs, const ModelSpec& model, const MeanFieldCurves& curves, double x,
                         const TimeGrid& grid, const NoiseGrid& noise, Scheme scheme) {
  PathBundle bundle;
  simulate_path_into(coeffs, model, curves, x, grid, noise, scheme, bundle);
  return bundle;
}

PathBundle simulate_path(const ModelSpec& model, const MeanFieldCurves& curves, double x, const TimeGrid& grid,
                         const NoiseGrid& noise, Scheme scheme) {
  return simulate_path(model.dynamics, model, curves, x, grid, noise, scheme);
}

double liouville_det_check(const TangentPath& tp, const TimeGrid& grid, const NoiseGrid& noise, LiouvilleForm form) {
  require(tp.y.size() == grid.nodes(), "tangent does not match the grid");
  require(noise.increments.size() == grid.steps(), "noise does not match the simulation grid");
  const double dt = grid.dt();
  double exponent = 0.0;
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double dw = noise.increments[i];
    const double b2 = tp.B[i] * tp.B[i];
    switch (form) {
      case LiouvilleForm::realized_variation: exponent += tp.A[i] * dt + tp.B[i] * dw - 0.5 * b2 * dw * dw; break;
      case LiouvilleForm::calendar_time: exponent += (tp.A[i] - 0.5 * b2) * dt + tp.B[i] * dw; break;
      case LiouvilleForm::plus_half_b2: exponent += (tp.A[i] + 0.5 * b2) * dt + tp.B[i] * dw; break;
    }
  }
  const double reference = std::exp(exponent);
  return std::abs(tp.y.back() - reference) / std::abs(reference);
}

void write_path_csv(std::ostream& out, const PathBundle& bundle, const TimeGrid& grid) {
  require(bundle.noise != nullptr, "path bundle has no noise attached");
  out << "t,W,X,Y,J\n" << std::setprecision(17);
  double w = 0.0;
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    if (i > 0) w += bundle.noise->increments[i - 1];
    out << grid.time(i) << ',' << w << ',' << bundle.x_path[i] << ',' << bundle.tangent.y[i] << ','
        << bundle.jac_path[i] << '\n';
  }
}

}  // namespace mfbel
