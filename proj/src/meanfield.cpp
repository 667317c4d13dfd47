#include "mfbel/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mfbel/parallel.hpp"
#include "mfbel/sde.hpp"
#include "mfbel/rng.hpp"
#include "mfbel/stats.hpp"

namespace mfbel {

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

MeanFieldCurves sized_curves(const TimeGrid& grid) {
  MeanFieldCurves c;
  c.rho.assign(grid.nodes(), 0.0);
  c.pi.assign(grid.nodes(), 0.0);
  c.drho_dx.assign(grid.nodes(), 0.0);
  c.dpi_dx.assign(grid.nodes(), 0.0);
  return c;
}

void mirror_law_curves(MeanFieldCurves& c) {
  c.pi = c.rho;
  c.dpi_dx = c.drho_dx;
}

constexpr std::size_t kParticleBlock = 512;

}  // namespace

bool MeanFieldCurves::valid_for(const TimeGrid& grid) const noexcept {
  const std::size_t n = grid.nodes();
  return rho.size() == n && pi.size() == n && drho_dx.size() == n && dpi_dx.size() == n && all_finite(rho) &&
         all_finite(pi) && all_finite(drho_dx) && all_finite(dpi_dx);
}

MeanFieldCurves analytic_curves_riccati(double mu, double q, double x, const TimeGrid& grid) {
  require(mu != 0.0, "Riccati curve needs mu != 0");
  MeanFieldCurves c = sized_curves(grid);
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    const double t = grid.time(i);
    const double growth = std::exp(mu * t);
    const double denom = q * x * growth + mu - q * x;
    if (!(denom > 0.0)) {
      std::ostringstream msg;
      msg << "Riccati denominator " << denom << " at t = " << t << " (finite-time blow-up)";
      fail(ErrorCode::degenerate_denominator, msg.str());
    }
    c.rho[i] = i == 0 ? x : x * mu * growth / denom;
    c.drho_dx[i] = mu * mu * growth / (denom * denom);
  }
  mirror_law_curves(c);
  return c;
}

MeanFieldCurves analytic_curves_ode(const ScalarFn& f, const ScalarFn& f_prime, double x, const TimeGrid& grid) {
  MeanFieldCurves c = sized_curves(grid);
  const double dt = grid.dt();
  // state (rho, s) with rho' = rho f(rho), s' = (f(rho) + rho f'(rho)) s
  auto rhs = [&](double rho, double s, double& d_rho, double& d_s) {
    const double fr = f(rho);
    d_rho = rho * fr;
    d_s = (fr + rho * f_prime(rho)) * s;
  };
  double rho = x;
  double s = 1.0;
  c.rho[0] = rho;
  c.drho_dx[0] = s;
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    double k1r, k1s, k2r, k2s, k3r, k3s, k4r, k4s;
    rhs(rho, s, k1r, k1s);
    rhs(rho + 0.5 * dt * k1r, s + 0.5 * dt * k1s, k2r, k2s);
    rhs(rho + 0.5 * dt * k2r, s + 0.5 * dt * k2s, k3r, k3s);
    rhs(rho + dt * k3r, s + dt * k3s, k4r, k4s);
    rho += dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
    s += dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
    if (!std::isfinite(rho) || !std::isfinite(s)) {
      std::ostringstream msg;
      msg << "mean ODE overflowed at t = " << grid.time(i + 1);
      fail(ErrorCode::non_finite, msg.str());
    }
    c.rho[i + 1] = rho;
    c.drho_dx[i + 1] = s;
  }
  mirror_law_curves(c);
  return c;
}

MeanFieldCurves analytic_curves_exponential(double mu, double x, const TimeGrid& grid) {
  MeanFieldCurves c = sized_curves(grid);
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    const double growth = std::exp(mu * grid.time(i));
    c.rho[i] = i == 0 ? x : x * growth;
    c.drho_dx[i] = growth;
  }
  mirror_law_curves(c);
  return c;
}

NoConvergence::NoConvergence(double distance, std::size_t iterations, MeanFieldCurves last)
    : Error(ErrorCode::no_convergence,
            [&] {
              std::ostringstream msg;
              msg << "Picard iteration stopped after " << iterations << " iterations with sup distance "
                  << distance;
              return msg.str();
            }()),
      distance_(distance),
      iterations_(iterations),
      last_(std::move(last)) {}

double sup_distance(const MeanFieldCurves& a, const MeanFieldCurves& b) {
  require(a.size() == b.size(), "curves live on different grids");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a.rho[i] - b.rho[i]));
    d = std::max(d, std::abs(a.pi[i] - b.pi[i]));
  }
  return d;
}

double sensitivity_bump(double x) noexcept { return std::max(1e-4 * std::abs(x), 1e-6); }

namespace {

/// One Picard map: empirical law curves of particles driven by `curves`.
MeanFieldCurves particle_means(const ModelSpec& model, double x, const TimeGrid& grid,
                               const ParticleSettings& settings, const MeanFieldCurves& curves,
                               const std::vector<double>& noise_cache) {
  const std::size_t nodes = grid.nodes();
  const std::size_t n_blocks = (settings.n_particles + kParticleBlock - 1) / kParticleBlock;
  std::vector<double> phi_sums(n_blocks * nodes, 0.0);
  std::vector<double> psi_sums(n_blocks * nodes, 0.0);

  parallel_for_blocks(n_blocks, settings.threads, [&](std::size_t block) {
    NoiseGrid noise;
    double* phi_row = phi_sums.data() + block * nodes;
    double* psi_row = psi_sums.data() + block * nodes;
    const std::size_t first = block * kParticleBlock;
    const std::size_t last = std::min(settings.n_particles, first + kParticleBlock);
    for (std::size_t p = first; p < last; ++p) {
      if (noise_cache.empty()) {
        gen_noise_into(settings.seed, p, grid, noise);
      } else {
        const auto first_dw = noise_cache.begin() + static_cast<std::ptrdiff_t>(p * grid.steps());
        noise.increments.assign(first_dw, first_dw + static_cast<std::ptrdiff_t>(grid.steps()));
      }
      const std::vector<double> path = simulate_x(model.dynamics, model, curves, x, grid, noise, settings.scheme);
      for (std::size_t i = 0; i < nodes; ++i) {
        phi_row[i] += model.phi(path[i]);
        psi_row[i] += model.psi(path[i]);
      }
    }
  });

  MeanFieldCurves next = sized_curves(grid);
  next.provenance = CurveProvenance::particle;
  std::vector<double> column(n_blocks);
  const double n = static_cast<double>(settings.n_particles);
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t b = 0; b < n_blocks; ++b) column[b] = phi_sums[b * nodes + i];
    next.rho[i] = pairwise_sum(column) / n;
    for (std::size_t b = 0; b < n_blocks; ++b) column[b] = psi_sums[b * nodes + i];
    next.pi[i] = pairwise_sum(column) / n;
  }
  next.rho[0] = model.phi(x);
  next.pi[0] = model.psi(x);
  return next;
}

MeanFieldCurves picard(const ModelSpec& model, double x, const TimeGrid& grid, const ParticleSettings& settings,
                       const std::vector<double>& noise_cache, double tol, FixedPointDiagnostics* diagnostics) {
  MeanFieldCurves curves = sized_curves(grid);
  curves.provenance = CurveProvenance::particle;
  std::fill(curves.rho.begin(), curves.rho.end(), model.phi(x));
  std::fill(curves.pi.begin(), curves.pi.end(), model.psi(x));

  double distance = 0.0;
  for (std::size_t iter = 1; iter <= settings.max_iters; ++iter) {
    MeanFieldCurves next = particle_means(model, x, grid, settings, curves, noise_cache);
    distance = sup_distance(curves, next);
    curves = std::move(next);
    if (!curves.valid_for(grid)) fail(ErrorCode::non_finite, "particle mean curve is not finite");
    if (distance < tol) {
      if (diagnostics) *diagnostics = {iter, distance};
      return curves;
    }
  }
  throw NoConvergence(distance, settings.max_iters, std::move(curves));
}

}  // namespace

MeanFieldCurves particle_fixed_point(const ModelSpec& model, double x, const TimeGrid& grid,
                                     const ParticleSettings& settings, FixedPointDiagnostics* diagnostics) {
  require(settings.n_particles >= 2, "particle resolver needs at least 2 particles");
  require(settings.tol > 0.0, "particle resolver tolerance must be positive");
  require(settings.max_iters >= 1, "particle resolver needs max_iters >= 1");
  // Every Picard sweep (and the bumped solves) reuses the same increments.
  std::vector<double> noise_cache;
  const double cache_mb = static_cast<double>(settings.n_particles) * grid.steps() * sizeof(double) / (1 << 20);
  if (cache_mb <= settings.noise_cache_mb) {
    noise_cache.resize(settings.n_particles * grid.steps());
    const std::size_t n_blocks = (settings.n_particles + kParticleBlock - 1) / kParticleBlock;
    parallel_for_blocks(n_blocks, settings.threads, [&](std::size_t block) {
      NoiseGrid noise;
      const std::size_t last = std::min(settings.n_particles, (block + 1) * kParticleBlock);
      for (std::size_t p = block * kParticleBlock; p < last; ++p) {
        gen_noise_into(settings.seed, p, grid, noise);
        std::copy(noise.increments.begin(), noise.increments.end(),
                  noise_cache.begin() + static_cast<std::ptrdiff_t>(p * grid.steps()));
      }
    });
  }

  MeanFieldCurves curves = picard(model, x, grid, settings, noise_cache, settings.tol, diagnostics);
  if (!settings.sensitivities) return curves;

  // The difference quotient divides fixed-point residuals by 2 delta, so the
  // bumped solves iterate to a proportionally tighter tolerance.
  const double delta = sensitivity_bump(x);
  const double bumped_tol = std::max(settings.tol * delta, 1e-14);
  const MeanFieldCurves up = picard(model, x + delta, grid, settings, noise_cache, bumped_tol, nullptr);
  const MeanFieldCurves down = picard(model, x - delta, grid, settings, noise_cache, bumped_tol, nullptr);
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    curves.drho_dx[i] = (up.rho[i] - down.rho[i]) / (2.0 * delta);
    curves.dpi_dx[i] = (up.pi[i] - down.pi[i]) / (2.0 * delta);
  }
  return curves;
}

MeanFieldCurves resolve_curves(const ModelSpec& model, double x, const TimeGrid& grid,
                               const ParticleSettings& fallback) {
  if (model.analytic_curves) return model.analytic_curves(x, grid);
  return particle_fixed_point(model, x, grid, fallback);
}

double DerivativeReport::max_discrepancy() const noexcept {
  double m = 0.0;
  for (const auto& c : checks) m = std::max(m, c.max_discrepancy);
  return m;
}

bool DerivativeReport::passed() const noexcept {
  return std::none_of(checks.begin(), checks.end(), [](const DerivativeCheck& c) { return c.flagged; });
}

namespace {

double discrepancy(double analytic, double fd) { return std::abs(analytic - fd) / std::max(1.0, std::abs(fd)); }

void check_coefficients(const Coefficients& coeffs, const std::string& prefix,
                        const std::vector<DerivativeSample>& samples, double h, double threshold,
                        DerivativeReport& report) {
  DerivativeCheck d1b{prefix + "d1_b"}, d2b{prefix + "d2_b"}, d1s{prefix + "d1_sigma"}, d2s{prefix + "d2_sigma"};
  for (const auto& s : samples) {
    d1b.max_discrepancy = std::max(
        d1b.max_discrepancy, discrepancy(coeffs.d1_b(s.t, s.x, s.rho),
                                         (coeffs.b(s.t, s.x + h, s.rho) - coeffs.b(s.t, s.x - h, s.rho)) / (2 * h)));
    d2b.max_discrepancy = std::max(
        d2b.max_discrepancy, discrepancy(coeffs.d2_b(s.t, s.x, s.rho),
                                         (coeffs.b(s.t, s.x, s.rho + h) - coeffs.b(s.t, s.x, s.rho - h)) / (2 * h)));
    d1s.max_discrepancy = std::max(
        d1s.max_discrepancy,
        discrepancy(coeffs.d1_sigma(s.t, s.x, s.pi),
                    (coeffs.sigma(s.t, s.x + h, s.pi) - coeffs.sigma(s.t, s.x - h, s.pi)) / (2 * h)));
    d2s.max_discrepancy = std::max(
        d2s.max_discrepancy,
        discrepancy(coeffs.d2_sigma(s.t, s.x, s.pi),
                    (coeffs.sigma(s.t, s.x, s.pi + h) - coeffs.sigma(s.t, s.x, s.pi - h)) / (2 * h)));
  }
  for (auto* c : {&d1b, &d2b, &d1s, &d2s}) {
    c->flagged = !(c->max_discrepancy <= threshold);
    report.checks.push_back(*c);
  }
}

}  // namespace

DerivativeReport validate_derivatives(const ModelSpec& model, const std::vector<DerivativeSample>& samples, double h,
                                      double threshold) {
  require(h > 0.0, "derivative bump must be positive");
  DerivativeReport report;
  report.threshold = threshold;
  check_coefficients(model.dynamics, "", samples, h, threshold, report);
  if (model.pricing_dynamics) check_coefficients(*model.pricing_dynamics, "pricing.", samples, h, threshold, report);

  DerivativeCheck dphi{"d_phi"}, dpsi{"d_psi"};
  for (const auto& s : samples) {
    dphi.max_discrepancy = std::max(
        dphi.max_discrepancy, discrepancy(model.d_phi(s.x), (model.phi(s.x + h) - model.phi(s.x - h)) / (2 * h)));
    dpsi.max_discrepancy = std::max(
        dpsi.max_discrepancy, discrepancy(model.d_psi(s.x), (model.psi(s.x + h) - model.psi(s.x - h)) / (2 * h)));
  }
  for (auto* c : {&dphi, &dpsi}) {
    c->flagged = !(c->max_discrepancy <= threshold);
    report.checks.push_back(*c);
  }
  return report;
}

void write_curves_csv(std::ostream& out, const MeanFieldCurves& curves, const TimeGrid& grid) {
  require(curves.size() == grid.nodes(), "curves do not match the grid");
  out << "t,rho,pi,drho_dx,dpi_dx\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    out << grid.time(i) << ',' << curves.rho[i] << ',' << curves.pi[i] << ',' << curves.drho_dx[i] << ','
        << curves.dpi_dx[i] << '\n';
  }
}

}  // namespace mfbel
