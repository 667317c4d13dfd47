#include "mfbel/estimators.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mfbel/parallel.hpp"
#include "mfbel/rng.hpp"
#include "mfbel/sde.hpp"
#include "mfbel/stats.hpp"

namespace mfbel {

const char* to_string(DeltaMethod method) noexcept {
  switch (method) {
    case DeltaMethod::malliavin: return "malliavin";
    case DeltaMethod::fd_forward: return "fd_forward";
    case DeltaMethod::fd_central: return "fd_central";
    case DeltaMethod::pathwise: return "pathwise";
  }
  return "unknown";
}

namespace {

constexpr std::size_t kPathBlock = 256;
constexpr std::uint64_t kUpStreamSalt = 0xF0u;
constexpr std::uint64_t kDownStreamSalt = 0xF1u;

/// Per-path values in path order; each block of paths is a pure function of
/// the path indices, so the vector is the same for every thread count.
template <class PathFn>
std::vector<double> per_path_values(const EstimatorConfig& config, PathFn&& fn) {
  require(config.n_paths >= 1, "n_paths must be at least 1");
  std::vector<double> values(config.n_paths);
  const std::size_t n_blocks = (config.n_paths + kPathBlock - 1) / kPathBlock;
  parallel_for_blocks(n_blocks, config.threads, [&](std::size_t block) {
    const std::size_t first = block * kPathBlock;
    const std::size_t last = std::min(config.n_paths, first + kPathBlock);
    NoiseGrid noise;
    PathBundle bundle;
    for (std::size_t p = first; p < last; ++p) {
      try {
        values[p] = fn(p, noise, bundle);
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << "path " << p << ": " << e.what();
        throw Error(e.code(), msg.str());
      }
    }
  });
  return values;
}

double discount(const ModelSpec& model, double horizon) { return std::exp(-model.discount_rate * horizon); }

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  [[nodiscard]] double elapsed_ms() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

DeltaResult finish(DeltaMethod method, const std::vector<double>& values, const EstimatorConfig& config,
                   std::optional<double> h, const Stopwatch& watch) {
  const SampleSummary s = summarize(values);
  DeltaResult out;
  out.estimate = {method, s.mean, s.std_error, s.variance, s.count, h, config.n_steps, config.seed, 0.0};
  out.trace = convergence_trace(values);
  out.estimate.wall_time_ms = watch.elapsed_ms();
  return out;
}

ParticleSettings particle_settings(const EstimatorConfig& config) {
  ParticleSettings s = config.particles;
  s.threads = config.threads;
  return s;
}

}  // namespace

ConvergenceTrace convergence_trace(std::span<const double> per_path) {
  ConvergenceTrace trace;
  auto add = [&](std::size_t n) {
    const SampleSummary s = summarize(per_path.first(n));
    trace.checkpoints.push_back({n, s.mean, s.std_error});
  };
  for (std::size_t n = 1000; n < per_path.size(); n *= 2) add(n);
  if (!per_path.empty()) add(per_path.size());
  return trace;
}

MeanFieldCurves curves_for(const ModelSpec& model, double x, const EstimatorConfig& config) {
  const TimeGrid grid = config.grid();
  if (config.resolver == CurveResolver::analytic && model.analytic_curves) return model.analytic_curves(x, grid);
  return particle_fixed_point(model, x, grid, particle_settings(config));
}

Estimate estimate_price(const ModelSpec& model, const Payoff& payoff, const EstimatorConfig& config) {
  const TimeGrid grid = config.grid();
  const MeanFieldCurves curves = curves_for(model, config.x0, config);
  const Coefficients& coeffs = model.simulation_dynamics();
  const double disc = discount(model, config.horizon);
  const auto values = per_path_values(config, [&](std::size_t p, NoiseGrid& noise, PathBundle&) {
    gen_noise_into(config.seed, p, grid, noise);
    const auto path = simulate_x(coeffs, model, curves, config.x0, grid, noise, config.scheme);
    return disc * payoff.evaluate(path.back());
  });
  const SampleSummary s = summarize(values);
  return {s.mean, s.std_error, s.variance, s.count};
}

WeightMethod resolve_weight_method(const ModelSpec& model, const EstimatorConfig& config) {
  if (config.generic_weight || !model.closed_form_weight) return WeightMethod::generic_bel2;
  return *model.closed_form_weight;
}

namespace {

double path_weight(WeightMethod method, const ModelSpec& model, const Coefficients& coeffs,
                   const MeanFieldCurves& curves, const PathBundle& bundle, const TimeGrid& grid,
                   const EstimatorConfig& config) {
  const Parameters& p = model.parameters;
  switch (method) {
    case WeightMethod::generic_bel2: {
      const CorrectionProcess corr = correction_u(bundle, grid);
      const auto dsu = dsu_profile(coeffs, model, curves, bundle, grid, default_dsu_eps(grid), config.scheme);
      return weight_generic_bel2(coeffs, model, curves, bundle, corr, grid, dsu).value;
    }
    case WeightMethod::bs_dividend:
      return weight_bs_dividend(bundle, curves, {p.get("mu"), p.get("q"), p.get("sigma"), model.discount_rate}, grid,
                                config.dividend_convention)
          .value;
    case WeightMethod::mean_drift:
      return weight_mean_drift(bundle, correction_u(bundle, grid), grid, p.get("sigma")).value;
    case WeightMethod::mean_vol:
      return weight_mean_vol(gaussian_pair(curves, *bundle.noise, grid), curves,
                             {p.get("sigma"), p.get("mu"), bundle.x0, grid.horizon()})
          .value;
  }
  return 0.0;
}

}  // namespace

std::vector<double> malliavin_weights(const ModelSpec& model, const EstimatorConfig& config,
                                      std::optional<WeightMethod> method) {
  const TimeGrid grid = config.grid();
  const MeanFieldCurves curves = curves_for(model, config.x0, config);
  const Coefficients& coeffs = model.simulation_dynamics();
  const WeightMethod resolved = method.value_or(resolve_weight_method(model, config));
  return per_path_values(config, [&](std::size_t p, NoiseGrid& noise, PathBundle& bundle) {
    gen_noise_into(config.seed, p, grid, noise);
    simulate_path_into(coeffs, model, curves, config.x0, grid, noise, config.scheme, bundle);
    return path_weight(resolved, model, coeffs, curves, bundle, grid, config);
  });
}

DeltaResult estimate_delta_malliavin(const ModelSpec& model, const Payoff& payoff, const EstimatorConfig& config) {
  const Stopwatch watch(config.record_wall_time);
  const TimeGrid grid = config.grid();
  const MeanFieldCurves curves = curves_for(model, config.x0, config);
  const Coefficients& coeffs = model.simulation_dynamics();
  const WeightMethod method = resolve_weight_method(model, config);
  const double disc = discount(model, config.horizon);
  const auto values = per_path_values(config, [&](std::size_t p, NoiseGrid& noise, PathBundle& bundle) {
    gen_noise_into(config.seed, p, grid, noise);
    simulate_path_into(coeffs, model, curves, config.x0, grid, noise, config.scheme, bundle);
    const double phi = payoff.evaluate(bundle.x_path.back());
    // a zero payoff kills the weight; skip the O(M^2) generic assembly
    if (phi == 0.0 && method == WeightMethod::generic_bel2) return 0.0;
    return disc * phi * path_weight(method, model, coeffs, curves, bundle, grid, config);
  });
  return finish(DeltaMethod::malliavin, values, config, std::nullopt, watch);
}

DeltaResult estimate_delta_fd(const ModelSpec& model, const Payoff& payoff, const EstimatorConfig& config, double h,
                              FdScheme scheme) {
  require(h > 0.0, "finite-difference bump must be positive");
  const Stopwatch watch(config.record_wall_time);
  const TimeGrid grid = config.grid();
  const Coefficients& coeffs = model.simulation_dynamics();
  const double x = config.x0;
  const bool central = scheme == FdScheme::central;
  const MeanFieldCurves base_curves = curves_for(model, central ? x - h : x, config);
  const MeanFieldCurves up_curves = curves_for(model, x + h, config);
  const double base_x = central ? x - h : x;
  const double width = central ? 2.0 * h : h;
  const double disc = discount(model, config.horizon);
  const std::uint64_t up_seed = config.common_random_numbers ? config.seed : derive_seed(config.seed, kUpStreamSalt);
  const std::uint64_t base_seed =
      config.common_random_numbers ? config.seed : derive_seed(config.seed, kDownStreamSalt);

  const auto values = per_path_values(config, [&](std::size_t p, NoiseGrid& noise, PathBundle&) {
    gen_noise_into(up_seed, p, grid, noise);
    const double up = payoff.evaluate(simulate_x(coeffs, model, up_curves, x + h, grid, noise, config.scheme).back());
    if (base_seed != up_seed) gen_noise_into(base_seed, p, grid, noise);
    const double base =
        payoff.evaluate(simulate_x(coeffs, model, base_curves, base_x, grid, noise, config.scheme).back());
    return disc * (up - base) / width;
  });
  return finish(central ? DeltaMethod::fd_central : DeltaMethod::fd_forward, values, config, h, watch);
}

DeltaResult estimate_delta_pathwise(const ModelSpec& model, const Payoff& payoff, const EstimatorConfig& config) {
  if (!payoff.differentiable()) {
    fail(ErrorCode::payoff_not_differentiable, std::string("pathwise estimator refuses the ") +
                                                   to_string(payoff.kind) + " payoff");
  }
  const Stopwatch watch(config.record_wall_time);
  const TimeGrid grid = config.grid();
  const MeanFieldCurves curves = curves_for(model, config.x0, config);
  const Coefficients& coeffs = model.simulation_dynamics();
  const double disc = discount(model, config.horizon);
  const auto values = per_path_values(config, [&](std::size_t p, NoiseGrid& noise, PathBundle& bundle) {
    gen_noise_into(config.seed, p, grid, noise);
    simulate_path_into(coeffs, model, curves, config.x0, grid, noise, config.scheme, bundle);
    return disc * payoff.derivative(bundle.x_path.back()) * bundle.jac_path.back();
  });
  return finish(DeltaMethod::pathwise, values, config, std::nullopt, watch);
}

namespace {

std::string fd_label(FdScheme scheme, double h) {
  std::ostringstream s;
  s << (scheme == FdScheme::central ? "fd_central" : "fd_forward") << "(h=" << h << ")";
  return s.str();
}

template <class Fn>
MethodRow run_row(std::string label, Fn&& fn) {
  MethodRow row;
  row.label = std::move(label);
  try {
    row.result = fn();
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

std::vector<MethodRow> compare_methods(const ModelSpec& model, const Payoff& payoff, const EstimatorConfig& config,
                                       const std::vector<double>& h_list, const CompareOptions& options) {
  std::vector<MethodRow> rows;
  if (options.include_malliavin) rows.push_back(run_row("malliavin", [&] { return estimate_delta_malliavin(model, payoff, config); }));
  for (double h : h_list) {
    rows.push_back(
        run_row(fd_label(options.fd_scheme, h), [&] { return estimate_delta_fd(model, payoff, config, h, options.fd_scheme); }));
  }
  if (options.include_pathwise && payoff.differentiable()) {
    rows.push_back(run_row("pathwise", [&] { return estimate_delta_pathwise(model, payoff, config); }));
  }
  return rows;
}

void write_estimates_csv(std::ostream& out, const std::vector<MethodRow>& rows) {
  out << "method,n_paths,n_steps,h,estimate,std_error,seed,wall_time_ms\n" << std::setprecision(17);
  for (const auto& row : rows) {
    if (!row.result) continue;
    const DeltaEstimate& e = row.result->estimate;
    out << to_string(e.method) << ',' << e.n_paths << ',' << e.n_steps << ',';
    if (e.h) out << *e.h;
    out << ',' << e.value << ',' << e.std_error << ',' << e.seed << ',' << e.wall_time_ms << '\n';
  }
}

void write_trace_csv(std::ostream& out, const std::vector<MethodRow>& rows) {
  out << "method,n,estimate,std_error\n" << std::setprecision(17);
  for (const auto& row : rows) {
    if (!row.result) continue;
    for (const auto& point : row.result->trace.checkpoints) {
      out << row.label << ',' << point.n << ',' << point.estimate << ',' << point.std_error << '\n';
    }
  }
}

}  // namespace mfbel
