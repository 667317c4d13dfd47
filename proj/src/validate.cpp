#include "mfbel/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mfbel/estimators.hpp"
#include "mfbel/meanfield.hpp"
#include "mfbel/models.hpp"
#include "mfbel/rng.hpp"
#include "mfbel/sde.hpp"
#include "mfbel/stats.hpp"
#include "mfbel/weights.hpp"

namespace mfbel {

ValidationLevel parse_validation_level(const std::string& name) {
  if (name == "fast") return ValidationLevel::fast;
  if (name == "full") return ValidationLevel::full;
  fail(ErrorCode::invalid_argument, "validation level must be 'fast' or 'full', got '" + name + "'");
}

const char* to_string(ValidationLevel level) noexcept { return level == ValidationLevel::full ? "full" : "fast"; }

bool ValidationReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<std::string> ValidationReport::failed_names() const {
  std::vector<std::string> names;
  for (const auto& c : checks) {
    if (!c.passed) names.push_back(c.name);
  }
  return names;
}

namespace {

struct Scale {
  std::size_t n_paths;
  std::size_t n_steps;
  std::size_t generic_paths;
  std::size_t generic_steps;
  std::size_t tangent_paths;
  std::size_t particles;
  std::size_t particle_steps;
};

constexpr Scale kFast{20000, 128, 400, 128, 200, 20000, 64};
constexpr Scale kFull{100000, 512, 5000, 512, 1000, 100000, 512};

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

class Suite {
 public:
  Suite(const ValidationOptions& options, std::ostream* progress)
      : options_(options), scale_(options.level == ValidationLevel::full ? kFull : kFast), progress_(progress) {
    if (!options_.inject_fault.empty()) parse_fault();
  }

  ValidationReport run();

 private:
  void check(const std::string& name, const std::function<Outcome()>& body);
  void parse_fault();
  [[nodiscard]] ModelSpec model(const std::string& id, const Parameters& params) const;
  [[nodiscard]] EstimatorConfig config(double x0, std::size_t n_paths, std::size_t n_steps) const;

  void rng_checks();
  void derivative_checks();
  void meanfield_checks();
  void tangent_checks();
  void correction_checks();
  void weight_checks();
  void oracle_checks();
  void fd_instability_checks();

  ValidationOptions options_;
  Scale scale_;
  std::ostream* progress_;
  std::string fault_model_;
  std::string fault_partial_;
  ValidationReport report_;
};

void Suite::parse_fault() {
  const auto dot = options_.inject_fault.find('.');
  require(dot != std::string::npos, "fault must look like 'model.partial'");
  fault_model_ = options_.inject_fault.substr(0, dot);
  fault_partial_ = options_.inject_fault.substr(dot + 1);
  require(std::find(std::begin(kModelIds), std::end(kModelIds), fault_model_) != std::end(kModelIds),
          "fault names an unknown model '" + fault_model_ + "'");
  require(fault_partial_ == "d1_b" || fault_partial_ == "d2_b" || fault_partial_ == "d1_sigma" ||
              fault_partial_ == "d2_sigma",
          "fault partial must be one of d1_b, d2_b, d1_sigma, d2_sigma");
}

ModelSpec Suite::model(const std::string& id, const Parameters& params) const {
  ModelSpec m = build_model(id, params);
  if (id != fault_model_) return m;
  Coefficients& c = m.dynamics;
  auto& target = fault_partial_ == "d1_b"   ? c.d1_b
                 : fault_partial_ == "d2_b" ? c.d2_b
                 : fault_partial_ == "d1_sigma" ? c.d1_sigma
                                                : c.d2_sigma;
  target = [original = target](double t, double x, double v) { return 1.01 * original(t, x, v); };
  return m;
}

EstimatorConfig Suite::config(double x0, std::size_t n_paths, std::size_t n_steps) const {
  EstimatorConfig c;
  c.x0 = x0;
  c.n_paths = n_paths;
  c.n_steps = n_steps;
  c.seed = options_.seed;
  c.threads = options_.threads;
  return c;
}

void Suite::check(const std::string& name, const std::function<Outcome()>& body) {
  CheckResult result;
  result.name = name;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Outcome o = body();
    result.passed = o.passed;
    result.detail = o.detail;
  } catch (const std::exception& e) {
    result.passed = false;
    result.detail = std::string("threw ") + e.what();
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (progress_) {
    *progress_ << (result.passed ? "[PASS] " : "[FAIL] ") << result.name << ": " << result.detail << " ("
               << std::fixed << std::setprecision(1) << result.seconds << " s)" << std::defaultfloat << '\n'
               << std::flush;
  }
  report_.checks.push_back(std::move(result));
}

const Parameters kGbm{{"mu", 0.05}, {"sigma", 0.3}};
const Parameters kRiccati{{"mu", 1.0}, {"q", 0.5}, {"sigma", 0.8}};

Outcome within_se(const DeltaEstimate& e, double oracle, double k) {
  const double z = (e.value - oracle) / e.std_error;
  return {std::abs(z) <= k, "estimate " + fmt(e.value) + " oracle " + fmt(oracle) + " z " + fmt(z)};
}

void Suite::rng_checks() {
  check("rng.philox_known_answer", [] {
    const Philox4x32 zero(0);
    const Philox4x32 ones(~0ULL);
    const auto a = zero({0, 0, 0, 0});
    const auto b = ones({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
    const bool ok = a == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u} &&
                    b == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu};
    return Outcome{ok, ok ? "both vectors match" : "output differs from the reference vectors"};
  });
  check("rng.thread_invariance", [this] {
    const ModelSpec m = model("mean_vol", parameter_set('A').params);
    EstimatorConfig c = config(1.0, 3000, 64);
    c.threads = 1;
    const auto one = malliavin_weights(m, c);
    c.threads = 3;
    const auto three = malliavin_weights(m, c);
    const bool ok = one == three;
    return Outcome{ok, ok ? "identical weights for 1 and 3 threads" : "weights depend on the thread count"};
  });
}

void Suite::derivative_checks() {
  std::vector<DerivativeSample> samples;
  for (double t : {0.0, 0.5, 1.0}) {
    for (double x : {0.5, 1.0, 2.0}) {
      for (double law : {0.5, 1.5}) samples.push_back({t, x, law, law});
    }
  }
  Parameters tanh_drift = kRiccati;
  tanh_drift.set_option("f", "tanh");
  const std::pair<const char*, Parameters> cases[] = {
      {"classical_gbm", kGbm},     {"bs_dividend", kRiccati},
      {"mean_drift", kRiccati},    {"mean_vol", parameter_set('A').params},
  };
  auto run = [&](const std::string& name, const std::string& id, const Parameters& params) {
    check(name, [&, id, params] {
      const DerivativeReport r = validate_derivatives(model(id, params), samples, 1e-5);
      std::string flagged;
      for (const auto& c : r.checks) {
        if (c.flagged) flagged += (flagged.empty() ? "" : ", ") + c.name;
      }
      return Outcome{r.passed(), "max discrepancy " + fmt(r.max_discrepancy()) +
                                     (flagged.empty() ? "" : " flagged " + flagged)};
    });
  };
  for (const auto& [id, params] : cases) run(std::string("derivatives.") + id, id, params);
  run("derivatives.mean_drift_tanh", "mean_drift", tanh_drift);
}

void Suite::meanfield_checks() {
  check("meanfield.riccati_vs_rk4", [] {
    const TimeGrid grid(1.0, 512);
    const auto closed = analytic_curves_riccati(1.0, 0.5, 1.0, grid);
    const auto ode = analytic_curves_ode([](double r) { return 1.0 - 0.5 * r; }, [](double) { return -0.5; }, 1.0,
                                         grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      worst = std::max(worst, std::abs(ode.rho[i] - closed.rho[i]) / closed.rho[i]);
      worst = std::max(worst, std::abs(ode.drho_dx[i] - closed.drho_dx[i]) / closed.drho_dx[i]);
    }
    return Outcome{worst <= 1e-8, "max relative gap " + fmt(worst)};
  });
  check("meanfield.particle_vs_riccati", [this] {
    const TimeGrid grid(1.0, scale_.particle_steps);
    ParticleSettings s;
    s.n_particles = scale_.particles;
    s.threads = options_.threads;
    s.sensitivities = false;
    const auto particle = particle_fixed_point(model("bs_dividend", kRiccati), 1.0, grid, s);
    const double distance = sup_distance(particle, analytic_curves_riccati(1.0, 0.5, 1.0, grid));
    const double bound = 4.0 * (grid.dt() + 1.0 / std::sqrt(static_cast<double>(s.n_particles)));
    return Outcome{distance <= bound, "sup distance " + fmt(distance) + " bound " + fmt(bound)};
  });
  check("meanfield.no_convergence_guard", [this] {
    ParticleSettings s;
    s.n_particles = 1000;
    s.max_iters = 1;
    s.tol = 1e-14;
    s.sensitivities = false;
    try {
      (void)particle_fixed_point(model("bs_dividend", kRiccati), 1.0, TimeGrid(1.0, 16), s);
    } catch (const NoConvergence& e) {
      return Outcome{true, "raised after " + std::to_string(e.iterations()) + " iteration"};
    }
    return Outcome{false, "max_iters = 1 with tol 1e-14 did not raise"};
  });
}

void Suite::tangent_checks() {
  auto bump_check = [this](const std::string& id, const Parameters& params, double x) {
    check("tangent.jacobian_vs_bump." + id, [this, id, params, x] {
      const ModelSpec m = model(id, params);
      const TimeGrid grid(1.0, 512);
      const double delta = 1e-5 * x;
      const auto base = m.analytic_curves(x, grid);
      const auto up = m.analytic_curves(x + delta, grid);
      const auto down = m.analytic_curves(x - delta, grid);
      std::vector<double> errors;
      for (std::size_t p = 0; p < scale_.tangent_paths; ++p) {
        const NoiseGrid noise = gen_noise(options_.seed, p, grid);
        const PathBundle b = simulate_path(m, base, x, grid, noise);
        const double fd = (simulate_x(m, up, x + delta, grid, noise).back() -
                           simulate_x(m, down, x - delta, grid, noise).back()) /
                          (2 * delta);
        errors.push_back(std::abs(b.jac_path.back() - fd) / std::max(std::abs(fd), 1e-12));
      }
      std::nth_element(errors.begin(), errors.begin() + errors.size() / 2, errors.end());
      const double median = errors[errors.size() / 2];
      return Outcome{median <= 1e-3, "median relative error " + fmt(median)};
    });
  };
  bump_check("mean_vol", parameter_set('B').params, 0.5);
  bump_check("bs_dividend", kRiccati, 1.0);
  bump_check("mean_drift", kRiccati, 1.0);

  check("tangent.liouville_order.mean_vol", [this] {
    const ModelSpec m = model("mean_vol", parameter_set('A').params);
    std::vector<double> log_dt, log_err;
    for (std::size_t steps : {256, 512, 1024}) {
      const TimeGrid grid(1.0, steps);
      const auto curves = m.analytic_curves(1.0, grid);
      double total = 0.0;
      const std::size_t n = 200;
      for (std::size_t p = 0; p < n; ++p) {
        const NoiseGrid noise = gen_noise(options_.seed, p, grid);
        const auto x_path = simulate_x(m, curves, 1.0, grid, noise);
        total += liouville_det_check(simulate_tangent(m.dynamics, curves, x_path, grid, noise), grid, noise);
      }
      log_dt.push_back(std::log(grid.dt()));
      log_err.push_back(std::log(total / n));
    }
    const double mx = (log_dt[0] + log_dt[1] + log_dt[2]) / 3;
    const double my = (log_err[0] + log_err[1] + log_err[2]) / 3;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < 3; ++i) {
      sxy += (log_dt[i] - mx) * (log_err[i] - my);
      sxx += (log_dt[i] - mx) * (log_dt[i] - mx);
    }
    const double order = sxy / sxx;
    return Outcome{order >= 0.8, "empirical order " + fmt(order)};
  });
}

void Suite::correction_checks() {
  check("correction.u_is_one.classical_gbm", [this] {
    const ModelSpec m = model("classical_gbm", kGbm);
    const TimeGrid grid(1.0, 128);
    const auto curves = m.analytic_curves(1.0, grid);
    for (std::size_t p = 0; p < 100; ++p) {
      const NoiseGrid noise = gen_noise(options_.seed, p, grid);
      const double u = correction_u(simulate_path(m, curves, 1.0, grid, noise), grid).u_final;
      if (u != 1.0) return Outcome{false, "path " + std::to_string(p) + " has u(T) = " + fmt(u)};
    }
    return Outcome{true, "u(T) == 1 on 100 paths"};
  });
  check("correction.u_deterministic.mean_drift", [this] {
    const ModelSpec m = model("mean_drift", kRiccati);
    const TimeGrid grid(1.0, 512);
    const double x = 1.0;
    const auto curves = m.analytic_curves(x, grid);
    double quadrature = 0.0;
    for (std::size_t i = 0; i < grid.steps(); ++i) quadrature += -0.5 * curves.drho_dx[i] * grid.dt();
    quadrature = 1.0 + x * quadrature;
    double worst = 0.0;
    for (std::size_t p = 0; p < 100; ++p) {
      const NoiseGrid noise = gen_noise(options_.seed, p, grid);
      const double u = correction_u(simulate_path(m, curves, x, grid, noise), grid).u_final;
      worst = std::max(worst, std::abs(u - quadrature) / std::abs(quadrature));
    }
    return Outcome{worst <= 1e-8, "max relative gap to the quadrature " + fmt(worst)};
  });
}

void Suite::weight_checks() {
  const auto set_a = parameter_set('A');
  auto zero_mean = [this](const std::string& name, const ModelSpec& m, const EstimatorConfig& c,
                          std::optional<WeightMethod> method) {
    check("weights.zero_mean." + name, [&, m, c, method] {
      const auto s = summarize(malliavin_weights(m, c, method));
      const double z = s.mean / s.std_error;
      return Outcome{std::abs(z) <= 3.0, "mean " + fmt(s.mean) + " z " + fmt(z)};
    });
  };
  zero_mean("bs_dividend", model("bs_dividend", kRiccati), config(1.0, scale_.n_paths, scale_.n_steps),
            WeightMethod::bs_dividend);
  zero_mean("mean_drift", model("mean_drift", kRiccati), config(1.0, scale_.n_paths, scale_.n_steps),
            WeightMethod::mean_drift);
  zero_mean("mean_vol", model("mean_vol", set_a.params), config(1.0, scale_.n_paths, scale_.n_steps),
            WeightMethod::mean_vol);
  zero_mean("generic_bel2", model("mean_vol", set_a.params),
            config(1.0, scale_.generic_paths, scale_.generic_steps), WeightMethod::generic_bel2);

  check("weights.representation.mean_vol", [this, &set_a] {
    const ModelSpec m = model("mean_vol", set_a.params);
    const EstimatorConfig c = config(1.0, scale_.tangent_paths, scale_.generic_steps);
    const auto generic = malliavin_weights(m, c, WeightMethod::generic_bel2);
    const auto closed = malliavin_weights(m, c, WeightMethod::mean_vol);
    double gap = 0.0;
    for (std::size_t i = 0; i < generic.size(); ++i) gap += std::abs(generic[i] - closed[i]) / std::abs(closed[i]);
    gap /= static_cast<double>(generic.size());
    const TimeGrid grid = c.grid();
    const double bound = 5.0 * (grid.dt() + default_dsu_eps(grid));
    return Outcome{gap <= bound, "mean relative gap " + fmt(gap) + " bound " + fmt(bound)};
  });

  check("weights.gaussian_pair", [this, &set_a] {
    const double x = set_a.x0, mu = set_a.params.get("mu");
    const TimeGrid grid(1.0, scale_.n_steps);
    const auto curves = analytic_curves_exponential(mu, x, grid);
    std::vector<double> fg(scale_.n_paths), ff(scale_.n_paths);
    for (std::size_t p = 0; p < scale_.n_paths; ++p) {
      const GaussianPair g = gaussian_pair(curves, gen_noise(options_.seed, p, grid), grid);
      fg[p] = g.F * g.G;
      ff[p] = g.F * g.F;
    }
    const auto cov = summarize(fg);
    const auto var = summarize(ff);
    const double var_exact = x * x * std::expm1(2 * mu) / (2 * mu);
    const double z_cov = (cov.mean - 1.0) / cov.std_error;
    const double z_var = (var.mean - var_exact) / var.std_error;
    return Outcome{std::abs(z_cov) <= 5.0 && std::abs(z_var) <= 5.0,
                   "Cov(F,G) " + fmt(cov.mean) + " z " + fmt(z_cov) + ", Var(F) " + fmt(var.mean) + " z " +
                       fmt(z_var)};
  });
}

void Suite::oracle_checks() {
  struct Case {
    std::string name;
    std::string id;
    Parameters params;
    Payoff payoff;
    double x0;
  };
  std::vector<Case> cases = {
      {"classical_gbm.call", "classical_gbm", kGbm, {PayoffKind::call, 1.0}, 1.0},
      {"bs_dividend_q0.call", "bs_dividend", {{"mu", 1.0}, {"q", 0.0}, {"sigma", 0.8}}, {PayoffKind::call, 1.0}, 1.0},
      {"bs_dividend.call", "bs_dividend", kRiccati, {PayoffKind::call, 1.0}, 1.0},
      {"mean_drift.call", "mean_drift", kRiccati, {PayoffKind::call, 1.0}, 1.0},
  };
  for (char set : {'A', 'B'}) {
    const auto ps = parameter_set(set);
    for (PayoffKind kind : {PayoffKind::call, PayoffKind::digital}) {
      cases.push_back({std::string("mean_vol.") + set + "." + to_string(kind), "mean_vol", ps.params,
                       {kind, ps.strike}, ps.x0});
    }
  }
  for (const auto& c : cases) {
    check("oracle." + c.name, [this, c] {
      const ModelSpec m = model(c.id, c.params);
      const auto exact = closed_form_price_and_delta(build_model(c.id, c.params), c.payoff, c.x0, 1.0);
      require(exact.has_value(), "no closed form for this case");
      const auto r = estimate_delta_malliavin(m, c.payoff, config(c.x0, scale_.n_paths, scale_.n_steps));
      return within_se(r.estimate, exact->delta, 3.0);
    });
  }

  check("estimators.consistency.classical_gbm", [this] {
    const ModelSpec m = model("classical_gbm", kGbm);
    const Payoff call{PayoffKind::call, 1.0};
    const EstimatorConfig c = config(1.0, scale_.n_paths, scale_.n_steps);
    const DeltaEstimate e[] = {estimate_delta_malliavin(m, call, c).estimate,
                               estimate_delta_fd(m, call, c, 1e-3, FdScheme::central).estimate,
                               estimate_delta_pathwise(m, call, c).estimate};
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        const double se = std::hypot(e[i].std_error, e[j].std_error);
        worst = std::max(worst, std::abs(e[i].value - e[j].value) / se);
      }
    }
    return Outcome{worst <= 3.0, "largest pairwise gap " + fmt(worst) + " combined SE"};
  });
}

void Suite::fd_instability_checks() {
  for (char set : {'A', 'B'}) {
    check(std::string("fd_instability.") + set, [this, set] {
      const auto ps = parameter_set(set);
      const ModelSpec m = model("mean_vol", ps.params);
      const Payoff digital{PayoffKind::digital, ps.strike};
      const EstimatorConfig c = config(ps.x0, scale_.n_paths, scale_.n_steps);
      const double fd = estimate_delta_fd(m, digital, c, 0.01, FdScheme::forward).estimate.variance;
      const double mall = estimate_delta_malliavin(m, digital, c).estimate.variance;
      return Outcome{fd >= 5.0 * mall, "FD variance " + fmt(fd) + " / Malliavin variance " + fmt(mall) + " = " +
                                           fmt(fd / mall)};
    });
  }
}

ValidationReport Suite::run() {
  rng_checks();
  derivative_checks();
  meanfield_checks();
  tangent_checks();
  correction_checks();
  weight_checks();
  oracle_checks();
  if (options_.level == ValidationLevel::full) fd_instability_checks();
  return std::move(report_);
}

}  // namespace

ValidationReport run_validation(const ValidationOptions& options, std::ostream* progress) {
  return Suite(options, progress).run();
}

}  // namespace mfbel
