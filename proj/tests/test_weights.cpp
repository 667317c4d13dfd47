#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mfbel/estimators.hpp"
#include "mfbel/sde.hpp"
#include "mfbel/stats.hpp"
#include "mfbel/weights.hpp"

using namespace mfbel;

namespace {

const Parameters kRiccati{{"mu", 1.0}, {"q", 0.5}, {"sigma", 0.8}};

EstimatorConfig small_config(double x0, std::size_t n_paths, std::size_t n_steps) {
  EstimatorConfig c;
  c.x0 = x0;
  c.n_paths = n_paths;
  c.n_steps = n_steps;
  c.seed = 21;
  return c;
}

}  // namespace

TEST_CASE("u(T) is exactly one without law dependence") {
  const ModelSpec m = build_model("classical_gbm", {{"mu", 0.2}, {"sigma", 0.3}});
  const TimeGrid grid(1.0, 64);
  for (std::size_t p = 0; p < 20; ++p) {
    const NoiseGrid noise = gen_noise(4, p, grid);
    const auto corr = correction_u(simulate_path(m, m.analytic_curves(1.0, grid), 1.0, grid, noise), grid);
    CHECK(corr.u_final == 1.0);
    CHECK(corr.lebesgue_part == 0.0);
    CHECK(corr.ito_part == 0.0);
  }
}

TEST_CASE("mean-drift u(T) is deterministic: 1 + x sum f'(rho) drho/dx dt") {
  const ModelSpec m = build_model("mean_drift", kRiccati);
  const TimeGrid grid(1.0, 256);
  const double x = 1.2;
  const auto curves = m.analytic_curves(x, grid);
  double expected = 0.0;
  for (std::size_t i = 0; i < grid.steps(); ++i) expected += -0.5 * curves.drho_dx[i] * grid.dt();
  expected = 1.0 + x * expected;
  for (Scheme scheme : {Scheme::euler, Scheme::log_euler}) {
    for (std::size_t p = 0; p < 10; ++p) {
      const NoiseGrid noise = gen_noise(4, p, grid);
      const auto corr = correction_u(simulate_path(m, curves, x, grid, noise, scheme), grid);
      CHECK(corr.u_final == doctest::Approx(expected).epsilon(1e-12));
      CHECK(corr.ito_part == 0.0);
    }
  }
  // The quadrature approaches 1 + x int f'(rho) drho/dx ds at first order.
  const TimeGrid fine(1.0, 4096);
  const auto fc = m.analytic_curves(x, fine);
  std::vector<double> integrand(fine.nodes());
  for (std::size_t i = 0; i < fine.nodes(); ++i) integrand[i] = -0.5 * fc.drho_dx[i];
  const double exact = 1.0 + x * trapezoid(integrand, fine.dt());
  CHECK(std::abs(expected - exact) < 2.0 * grid.dt());
}

TEST_CASE("mean-vol u(T) = 1 - sigma^2 sum rho^2 dt + sigma F and D_s u = sigma rho_s") {
  const auto set = parameter_set('B');
  const ModelSpec m = build_model("mean_vol", set.params);
  const double sigma = set.params.get("sigma");
  const TimeGrid grid(1.0, 64);
  const auto curves = m.analytic_curves(set.x0, grid);
  const NoiseGrid noise = gen_noise(8, 2, grid);
  const PathBundle b = simulate_path(m, curves, set.x0, grid, noise);
  const auto corr = correction_u(b, grid);
  const GaussianPair pair = gaussian_pair(curves, noise, grid);
  CHECK(corr.u_final == doctest::Approx(1.0 - sigma * sigma * pair.compensator + sigma * pair.F).epsilon(1e-12));

  const auto dsu = dsu_profile(m.dynamics, m, curves, b, grid, default_dsu_eps(grid), Scheme::euler);
  for (std::size_t s = 0; s < grid.steps(); ++s) CHECK(dsu[s] == doctest::Approx(sigma * curves.rho[s]).epsilon(1e-6));
  CHECK(dsu_noise_bump(m.dynamics, m, curves, set.x0, grid, noise, 10, default_dsu_eps(grid), Scheme::euler) ==
        doctest::Approx(dsu[10]).epsilon(1e-12));

  const ModelSpec gbm = build_model("classical_gbm", {{"mu", 0.2}, {"sigma", 0.3}});
  const PathBundle gb = simulate_path(gbm, gbm.analytic_curves(1.0, grid), 1.0, grid, noise);
  const auto zeros = dsu_profile(gbm.dynamics, gbm, gbm.analytic_curves(1.0, grid), gb, grid, 1e-6, Scheme::euler);
  CHECK(std::all_of(zeros.begin(), zeros.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("generic weight reduces to the closed-form mean-vol weight") {
  const auto set = parameter_set('A');
  const ModelSpec m = build_model("mean_vol", set.params);
  for (Scheme scheme : {Scheme::euler, Scheme::log_euler}) {
    EstimatorConfig c = small_config(set.x0, 40, 64);
    c.scheme = scheme;
    const auto generic = malliavin_weights(m, c, WeightMethod::generic_bel2);
    const auto closed = malliavin_weights(m, c, WeightMethod::mean_vol);
    for (std::size_t i = 0; i < generic.size(); ++i) CHECK(generic[i] == doctest::Approx(closed[i]).epsilon(1e-6));
  }
}

TEST_CASE("generic weight reduces to W_T / (sigma x T) for GBM") {
  const ModelSpec m = build_model("classical_gbm", {{"mu", 0.2}, {"sigma", 0.3}});
  const TimeGrid grid(1.0, 32);
  const auto curves = m.analytic_curves(2.0, grid);
  const NoiseGrid noise = gen_noise(3, 3, grid);
  const PathBundle b = simulate_path(m, curves, 2.0, grid, noise, Scheme::log_euler);
  const std::vector<double> dsu(grid.steps(), 0.0);
  const auto w = weight_generic_bel2(m.dynamics, m, curves, b, correction_u(b, grid), grid, dsu);
  CHECK(w.value == doctest::Approx(noise.terminal() / (0.3 * 2.0)).epsilon(1e-12));
}

TEST_CASE("weights have zero mean") {
  const std::size_t n = 20000;
  struct Case {
    const char* id;
    Parameters params;
    WeightMethod method;
    std::size_t paths;
  };
  const Case cases[] = {
      {"bs_dividend", kRiccati, WeightMethod::bs_dividend, n},
      {"mean_drift", kRiccati, WeightMethod::mean_drift, n},
      {"mean_vol", parameter_set('A').params, WeightMethod::mean_vol, n},
      {"bs_dividend", kRiccati, WeightMethod::generic_bel2, 300},
  };
  for (const auto& c : cases) {
    const auto s = summarize(malliavin_weights(build_model(c.id, c.params), small_config(1.0, c.paths, 64), c.method));
    CHECK_MESSAGE(std::abs(s.mean) < 3.0 * s.std_error, c.id, " ", to_string(c.method));
  }
}

TEST_CASE("dividend weight conventions") {
  const ModelSpec m = build_model("bs_dividend", kRiccati);
  const TimeGrid grid(1.0, 64);
  const auto curves = m.analytic_curves(1.0, grid);
  const DividendParams p{1.0, 0.5, 0.8, 0.05};

  SUBCASE("q = 0 gives the classical W_T / (x sigma T)") {
    const NoiseGrid noise = gen_noise(1, 0, grid);
    const PathBundle b = simulate_path(m.simulation_dynamics(), m, curves, 1.5, grid, noise);
    const auto w = weight_bs_dividend(b, curves, {1.0, 0.0, 0.8, 0.05}, grid, DividendConvention::literal);
    CHECK(w.value == doctest::Approx(noise.terminal() / (1.5 * 0.8)));
  }
  SUBCASE("the literal reading is biased, the risk-neutral one is not") {
    std::vector<double> rn, lit;
    for (std::size_t i = 0; i < 20000; ++i) {
      const NoiseGrid noise = gen_noise(2, i, grid);
      const PathBundle b = simulate_path(m.simulation_dynamics(), m, curves, 1.0, grid, noise);
      rn.push_back(weight_bs_dividend(b, curves, p, grid, DividendConvention::risk_neutral).value);
      lit.push_back(weight_bs_dividend(b, curves, p, grid, DividendConvention::literal).value);
    }
    const auto a = summarize(rn);
    const auto b = summarize(lit);
    CHECK(std::abs(a.mean) < 3 * a.std_error);
    CHECK(std::abs(b.mean) > 5 * b.std_error);
  }
}

TEST_CASE("mean-drift weight refuses law-dependent diffusions") {
  const ModelSpec m = build_model("mean_vol", parameter_set('A').params);
  const TimeGrid grid(1.0, 8);
  const NoiseGrid noise = gen_noise(1, 0, grid);
  const PathBundle b = simulate_path(m, m.analytic_curves(1.0, grid), 1.0, grid, noise);
  try {
    (void)weight_mean_drift(b, correction_u(b, grid), grid, 0.8);
    FAIL("expected WeightNotApplicable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::weight_not_applicable);
  }
}

TEST_CASE("Gaussian pair moments") {
  const double x = 0.5, mu = 1.0;
  const TimeGrid grid(1.0, 128);
  const auto curves = analytic_curves_exponential(mu, x, grid);
  const GaussianPair probe = gaussian_pair(curves, gen_noise(1, 0, grid), grid);
  CHECK(probe.sigma_fg == 1.0);
  CHECK(probe.sigma_ff == doctest::Approx(x * x * std::expm1(2 * mu) / (2 * mu)).epsilon(1e-4));
  CHECK(probe.sigma_gg == doctest::Approx(-std::expm1(-2 * mu) / (2 * mu * x * x)).epsilon(1e-4));
  CHECK(probe.determinant() > 0.0);

  std::vector<double> fg, ff, gg;
  for (std::size_t p = 0; p < 40000; ++p) {
    const GaussianPair g = gaussian_pair(curves, gen_noise(6, p, grid), grid);
    fg.push_back(g.F * g.G);
    ff.push_back(g.F * g.F);
    gg.push_back(g.G * g.G);
  }
  const auto cov = summarize(fg), var_f = summarize(ff), var_g = summarize(gg);
  CHECK(std::abs(cov.mean - 1.0) < 5 * cov.std_error);
  CHECK(std::abs(var_f.mean - probe.sigma_ff) < 5 * var_f.std_error);
  CHECK(std::abs(var_g.mean - probe.sigma_gg) < 5 * var_g.std_error);
}

TEST_CASE("digital threshold reproduces the exercise event under log-Euler") {
  const auto set = parameter_set('B');
  const ModelSpec m = build_model("mean_vol", set.params);
  const TimeGrid grid(1.0, 64);
  const auto curves = m.analytic_curves(set.x0, grid);
  const DigitalParams dp{set.strike, 1.0, set.params.get("sigma"), set.x0, 1.0};
  const double d = digital_threshold(dp, curves, grid);
  std::size_t agree = 0, exercised = 0;
  for (std::size_t p = 0; p < 2000; ++p) {
    const NoiseGrid noise = gen_noise(7, p, grid);
    const double xt = simulate_x(m, curves, set.x0, grid, noise, Scheme::log_euler).back();
    const double f = gaussian_pair(curves, noise, grid).F;
    agree += (xt >= set.strike) == (f >= d);
    exercised += xt >= set.strike;
  }
  CHECK(agree == 2000);
  CHECK(exercised > 500);
  CHECK(exercised < 1500);

  DigitalParams higher = dp;
  higher.K *= 1.5;
  CHECK(digital_threshold(higher, curves, grid) > d);
}
