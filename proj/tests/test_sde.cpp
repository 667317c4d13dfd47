#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mfbel/models.hpp"
#include "mfbel/sde.hpp"

using namespace mfbel;

namespace {

const Parameters kRiccati{{"mu", 1.0}, {"q", 0.5}, {"sigma", 0.8}};

double mean_liouville_error(const ModelSpec& m, std::size_t steps, LiouvilleForm form) {
  const TimeGrid grid(1.0, steps);
  const auto curves = m.analytic_curves(1.0, grid);
  double total = 0.0;
  for (std::size_t p = 0; p < 200; ++p) {
    const NoiseGrid noise = gen_noise(5, p, grid);
    const auto x = simulate_x(m, curves, 1.0, grid, noise);
    total += liouville_det_check(simulate_tangent(m.dynamics, curves, x, grid, noise), grid, noise, form);
  }
  return total / 200;
}

}  // namespace

TEST_CASE("geometric Brownian motion: Y = X / x and J = Y bitwise") {
  const ModelSpec m = build_model("classical_gbm", {{"mu", 0.1}, {"sigma", 0.4}});
  const TimeGrid grid(1.0, 64);
  const double x = 1.7;
  const auto curves = m.analytic_curves(x, grid);
  for (Scheme scheme : {Scheme::euler, Scheme::log_euler}) {
    const NoiseGrid noise = gen_noise(3, 0, grid);
    const PathBundle b = simulate_path(m, curves, x, grid, noise, scheme);
    REQUIRE(b.x_path.size() == grid.nodes());
    CHECK(b.jac_path == b.tangent.y);
    for (std::size_t i = 0; i < grid.nodes(); ++i) CHECK(b.tangent.y[i] == doctest::Approx(b.x_path[i] / x));
    CHECK(std::all_of(b.tangent.alpha.begin(), b.tangent.alpha.end(), [](double a) { return a == 0.0; }));
  }
}

TEST_CASE("log-Euler is exact for constant coefficients") {
  const double mu = 0.1, sigma = 0.4, x = 1.7;
  const ModelSpec m = build_model("classical_gbm", {{"mu", mu}, {"sigma", sigma}});
  const TimeGrid grid(2.0, 16);
  const NoiseGrid noise = gen_noise(9, 4, grid);
  const auto path = simulate_x(m, m.analytic_curves(x, grid), x, grid, noise, Scheme::log_euler);
  const double w = noise.terminal();
  CHECK(path.back() == doctest::Approx(x * std::exp((mu - 0.5 * sigma * sigma) * 2.0 + sigma * w)).epsilon(1e-13));
}

TEST_CASE("Jacobian equals the CRN bump of the whole system, curves included") {
  const TimeGrid grid(1.0, 128);
  for (const char* id : {"bs_dividend", "mean_drift", "mean_vol"}) {
    const ModelSpec m = build_model(id, kRiccati);
    for (Scheme scheme : {Scheme::euler, Scheme::log_euler}) {
      const double x = 0.9, delta = 1e-5 * x;
      const NoiseGrid noise = gen_noise(2, 1, grid);
      const PathBundle b = simulate_path(m, m.analytic_curves(x, grid), x, grid, noise, scheme);
      const double fd = (simulate_x(m, m.analytic_curves(x + delta, grid), x + delta, grid, noise, scheme).back() -
                         simulate_x(m, m.analytic_curves(x - delta, grid), x - delta, grid, noise, scheme).back()) /
                        (2 * delta);
      CHECK_MESSAGE(b.jac_path.back() == doctest::Approx(fd).epsilon(1e-6), id);
      CHECK(b.jac_path.back() != doctest::Approx(b.tangent.y.back()).epsilon(1e-3));
    }
  }
}

TEST_CASE("Liouville reference: realized variation converges at order one") {
  const ModelSpec m = build_model("mean_vol", parameter_set('A').params);
  const double coarse = mean_liouville_error(m, 256, LiouvilleForm::realized_variation);
  const double fine = mean_liouville_error(m, 1024, LiouvilleForm::realized_variation);
  CHECK(std::log(coarse / fine) / std::log(4.0) >= 0.8);

  const double calendar_coarse = mean_liouville_error(m, 256, LiouvilleForm::calendar_time);
  const double calendar_fine = mean_liouville_error(m, 1024, LiouvilleForm::calendar_time);
  CHECK(calendar_fine > fine);
  CHECK(calendar_fine < calendar_coarse);

  // The printed sign does not converge: its exponent is off by sum B^2 dt.
  CHECK(mean_liouville_error(m, 1024, LiouvilleForm::plus_half_b2) > 0.3);
}

TEST_CASE("A = 0, B constant: Y is the stochastic exponential of sigma W") {
  const double sigma = 0.5;
  const ModelSpec m = build_model("classical_gbm", {{"mu", 0.0}, {"sigma", sigma}});
  const TimeGrid grid(1.0, 32);
  const NoiseGrid noise = gen_noise(1, 0, grid);
  const auto curves = m.analytic_curves(1.0, grid);
  const auto x = simulate_x(m, curves, 1.0, grid, noise, Scheme::log_euler);
  const TangentPath tp = simulate_tangent(m.dynamics, curves, x, grid, noise, Scheme::log_euler);
  CHECK(tp.y.back() == doctest::Approx(std::exp(sigma * noise.terminal() - 0.5 * sigma * sigma)).epsilon(1e-13));
  CHECK(liouville_det_check(tp, grid, noise, LiouvilleForm::calendar_time) < 1e-13);
}

TEST_CASE("degenerate tangent and ellipticity guards") {
  const ModelSpec m = build_model("classical_gbm", {{"mu", 0.0}, {"sigma", 0.5}});
  const TimeGrid grid(1.0, 4);
  NoiseGrid noise = gen_noise(1, 0, grid);
  noise.increments[1] = -2.0;  // 1 + 0.5 * (-2) = 0
  const auto curves = m.analytic_curves(1.0, grid);
  const std::vector<double> x(grid.nodes(), 1.0);  // B = sigma does not depend on the state
  try {
    (void)simulate_tangent(m.dynamics, curves, x, grid, noise);
    FAIL("expected TangentDegenerate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::tangent_degenerate);
  }

  const ModelSpec mv = build_model("mean_vol", parameter_set('A').params);
  try {
    (void)checked_diffusion(mv.dynamics, mv.ellipticity_floor, 0.0, 1.0, 0.0);
    FAIL("expected EllipticityFloor");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ellipticity_floor);
  }
  CHECK(checked_diffusion(mv.dynamics, mv.ellipticity_floor, 0.0, 1.0, 2.0) == doctest::Approx(1.6));
}

TEST_CASE("path CSV dump") {
  const ModelSpec m = build_model("classical_gbm", {{"mu", 0.0}, {"sigma", 0.5}});
  const TimeGrid grid(1.0, 3);
  const NoiseGrid noise = gen_noise(1, 0, grid);
  const PathBundle b = simulate_path(m, m.analytic_curves(1.0, grid), 1.0, grid, noise);
  std::ostringstream out;
  write_path_csv(out, b, grid);
  const std::string text = out.str();
  CHECK(text.rfind("t,W,X,Y,J\n0,0,1,1,1\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}
