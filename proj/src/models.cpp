#include "mfbel/models.hpp"

#include <cmath>

#include "mfbel/meanfield.hpp"
#include "mfbel/stats.hpp"

namespace mfbel {

const char* to_string(PayoffKind kind) noexcept {
  switch (kind) {
    case PayoffKind::call: return "call";
    case PayoffKind::digital: return "digital";
    case PayoffKind::identity: return "identity";
    case PayoffKind::constant: return "constant";
  }
  return "unknown";
}

PayoffKind parse_payoff_kind(const std::string& name) {
  for (auto kind : {PayoffKind::call, PayoffKind::digital, PayoffKind::identity, PayoffKind::constant}) {
    if (name == to_string(kind)) return kind;
  }
  fail(ErrorCode::invalid_argument, "unknown payoff '" + name + "'");
}

double Payoff::evaluate(double x) const noexcept {
  switch (kind) {
    case PayoffKind::call: return x > strike ? x - strike : 0.0;
    case PayoffKind::digital: return x >= strike ? 1.0 : 0.0;
    case PayoffKind::identity: return x;
    case PayoffKind::constant: return 1.0;
  }
  return 0.0;
}

double Payoff::derivative(double x) const {
  switch (kind) {
    case PayoffKind::call: return x > strike ? 1.0 : 0.0;
    case PayoffKind::digital:
      fail(ErrorCode::payoff_not_differentiable, "digital payoff has no derivative at the strike");
    case PayoffKind::identity: return 1.0;
    case PayoffKind::constant: return 0.0;
  }
  return 0.0;
}

namespace {

void identity_law(ModelSpec& m) {
  m.phi = [](double x) { return x; };
  m.d_phi = [](double) { return 1.0; };
  m.psi = m.phi;
  m.d_psi = m.d_phi;
}

Coefficients gbm_coefficients(double drift, double vol) {
  Coefficients c;
  c.b = [drift](double, double x, double) { return x * drift; };
  c.d1_b = [drift](double, double, double) { return drift; };
  c.d2_b = [](double, double, double) { return 0.0; };
  c.sigma = [vol](double, double x, double) { return vol * x; };
  c.d1_sigma = [vol](double, double, double) { return vol; };
  c.d2_sigma = [](double, double, double) { return 0.0; };
  c.geometric = true;
  c.drift_depends_on_law = false;
  c.diffusion_depends_on_law = false;
  return c;
}

double positive(const Parameters& params, const std::string& name) {
  const double v = params.get(name);
  require(v > 0.0, "parameter '" + name + "' must be positive");
  return v;
}

}  // namespace

ModelSpec build_model(const std::string& id, const Parameters& params) {
  ModelSpec m;
  m.id = id;
  m.parameters = params;
  identity_law(m);

  if (id == "classical_gbm") {
    const double mu = params.get("mu");
    const double vol = positive(params, "sigma");
    m.dynamics = gbm_coefficients(mu, vol);
    m.analytic_curves = [mu](double x, const TimeGrid& grid) { return analytic_curves_exponential(mu, x, grid); };
    // u(T) = 1 here, so the mean-drift weight is exactly the classical one.
    m.closed_form_weight = WeightMethod::mean_drift;
    return m;
  }

  if (id == "bs_dividend") {
    const double mu = params.get("mu");
    const double q = params.get("q");
    const double vol = positive(params, "sigma");
    const double r = params.get_or("r", 0.05);
    m.parameters.set("r", r);
    Coefficients c = gbm_coefficients(mu, vol);
    c.b = [mu, q](double, double x, double rho) { return x * (mu - q * rho); };
    c.d1_b = [mu, q](double, double, double rho) { return mu - q * rho; };
    c.d2_b = [q](double, double x, double) { return -q * x; };
    c.drift_depends_on_law = true;
    m.dynamics = c;
    m.pricing_dynamics = gbm_coefficients(r, vol);
    m.discount_rate = r;
    m.analytic_curves = [mu, q](double x, const TimeGrid& grid) { return analytic_curves_riccati(mu, q, x, grid); };
    m.closed_form_weight = WeightMethod::bs_dividend;
    return m;
  }

  if (id == "mean_drift") {
    const double mu = params.get("mu");
    const double vol = positive(params, "sigma");
    const std::string shape = params.option_or("f", "linear");
    ScalarFn f, f_prime;
    if (shape == "linear") {
      const double q = params.get("q");
      f = [mu, q](double rho) { return mu - q * rho; };
      f_prime = [q](double) { return -q; };
    } else if (shape == "tanh") {
      f = [mu](double rho) { return mu * std::tanh(rho); };
      f_prime = [mu](double rho) {
        const double th = std::tanh(rho);
        return mu * (1.0 - th * th);
      };
    } else {
      fail(ErrorCode::invalid_argument, "mean_drift option f must be 'linear' or 'tanh', got '" + shape + "'");
    }
    Coefficients c = gbm_coefficients(mu, vol);
    c.b = [f](double, double x, double rho) { return x * f(rho); };
    c.d1_b = [f](double, double, double rho) { return f(rho); };
    c.d2_b = [f_prime](double, double x, double rho) { return x * f_prime(rho); };
    c.drift_depends_on_law = true;
    m.dynamics = c;
    m.analytic_curves = [f, f_prime](double x, const TimeGrid& grid) {
      return analytic_curves_ode(f, f_prime, x, grid);
    };
    m.closed_form_weight = WeightMethod::mean_drift;
    return m;
  }

  if (id == "mean_vol") {
    const double mu = params.get("mu");
    const double vol = positive(params, "sigma");
    Coefficients c = gbm_coefficients(mu, vol);
    c.sigma = [vol](double, double x, double pi) { return vol * x * pi; };
    c.d1_sigma = [vol](double, double, double pi) { return vol * pi; };
    c.d2_sigma = [vol](double, double x, double) { return vol * x; };
    c.diffusion_depends_on_law = true;
    m.dynamics = c;
    m.analytic_curves = [mu](double x, const TimeGrid& grid) { return analytic_curves_exponential(mu, x, grid); };
    m.closed_form_weight = WeightMethod::mean_vol;
    return m;
  }

  fail(ErrorCode::unknown_model, "unknown model id '" + id + "'");
}

ParameterSet parameter_set(char which) {
  ParameterSet set;
  if (which == 'A' || which == 'a') {
    set.params = {{"sigma", 0.8}, {"mu", 1.0}};
    set.x0 = 1.0;
    set.strike = 2.0;
    set.horizon = 1.0;
  } else if (which == 'B' || which == 'b') {
    set.params = {{"sigma", 1.2}, {"mu", 1.0}};
    set.x0 = 0.5;
    set.strike = 0.7;
    set.horizon = 1.0;
  } else {
    fail(ErrorCode::invalid_argument, std::string("unknown parameter set '") + which + "'");
  }
  return set;
}

double mean_vol_variance(double x, double mu, double horizon) noexcept {
  if (mu == 0.0) return x * x * horizon;
  return x * x * std::expm1(2.0 * mu * horizon) / (2.0 * mu);
}

namespace {

/// Lognormal terminal law with mean `forward` and log-variance `s^2`, both
/// functions of x; derivatives carried alongside.
struct Lognormal {
  double forward;
  double d_forward;
  double s;
  double d_s;
};

std::optional<PriceDelta> lognormal_price_delta(const Lognormal& ln, const Payoff& payoff) {
  switch (payoff.kind) {
    case PayoffKind::identity: return PriceDelta{ln.forward, ln.d_forward};
    case PayoffKind::constant: return PriceDelta{1.0, 0.0};
    case PayoffKind::call:
    case PayoffKind::digital: break;
  }
  const double K = payoff.strike;
  if (!(K > 0.0) || !(ln.s > 0.0)) return std::nullopt;
  const double d2 = (std::log(ln.forward / K) - 0.5 * ln.s * ln.s) / ln.s;
  const double d1 = d2 + ln.s;
  if (payoff.kind == PayoffKind::call) {
    const double price = ln.forward * normal_cdf(d1) - K * normal_cdf(d2);
    // forward * n(d1) = K * n(d2) removes the d1', d2' terms except through s'
    const double delta = normal_cdf(d1) * ln.d_forward + K * normal_pdf(d2) * ln.d_s;
    return PriceDelta{price, delta};
  }
  const double d_d2 = (ln.d_forward / ln.forward - ln.s * ln.d_s) / ln.s - d2 * ln.d_s / ln.s;
  return PriceDelta{normal_cdf(d2), normal_pdf(d2) * d_d2};
}

}  // namespace

std::optional<PriceDelta> closed_form_price_and_delta(const ModelSpec& model, const Payoff& payoff, double x,
                                                      double horizon) {
  if (!(x > 0.0) || !(horizon > 0.0)) return std::nullopt;
  const Parameters& p = model.parameters;
  const double vol = p.get("sigma");
  const double T = horizon;

  if (model.id == "classical_gbm") {
    const double growth = std::exp(p.get("mu") * T);
    return lognormal_price_delta({x * growth, growth, vol * std::sqrt(T), 0.0}, payoff);
  }
  if (model.id == "bs_dividend") {
    const double r = model.discount_rate;
    const double growth = std::exp(r * T);
    auto out = lognormal_price_delta({x * growth, growth, vol * std::sqrt(T), 0.0}, payoff);
    if (out) {
      const double discount = std::exp(-r * T);
      out->price *= discount;
      out->delta *= discount;
    }
    return out;
  }
  if (model.id == "mean_vol") {
    const double mu = p.get("mu");
    const double growth = std::exp(mu * T);
    const double c = std::sqrt(mean_vol_variance(1.0, mu, T));
    return lognormal_price_delta({x * growth, growth, vol * x * c, vol * c}, payoff);
  }
  if (model.id == "mean_drift") {
    // f(rho_t) is deterministic, so X_T is lognormal around rho_T(x).
    const MeanFieldCurves curves = model.analytic_curves(x, TimeGrid(T, 4096));
    return lognormal_price_delta({curves.rho.back(), curves.drho_dx.back(), vol * std::sqrt(T), 0.0}, payoff);
  }
  return std::nullopt;
}

}  // namespace mfbel
