#include "seiprd/errors.hpp"
#include "seiprd/integrator.hpp"
#include "seiprd/priors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace seiprd;

namespace {

ModelSpec small_spec()
{
  ModelSpec spec;
  spec.population = 1'000'000;
  spec.beta_knots = {0.0, 30.0, 60.0, 90.0, 120.0};
  spec.rho_admissions_knots = {0.0, 60.0};
  spec.rho_calls_knots = {0.0, 40.0, 80.0};
  return spec;
}

ParamVector typical(const ParamLayout& layout)
{
  std::vector<double> v(layout.size());
  v[layout.alpha1] = 0.999;
  v[layout.alpha2] = 0.4;
  for (std::size_t j = 0; j < layout.n_beta(); ++j) {
    v[layout.beta(j)] = 0.5 - 0.03 * static_cast<double>(j);
  }
  v[layout.latent_period()] = 4.5;
  v[layout.infectious_period()] = 3.5;
  v[layout.pending_period()] = 12.0;
  v[layout.ifr()] = 0.01;
  v[layout.inv_phi_deaths()] = 0.1;
  v[layout.inv_phi_admissions()] = 0.2;
  v[layout.inv_phi_calls()] = 0.3;
  for (std::size_t k = 0; k < layout.n_rho_admissions(); ++k) {
    v[layout.rho_admissions(k)] = 0.05;
  }
  for (std::size_t l = 0; l < layout.n_rho_calls(); ++l) {
    v[layout.rho_calls(l)] = 0.3 + 0.1 * static_cast<double>(l);
  }
  return ParamVector(layout, std::move(v));
}

// Reference densities written from the textbook formulas.
double beta_lpdf(double x, double a, double b)
{
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log(1.0 - x) -
         (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double normal_lpdf(double x, double m, double s)
{
  const double z = (x - m) / s;
  return -0.5 * z * z - std::log(s * std::sqrt(2.0 * std::numbers::pi));
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double truncated_lpdf(double x, double m, double s)
{
  return normal_lpdf(x, m, s) - std::log(std_normal_cdf(m / s));
}

double oracle_log_prior_without_walk(const ParamVector& p)
{
  const auto& l = p.layout;
  double lp = beta_lpdf(p[l.alpha1], 5.0, 0.5) + beta_lpdf(p[l.alpha2], 1.1, 1.1);
  lp += std::log(2.0) + normal_lpdf(p[l.beta(0)], 0.0, 0.5);
  lp += truncated_lpdf(p[l.latent_period()], 4.0, 3.0);
  lp += truncated_lpdf(p[l.infectious_period()], 5.0, 4.0);
  lp += truncated_lpdf(p[l.pending_period()], 13.0, 4.0);
  lp += beta_lpdf(p[l.ifr()], 5.7, 624.1);
  for (std::size_t i : {l.inv_phi_deaths(), l.inv_phi_admissions(), l.inv_phi_calls()}) {
    lp += std::log(5.0) - 5.0 * p[i];
  }
  for (std::size_t k = 0; k < l.n_rho_admissions(); ++k) {
    lp += beta_lpdf(p[l.rho_admissions(k)], 1.1, 1.1);
  }
  for (std::size_t k = 0; k < l.n_rho_calls(); ++k) {
    lp += beta_lpdf(p[l.rho_calls(k)], 1.1, 1.1);
  }
  return lp;
}

double oracle_log_prior(const ParamVector& p, const PriorConfig& c)
{
  double lp = oracle_log_prior_without_walk(p);
  const auto& l = p.layout;
  for (std::size_t j = 1; j < l.n_beta(); ++j) {
    lp += truncated_lpdf(p[l.beta(j)], p[l.beta(j - 1)], c.sigma_beta);
  }
  return lp;
}

}  // namespace

TEST_CASE("layout order and names")
{
  const ParamLayout l(small_spec());
  CHECK(l.n_beta() == 5);
  CHECK(l.size() == 2 + 5 + 4 + 3 + 2 + 3);
  CHECK(l.name(l.alpha1) == "alpha1");
  CHECK(l.name(l.beta(0)) == "beta_1");
  CHECK(l.name(l.ifr()) == "omega");
  CHECK(l.name(l.inv_phi_calls()) == "inv_phi_calls");
  CHECK(l.name(l.rho_calls(2)) == "rho_calls_3");
  CHECK(l.support(l.latent_period()) == Support::positive);
  CHECK(l.support(l.rho_admissions(0)) == Support::unit_interval);
}

TEST_CASE("log prior matches the reference densities")
{
  const ParamLayout l(small_spec());
  PriorConfig cfg;
  cfg.sigma_beta = 0.05;
  const auto p = typical(l);
  CHECK(log_prior(p, cfg) == doctest::Approx(oracle_log_prior(p, cfg)).epsilon(1e-12));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(l.size());
    for (auto& v : x) {
      v = u(rng);
    }
    const auto q = to_constrained(x, l).params;
    CHECK(log_prior(q, cfg) == doctest::Approx(oracle_log_prior(q, cfg)).epsilon(1e-10));
  }
}

TEST_CASE("exponential prior on the inverse dispersion")
{
  const ParamLayout l(small_spec());
  PriorConfig cfg;
  auto p = typical(l);
  auto q = p;
  p[l.inv_phi_deaths()] = 0.2;
  q[l.inv_phi_deaths()] = 1.0;  // contributes log 5 - 5
  const double at_point_two = log_prior(p, cfg) - log_prior(q, cfg) + (std::log(5.0) - 5.0);
  CHECK(at_point_two == doctest::Approx(0.60944).epsilon(1e-5));
}

TEST_CASE("random-walk term at its mode")
{
  const ParamLayout l(2, 1, 1);
  PriorConfig cfg;
  cfg.sigma_beta = 0.025;
  std::vector<double> v(l.size(), 0.5);
  v[l.beta(0)] = 1.0;
  v[l.beta(1)] = 1.0;
  v[l.latent_period()] = 4.0;
  v[l.infectious_period()] = 5.0;
  v[l.pending_period()] = 13.0;
  v[l.ifr()] = 0.01;
  v[l.inv_phi_deaths()] = v[l.inv_phi_admissions()] = v[l.inv_phi_calls()] = 0.1;
  const ParamVector p(l, v);
  const double walk = log_prior(p, cfg) - oracle_log_prior_without_walk(p);
  CHECK(walk == doctest::Approx(-std::log(0.025 * std::sqrt(2.0 * std::numbers::pi))).epsilon(1e-9));
}

TEST_CASE("log prior is minus infinity off the support")
{
  const ParamLayout l(small_spec());
  PriorConfig cfg;
  auto p = typical(l);
  p[l.ifr()] = 1.2;
  CHECK(log_prior(p, cfg) == -INFINITY);
  p = typical(l);
  p[l.beta(2)] = -0.1;
  CHECK(log_prior(p, cfg) == -INFINITY);
  p = typical(l);
  p[l.pending_period()] = 0.0;
  CHECK(log_prior(p, cfg) == -INFINITY);
  CHECK(std::isfinite(log_prior(typical(l), cfg)));
}

TEST_CASE("random walk couples only adjacent knots")
{
  const ParamLayout l(small_spec());
  PriorConfig cfg;
  cfg.sigma_beta = 0.05;
  const auto base = typical(l);
  const double h = 1e-5;
  auto gradient = [&](const ParamVector& p, std::size_t j) {
    auto up = p;
    auto down = p;
    up[l.beta(j)] += h;
    down[l.beta(j)] -= h;
    return (log_prior(up, cfg) - log_prior(down, cfg)) / (2.0 * h);
  };
  for (std::size_t j = 0; j < l.n_beta(); ++j) {
    const double g = gradient(base, j);
    for (std::size_t k = 0; k < l.n_beta(); ++k) {
      if (k == j) {
        continue;
      }
      auto moved = base;
      moved[l.beta(k)] += 0.02;
      const double change = std::abs(gradient(moved, j) - g);
      if (k + 1 == j || j + 1 == k) {
        CHECK(change > 1.0);
      } else {
        CHECK(change < 1e-6);
      }
    }
  }
}

TEST_CASE("transform values and per-component jacobians")
{
  const ParamLayout l(small_spec());
  std::vector<double> v(l.size());
  std::size_t n_unit = 0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l.support(i) == Support::positive) {
      v[i] = 1.0;
    } else {
      v[i] = 0.5;
      ++n_unit;
    }
  }
  const auto u = to_unconstrained(ParamVector(l, v));
  for (double x : u.values) {
    CHECK(x == doctest::Approx(0.0).epsilon(1e-15));
  }
  CHECK(u.log_jacobian == doctest::Approx(static_cast<double>(n_unit) * std::log(0.25)));
  CHECK(to_constrained(u.values, l).log_jacobian == doctest::Approx(u.log_jacobian));
}

TEST_CASE("transform roundtrips")
{
  const ParamLayout l(small_spec());
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(l.size());
    for (auto& v : x) {
      v = u(rng);
    }
    const auto p = to_constrained(x, l).params;
    const auto back = to_constrained(to_unconstrained(p).values, l).params;
    for (std::size_t k = 0; k < l.size(); ++k) {
      CHECK(std::abs(back[k] - p[k]) <= 1e-12 * std::abs(p[k]));
    }
  }
}

TEST_CASE("log jacobian matches finite differences of the inverse map")
{
  const ParamLayout l(small_spec());
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x(l.size());
    for (auto& v : x) {
      v = u(rng);
    }
    double numeric = 0.0;
    const double h = 1e-6;
    for (std::size_t k = 0; k < l.size(); ++k) {
      auto up = x;
      auto down = x;
      up[k] += h;
      down[k] -= h;
      const double dx =
          to_constrained(up, l).params[k] - to_constrained(down, l).params[k];
      numeric += std::log(dx / (2.0 * h));
    }
    CHECK(to_constrained(x, l).log_jacobian == doctest::Approx(numeric).epsilon(1e-6));
  }
}

TEST_CASE("posterior decomposes into prior, likelihood and jacobian")
{
  const auto spec = small_spec();
  const ParamLayout l(spec);
  const auto truth = typical(l);
  const auto tp = to_transmission_params(truth, spec);
  const auto op = to_observation_params(truth, spec);
  CHECK(op.phi_deaths == doctest::Approx(10.0));

  SurveillanceData data;
  for (int day = 1; day <= 60; day += 3) {
    data.deaths.push_back(day, day / 10);
    data.admissions.push_back(day, day);
    data.calls.push_back(day, 3 * day);
  }
  PriorConfig cfg;
  const Posterior post(spec, data, cfg);
  const auto u = to_unconstrained(truth);
  const auto t = post.terms(u.values);

  const auto traj = integrate_daily(tp, {4, 58});
  const double lik = log_likelihood(data, latent_means(traj, tp, op), op);
  CHECK(t.prior == doctest::Approx(log_prior(truth, cfg)).epsilon(1e-12));
  CHECK(t.likelihood == doctest::Approx(lik).epsilon(1e-12));
  CHECK(t.log_jacobian == doctest::Approx(u.log_jacobian).epsilon(1e-12));
  CHECK(t.total == doctest::Approx(t.prior + t.likelihood + t.log_jacobian).epsilon(1e-14));
  CHECK(post(u.values) == post(u.values));

  SurveillanceData changed = data;
  changed.deaths = CountSeries{};
  for (const auto& o : data.deaths) {
    changed.deaths.push_back(o.day, o.day == 31 ? o.count + 5 : o.count);
  }
  const auto t2 = Posterior(spec, changed, cfg).terms(u.values);
  CHECK(t2.prior == t.prior);
  CHECK(t2.log_jacobian == t.log_jacobian);
  CHECK(t2.likelihood != t.likelihood);
}

TEST_CASE("diverging trajectories give minus infinity and are counted")
{
  const auto spec = small_spec();
  const ParamLayout l(spec);
  auto p = typical(l);
  for (std::size_t j = 0; j < l.n_beta(); ++j) {
    p[l.beta(j)] = 1e4;
  }
  SurveillanceData data;
  data.deaths.push_back(50, 1);
  const Posterior post(spec, data, PriorConfig{});
  CHECK(post(to_unconstrained(p).values) == -INFINITY);
  CHECK(post.divergences() == 1);
}
