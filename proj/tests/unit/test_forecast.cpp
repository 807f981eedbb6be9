#include "seiprd/errors.hpp"
#include "seiprd/forecast.hpp"
#include "seiprd/integrator.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace seiprd;

namespace {

ModelSpec spec()
{
  ModelSpec s;
  s.population = 1'000'000;
  s.beta_knots = {0.0, 40.0, 80.0};
  s.rho_admissions_knots = {0.0, 80.0};
  s.rho_calls_knots = {0.0, 80.0};
  return s;
}

ParamVector draw(double beta_scale, double ifr, double inv_phi)
{
  const ParamLayout l(spec());
  std::vector<double> v(l.size(), 0.1);
  v[l.alpha1] = 0.9995;
  v[l.alpha2] = 0.5;
  v[l.beta(0)] = 0.55 * beta_scale;
  v[l.beta(1)] = 0.35 * beta_scale;
  v[l.beta(2)] = 0.3 * beta_scale;
  v[l.latent_period()] = 4.0;
  v[l.infectious_period()] = 4.0;
  v[l.pending_period()] = 13.0;
  v[l.ifr()] = ifr;
  v[l.inv_phi_deaths()] = inv_phi;
  return ParamVector(l, v);
}

}  // namespace

TEST_CASE("single negative binomial component")
{
  const auto p = PredictiveDistribution::from_components({{1.0, 1.0}});
  CHECK(p.pmf(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p.pmf(2) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(p.mean() == 1.0);
  CHECK(p.variance() == doctest::Approx(2.0));
  CHECK(p.cdf(p.truncation()) >= 1.0 - truncation_tail);
  CHECK(p.cdf(p.truncation() - 1) < 1.0 - truncation_tail);
}

TEST_CASE("mixture pmf equals the average of component pmfs")
{
  const auto a = oracle::nb_pmf_table(3.0, 2.0, 200);
  const auto b = oracle::nb_pmf_table(40.0, 0.7, 200);
  const auto p = PredictiveDistribution::from_components({{3.0, 2.0}, {40.0, 0.7}});
  for (std::int64_t k = 0; k <= 200; ++k) {
    const auto i = static_cast<std::size_t>(k);
    CHECK(p.pmf(k) == doctest::Approx(0.5 * (a[i] + b[i])).epsilon(1e-11));
  }
  // beyond K_max the pmf is computed from the components directly
  const auto beyond = p.truncation() + 5;
  CHECK(p.pmf(beyond) > 0.0);
  CHECK(p.pmf(beyond) < 1e-9);
}

TEST_CASE("idempotent mixture and law of total variance")
{
  const auto one = PredictiveDistribution::from_components({{1.0, 1.0}});
  const auto two = PredictiveDistribution::from_components({{1.0, 1.0}, {1.0, 1.0}});
  for (std::int64_t k = 0; k < 30; ++k) {
    CHECK(two.pmf(k) == doctest::Approx(one.pmf(k)).epsilon(1e-14));
  }
  const auto mix = PredictiveDistribution::from_components({{1.0, 1.0}, {3.0, 1.0}});
  CHECK(mix.mean() == doctest::Approx(2.0));
  CHECK(mix.variance() == doctest::Approx(8.0));
}

TEST_CASE("tabulated moments and quantiles")
{
  const auto p = PredictiveDistribution::from_components({{12.0, 3.0}, {30.0, 8.0}, {5.0, 50.0}});
  double mean = 0.0;
  double previous = 0.0;
  for (std::int64_t k = 0; k <= p.truncation(); ++k) {
    mean += static_cast<double>(k) * p.pmf(k);
    CHECK(p.cdf(k) >= previous);
    previous = p.cdf(k);
  }
  CHECK(std::abs(mean - p.mean()) <= 1e-6 * p.mean());

  const auto median = p.quantile(0.5);
  CHECK(p.cdf(median) >= 0.5);
  CHECK(p.cdf(median - 1) < 0.5);
  CHECK(p.quantile(0.0) == 0);
  CHECK(p.quantile(0.025) <= p.quantile(0.975));
  CHECK_THROWS_AS(p.quantile(1.5), DomainError);
  CHECK_THROWS_AS(p.quantile(-0.1), DomainError);
}

TEST_CASE("finite pmf distributions")
{
  const auto p = PredictiveDistribution::from_pmf({0.25, 0.25, 0.25, 0.25});
  CHECK(p.mean() == 1.5);
  CHECK(p.variance() == 1.25);
  CHECK(p.pmf(7) == 0.0);
  CHECK(p.cdf(7) == 1.0);
  CHECK(p.tail_mass() == 0.0);
  CHECK_THROWS_AS(PredictiveDistribution::from_pmf({0.5, 0.4}), DomainError);
}

TEST_CASE("default horizon gives 21 daily distributions")
{
  ForecastOptions options;
  CHECK(options.horizon == 21);
  options.first_day = 90;
  const std::vector<ParamVector> draws{draw(1.0, 0.01, 0.05)};
  const auto f = posterior_predictive(draws, spec(), ForecastMode::posterior_samples, options);
  CHECK(f.days.size() == 21);
  CHECK(f.first_day == 90);
}

TEST_CASE("one draw gives identical forecasts in both modes")
{
  ForecastOptions options;
  options.first_day = 60;
  const std::vector<ParamVector> draws{draw(1.0, 0.01, 0.05)};
  const auto a = posterior_predictive(draws, spec(), ForecastMode::posterior_samples, options);
  const auto b = posterior_predictive(draws, spec(), ForecastMode::point_estimate, options);
  for (std::size_t d = 0; d < a.days.size(); ++d) {
    const auto& x = a.days[d].components();
    const auto& y = b.days[d].components();
    REQUIRE(x.size() == 1);
    CHECK(x[0].mean == y[0].mean);
    CHECK(x[0].dispersion == y[0].dispersion);
  }
}

TEST_CASE("components follow each draw's trajectory")
{
  ForecastOptions options;
  options.first_day = 70;
  options.horizon = 5;
  const auto d = draw(1.1, 0.012, 0.2);
  const auto f = posterior_predictive(std::vector<ParamVector>{d}, spec(),
                                      ForecastMode::posterior_samples, options);
  const auto traj = integrate_daily(to_transmission_params(d, spec()), {4, 74});
  for (int day = 70; day <= 74; ++day) {
    const auto& c = f.days[static_cast<std::size_t>(day - 70)].components().front();
    CHECK(c.mean == doctest::Approx(traj[day].D() - traj[day - 1].D()).epsilon(1e-12));
    CHECK(c.dispersion == doctest::Approx(5.0));
  }
}

TEST_CASE("point mode averages parameters on the constrained scale")
{
  const std::vector<ParamVector> draws{draw(1.0, 0.01, 0.05), draw(1.2, 0.014, 0.15)};
  const auto mean = posterior_mean(draws);
  CHECK(mean[mean.layout.ifr()] == doctest::Approx(0.012));
  CHECK(mean[mean.layout.inv_phi_deaths()] == doctest::Approx(0.1));

  ForecastOptions options;
  options.first_day = 50;
  const auto point = posterior_predictive(draws, spec(), ForecastMode::point_estimate, options);
  const auto direct = posterior_predictive(std::vector<ParamVector>{mean}, spec(),
                                           ForecastMode::posterior_samples, options);
  CHECK(point.days.front().components().size() == 1);
  CHECK(point.days.front().components()[0].mean == direct.days.front().components()[0].mean);
  CHECK(point.days.front().components()[0].dispersion == doctest::Approx(10.0));
}

TEST_CASE("diverging draws are dropped and counted")
{
  auto wild = draw(1.0, 0.01, 0.05);
  const auto& l = wild.layout;
  for (std::size_t j = 0; j < l.n_beta(); ++j) {
    wild[l.beta(j)] = 1e5;
  }
  ForecastOptions options;
  options.first_day = 30;
  const std::vector<ParamVector> draws{draw(1.0, 0.01, 0.05), wild};
  const auto f = posterior_predictive(draws, spec(), ForecastMode::posterior_samples, options);
  CHECK(f.dropped_components == 1);
  CHECK(f.days.front().components().size() == 1);
  CHECK_THROWS_AS(posterior_predictive(std::vector<ParamVector>{wild}, spec(),
                                       ForecastMode::posterior_samples, options),
                  NumericError);
}

TEST_CASE("thinning the mixture to a component budget")
{
  std::vector<ParamVector> draws;
  for (int i = 0; i < 10; ++i) {
    draws.push_back(draw(1.0 + 0.01 * i, 0.01, 0.05));
  }
  ForecastOptions options;
  options.first_day = 30;
  options.horizon = 2;
  options.max_components = 4;
  const auto f = posterior_predictive(draws, spec(), ForecastMode::posterior_samples, options);
  CHECK(f.days.front().components().size() == 4);
}

TEST_CASE("forecast argument errors")
{
  ForecastOptions options;
  CHECK_THROWS_AS(posterior_predictive({}, spec(), ForecastMode::posterior_samples, options),
                  DomainError);
  options.horizon = 0;
  CHECK_THROWS_AS(posterior_predictive(std::vector<ParamVector>{draw(1.0, 0.01, 0.05)}, spec(),
                                       ForecastMode::posterior_samples, options),
                  DomainError);
}
