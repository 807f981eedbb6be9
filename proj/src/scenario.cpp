#include "seiprd/scenario.hpp"

#include "seiprd/errors.hpp"
#include "seiprd/integrator.hpp"
#include "seiprd/io.hpp"

#include <cmath>

namespace seiprd {

namespace {

constexpr int lockdown_day = 36;  // 2020-03-24

}  // namespace

std::vector<double> knot_schedule(double first, double second, double spacing, double through)
{
  if (!(second > first) || !(spacing > 0.0)) {
    throw DomainError("knot schedule needs second > first and positive spacing");
  }
  std::vector<double> knots{first, second};
  while (knots.back() < through) {
    knots.push_back(knots.back() + spacing);
  }
  return knots;
}

ModelSpec england_spec(std::int64_t population, int window_last)
{
  ModelSpec spec;
  spec.population = population;
  spec.beta_knots = knot_schedule(0.0, lockdown_day, 7.0, window_last);
  spec.rho_admissions_knots =
      knot_schedule(lockdown_day, lockdown_day + 84.0, 84.0, window_last);
  spec.rho_calls_knots = knot_schedule(lockdown_day, lockdown_day + 28.0, 28.0, window_last);
  return spec;
}

Scenario desk_scenario()
{
  Scenario s;
  s.name = "desk";
  s.spec.population = 1'000'000;
  s.spec.beta_knots = {0.0, 24.0, 48.0, 72.0, 96.0, 120.0};
  s.spec.rho_admissions_knots = {0.0, 120.0};
  s.spec.rho_calls_knots = {0.0, 60.0, 120.0};
  s.calibration_first = 1;
  s.calibration_last = 120;
  s.horizon = 21;
  s.generating_sigma_beta = 0.05;

  const ParamLayout layout(s.spec);
  std::vector<double> v(layout.size());
  v[layout.alpha1] = 0.9995;
  v[layout.alpha2] = 0.5;
  const double beta[] = {0.55, 0.48, 0.40, 0.33, 0.37, 0.42};
  for (std::size_t j = 0; j < layout.n_beta(); ++j) {
    v[layout.beta(j)] = beta[j];
  }
  v[layout.latent_period()] = 4.0;
  v[layout.infectious_period()] = 4.0;
  v[layout.pending_period()] = 13.0;
  v[layout.ifr()] = 0.009;
  v[layout.inv_phi_deaths()] = 0.05;
  v[layout.inv_phi_admissions()] = 0.04;
  v[layout.inv_phi_calls()] = 0.08;
  v[layout.rho_admissions(0)] = 0.05;
  v[layout.rho_admissions(1)] = 0.04;
  v[layout.rho_calls(0)] = 0.25;
  v[layout.rho_calls(1)] = 0.35;
  v[layout.rho_calls(2)] = 0.3;
  s.truth = ParamVector(layout, std::move(v));

  s.chains.n_chains = 6;
  s.chains.n_samples = 300'000;
  s.chains.n_warmup = 100'000;
  s.chains.thin = 781;
  s.chains.metric = ProposalMetric::dense;
  s.chains.init_intervals = default_init_intervals(layout);
  return s;
}

SurveillanceData simulate_synthetic(const TransmissionParams& tp, const ObservationParams& op,
                                    int first_day, int last_day, std::uint64_t seed,
                                    int substeps_per_day)
{
  tp.validate();
  op.validate();
  if (first_day < 0 || last_day < first_day) {
    throw DomainError("simulation window must satisfy 0 <= first <= last");
  }
  const auto trajectory = integrate_daily(tp, IntegratorConfig{substeps_per_day, last_day});
  const auto means = latent_means(trajectory, tp, op);

  Rng rng = chain_rng(seed, 0);
  SurveillanceData data;
  for (int day = first_day; day <= last_day; ++day) {
    if (means.deaths.contains(day)) {
      data.deaths.push_back(day, sample_nb(means.deaths.at(day), op.phi_deaths, rng));
    }
    data.admissions.push_back(day, sample_nb(means.admissions.at(day), op.phi_admissions, rng));
    if (!is_weekend(day)) {
      data.calls.push_back(day, sample_nb(means.calls.at(day), op.phi_calls, rng));
    }
  }
  return data;
}

std::vector<InitInterval> default_init_intervals(const ParamLayout& layout)
{
  std::vector<InitInterval> table(layout.size());
  table[layout.alpha1] = {InitKind::unit_interval, 0.995, 0.9999};
  table[layout.alpha2] = {InitKind::unit_interval, 0.3, 0.7};
  for (std::size_t j = 0; j < layout.n_beta(); ++j) {
    table[layout.beta(j)] = {InitKind::positive, 0.3, 0.7};
  }
  table[layout.latent_period()] = {InitKind::positive, 3.0, 5.0};
  table[layout.infectious_period()] = {InitKind::positive, 3.0, 5.0};
  table[layout.pending_period()] = {InitKind::positive, 10.0, 16.0};
  table[layout.ifr()] = {InitKind::unit_interval, 0.005, 0.012};
  return table;
}

std::vector<ParamVector> constrained_draws(const PosteriorDraws& draws, const ParamLayout& layout)
{
  std::vector<ParamVector> out;
  out.reserve(draws.total());
  for (std::size_t c = 0; c < draws.n_chains; ++c) {
    for (std::size_t i = 0; i < draws.n_draws; ++i) {
      out.push_back(to_constrained(draws.draw(c, i), layout).params);
    }
  }
  return out;
}

Calibration calibrate(const ModelSpec& spec, const SurveillanceData& data, const PriorConfig& prior,
                      const ChainConfig& chains, int substeps_per_day)
{
  const Posterior posterior(spec, data, prior, substeps_per_day);
  Calibration out;
  out.draws = run_chains([&posterior](std::span<const double> u) { return posterior(u); },
                         posterior.dimension(), chains);
  out.params = constrained_draws(out.draws, posterior.layout());
  out.divergences = posterior.divergences();
  return out;
}

}  // namespace seiprd
