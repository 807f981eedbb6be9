#include "seiprd/forecast.hpp"

#include "seiprd/errors.hpp"
#include "seiprd/integrator.hpp"
#include "seiprd/observation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace seiprd {

namespace {

// Recurrence steps between exact re-evaluations of the log pmf.
constexpr std::int64_t reanchor_every = 64;

double mixture_pmf(const std::vector<NbComponent>& components, std::int64_t k)
{
  double sum = 0.0;
  for (const auto& c : components) {
    sum += std::exp(nb_log_pmf(k, c.mean, c.dispersion));
  }
  return sum / static_cast<double>(components.size());
}

}  // namespace

PredictiveDistribution PredictiveDistribution::from_components(std::vector<NbComponent> components)
{
  if (components.empty()) {
    throw DomainError("predictive distribution needs at least one component");
  }
  for (const auto& c : components) {
    if (!(c.mean > 0.0) || !(c.dispersion > 0.0) || !std::isfinite(c.mean) ||
        !std::isfinite(c.dispersion)) {
      throw DomainError("mixture components need finite mean > 0 and dispersion > 0");
    }
  }

  PredictiveDistribution out;
  out.components_ = std::move(components);
  const auto& comps = out.components_;
  const double weight = 1.0 / static_cast<double>(comps.size());

  // Walk k upward, carrying each component's log pmf by the ratio recurrence.
  std::vector<double> log_p(comps.size());
  std::vector<double> log_ratio(comps.size());
  for (std::size_t s = 0; s < comps.size(); ++s) {
    log_p[s] = nb_log_pmf(0, comps[s].mean, comps[s].dispersion);
    log_ratio[s] = std::log(comps[s].mean) - std::log(comps[s].mean + comps[s].dispersion);
  }

  double cumulative = 0.0;
  for (std::int64_t k = 0;; ++k) {
    double p = 0.0;
    for (double lp : log_p) {
      p += std::exp(lp);
    }
    p *= weight;
    out.pmf_.push_back(p);
    cumulative += p;
    if (cumulative >= 1.0 - truncation_tail) {
      break;
    }
    if (k >= truncation_cap) {
      out.capped_ = true;
      break;
    }
    const double next = static_cast<double>(k + 1);
    for (std::size_t s = 0; s < comps.size(); ++s) {
      if ((k + 1) % reanchor_every == 0) {
        log_p[s] = nb_log_pmf(k + 1, comps[s].mean, comps[s].dispersion);
      } else {
        log_p[s] += std::log((static_cast<double>(k) + comps[s].dispersion) / next) + log_ratio[s];
      }
    }
  }
  out.finish_tables();

  // Mixture moments by the law of total variance.
  double mean = 0.0;
  double second = 0.0;
  for (const auto& c : comps) {
    mean += c.mean;
    second += c.mean + c.mean * c.mean / c.dispersion + c.mean * c.mean;
  }
  mean *= weight;
  second *= weight;
  out.mean_ = mean;
  out.variance_ = std::max(second - mean * mean, 0.0);
  return out;
}

PredictiveDistribution PredictiveDistribution::from_pmf(std::vector<double> pmf)
{
  if (pmf.empty()) {
    throw DomainError("pmf must have at least one entry");
  }
  double total = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw DomainError("pmf entries must be finite and non-negative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError("pmf must sum to 1, got " + std::to_string(total));
  }
  PredictiveDistribution out;
  out.pmf_ = std::move(pmf);
  out.finish_tables();
  out.tabulate_moments_from_pmf();
  return out;
}

void PredictiveDistribution::finish_tables()
{
  cdf_.resize(pmf_.size());
  double c = 0.0;
  double sq = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    c += pmf_[k];
    sq += pmf_[k] * pmf_[k];
    cdf_[k] = c;
  }
  squared_norm_ = sq;
}

void PredictiveDistribution::tabulate_moments_from_pmf()
{
  double mean = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    mean += static_cast<double>(k) * pmf_[k];
  }
  double var = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    const double d = static_cast<double>(k) - mean;
    var += d * d * pmf_[k];
  }
  mean_ = mean;
  variance_ = var;
}

double PredictiveDistribution::pmf(std::int64_t k) const
{
  if (k < 0) {
    return 0.0;
  }
  if (k <= truncation()) {
    return pmf_[static_cast<std::size_t>(k)];
  }
  return components_.empty() ? 0.0 : mixture_pmf(components_, k);
}

double PredictiveDistribution::cdf(std::int64_t k) const
{
  if (k < 0) {
    return 0.0;
  }
  if (k <= truncation()) {
    return cdf_[static_cast<std::size_t>(k)];
  }
  double c = cdf_.back();
  if (components_.empty()) {
    return c;
  }
  const std::int64_t stop = std::min(k, truncation() + truncation_cap);
  for (std::int64_t j = truncation() + 1; j <= stop && c < 1.0; ++j) {
    c += mixture_pmf(components_, j);
  }
  return std::min(c, 1.0);
}

std::int64_t PredictiveDistribution::quantile(double q) const
{
  if (!(q >= 0.0 && q <= 1.0)) {
    throw DomainError("quantile level must lie in [0, 1]");
  }
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), q);
  if (it != cdf_.end()) {
    return static_cast<std::int64_t>(it - cdf_.begin());
  }
  if (components_.empty()) {
    return truncation();
  }
  double c = cdf_.back();
  std::int64_t k = truncation();
  while (c < q && k < truncation() + truncation_cap) {
    ++k;
    const double p = mixture_pmf(components_, k);
    if (p == 0.0) {
      break;
    }
    c += p;
  }
  return k;
}

ParamVector posterior_mean(std::span<const ParamVector> draws)
{
  if (draws.empty()) {
    throw DomainError("posterior mean needs at least one draw");
  }
  ParamVector mean(draws.front().layout, std::vector<double>(draws.front().size(), 0.0));
  for (const auto& d : draws) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      mean[i] += d[i];
    }
  }
  for (auto& v : mean.values) {
    v /= static_cast<double>(draws.size());
  }
  return mean;
}

Forecast posterior_predictive(std::span<const ParamVector> draws, const ModelSpec& spec,
                              ForecastMode mode, const ForecastOptions& options)
{
  if (draws.empty()) {
    throw DomainError("forecast needs at least one posterior draw");
  }
  if (options.horizon < 1) {
    throw DomainError("forecast horizon must be at least one day");
  }
  if (options.first_day < 1) {
    throw DomainError("forecast must start on day 1 or later");
  }

  std::vector<ParamVector> selected;
  if (mode == ForecastMode::point_estimate) {
    selected.push_back(posterior_mean(draws));
  } else if (options.max_components == 0 || draws.size() <= options.max_components) {
    selected.assign(draws.begin(), draws.end());
  } else {
    for (std::size_t i = 0; i < options.max_components; ++i) {
      selected.push_back(draws[i * draws.size() / options.max_components]);
    }
  }

  const int last_day = options.first_day + options.horizon - 1;
  const auto n_days = static_cast<std::size_t>(options.horizon);
  std::vector<std::vector<NbComponent>> per_day(n_days);

  Forecast out;
  out.mode = mode;
  out.first_day = options.first_day;
  for (const auto& p : selected) {
    const auto tp = to_transmission_params(p, spec);
    const auto op = to_observation_params(p, spec);
    DailyTrajectory trajectory;
    try {
      trajectory = integrate_daily(tp, IntegratorConfig{options.substeps_per_day, last_day});
    } catch (const IntegrationDiverged&) {
      ++out.dropped_components;
      continue;
    }
    const auto means = latent_means(trajectory, tp, op);
    for (std::size_t d = 0; d < n_days; ++d) {
      per_day[d].push_back({means.deaths.at(options.first_day + static_cast<int>(d)), op.phi_deaths});
    }
  }
  if (per_day.front().empty()) {
    throw NumericError("every forecast trajectory diverged");
  }
  out.days.reserve(n_days);
  for (auto& comps : per_day) {
    out.days.push_back(PredictiveDistribution::from_components(std::move(comps)));
  }
  return out;
}

}  // namespace seiprd
