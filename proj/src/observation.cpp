#include "seiprd/observation.hpp"

#include "seiprd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace seiprd {

namespace {

bool valid_ratio(const PiecewiseLinear& rho)
{
  const auto& v = rho.knot_values();
  return rho.size() >= 2 &&
         std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0 && x < 1.0; });
}

bool valid_dispersion(double phi) { return phi > 0.0 && std::isfinite(phi); }

// Observation means use non-negative compartments; the stored trajectory is untouched.
double clamped(double x) { return std::max(x, 0.0); }

double floored(double mu) { return std::max(mu, min_observation_mean); }

}  // namespace

void ObservationParams::validate() const
{
  if (!valid_dispersion(phi_deaths) || !valid_dispersion(phi_admissions) ||
      !valid_dispersion(phi_calls)) {
    throw DomainError("overdispersion parameters must be positive and finite");
  }
  if (!valid_ratio(rho_admissions) || !valid_ratio(rho_calls)) {
    throw DomainError("ratio knot values must lie in (0, 1)");
  }
}

CountSeries::CountSeries(std::vector<Observation> observations)
{
  observations_.reserve(observations.size());
  for (const auto& o : observations) {
    push_back(o.day, o.count);
  }
}

void CountSeries::push_back(int day, std::int64_t count)
{
  const std::size_t row = observations_.size();
  if (count < 0) {
    throw ValidationError(row, "negative count " + std::to_string(count) + " at row " +
                                   std::to_string(row + 1));
  }
  if (!observations_.empty() && day <= observations_.back().day) {
    throw OrderingError(row, "day " + std::to_string(day) + " does not follow day " +
                                 std::to_string(observations_.back().day) + " at row " +
                                 std::to_string(row + 1));
  }
  observations_.push_back({day, count});
}

std::int64_t CountSeries::at(int day) const
{
  const auto it = std::lower_bound(observations_.begin(), observations_.end(), day,
                                   [](const Observation& o, int d) { return o.day < d; });
  if (it == observations_.end() || it->day != day) {
    throw AlignmentError("no observation on day " + std::to_string(day));
  }
  return it->count;
}

CountSeries CountSeries::window(int first, int last) const
{
  CountSeries out;
  for (const auto& o : observations_) {
    if (o.day >= first && o.day <= last) {
      out.observations_.push_back(o);
    }
  }
  return out;
}

CountSeries& SurveillanceData::stream(std::size_t i)
{
  switch (i) {
    case 0: return deaths;
    case 1: return admissions;
    default: return calls;
  }
}

const CountSeries& SurveillanceData::stream(std::size_t i) const
{
  switch (i) {
    case 0: return deaths;
    case 1: return admissions;
    default: return calls;
  }
}

int SurveillanceData::last_day() const
{
  int last = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!stream(i).empty()) {
      last = std::max(last, stream(i).last_day());
    }
  }
  return last;
}

SurveillanceData SurveillanceData::window(int first, int last) const
{
  return {deaths.window(first, last), admissions.window(first, last), calls.window(first, last)};
}

const DaySeries& LatentMeans::stream(std::size_t i) const
{
  switch (i) {
    case 0: return deaths;
    case 1: return admissions;
    default: return calls;
  }
}

double nb_log_pmf(std::int64_t n, double mu, double phi)
{
  if (!(mu > 0.0) || !(phi > 0.0)) {
    throw DomainError("negative binomial needs mu > 0 and phi > 0");
  }
  if (n < 0) {
    throw DomainError("negative binomial count must be non-negative");
  }
  const double k = static_cast<double>(n);
  // phi * log(phi / (mu + phi)) written to stay accurate for large phi
  double log_p = -phi * std::log1p(mu / phi);
  if (n > 0) {
    log_p += k * std::log(mu) - std::lgamma(k + 1.0) - k * std::log1p(mu / phi);
    if (phi > 1e6 && k < 1e-3 * phi) {
      // log Gamma(k + phi) - log Gamma(phi) - k log(phi) = sum_{j<k} log1p(j / phi),
      // expanded with closed-form power sums
      const double s1 = k * (k - 1.0) / 2.0;
      const double s2 = s1 * (2.0 * k - 1.0) / 3.0;
      const double s3 = s1 * s1;
      const double s4 = s2 * (3.0 * k * k - 3.0 * k - 1.0) / 5.0;
      const double x = 1.0 / phi;
      log_p += x * (s1 - x * (s2 / 2.0 - x * (s3 / 3.0 - x * s4 / 4.0)));
    } else {
      log_p += std::lgamma(k + phi) - std::lgamma(phi) - k * std::log(phi);
    }
  }
  return log_p;
}

LatentMeans latent_means(const DailyTrajectory& trajectory, const TransmissionParams& tp,
                         const ObservationParams& op)
{
  const int horizon = trajectory.horizon();
  const double latent_rate = 2.0 / tp.latent_period;
  const double infectious_rate = 2.0 / tp.infectious_period;

  LatentMeans means;
  means.deaths.first_day = 1;
  means.admissions.first_day = 0;
  means.calls.first_day = 0;
  means.deaths.values.reserve(static_cast<std::size_t>(std::max(horizon, 0)));
  means.admissions.values.reserve(static_cast<std::size_t>(horizon) + 1);
  means.calls.values.reserve(static_cast<std::size_t>(horizon) + 1);

  for (int day = 0; day <= horizon; ++day) {
    const auto& y = trajectory[day];
    if (day >= 1) {
      const double new_deaths = clamped(y.D()) - clamped(trajectory[day - 1].D());
      means.deaths.values.push_back(floored(new_deaths));
    }
    const double new_pending = infectious_rate * clamped(y.I2());
    const double new_infectious = latent_rate * clamped(y.E2());
    const double t = static_cast<double>(day);
    means.admissions.values.push_back(floored(op.rho_admissions(t) * new_pending));
    means.calls.values.push_back(floored(op.rho_calls(t) * (new_infectious + new_pending)));
  }
  return means;
}

double log_likelihood(const SurveillanceData& data, const LatentMeans& means,
                      const ObservationParams& op)
{
  const double phis[3] = {op.phi_deaths, op.phi_admissions, op.phi_calls};
  double total = 0.0;
  for (std::size_t s = 0; s < 3; ++s) {
    const auto& series = means.stream(s);
    for (const auto& o : data.stream(s)) {
      if (!series.contains(o.day)) {
        throw AlignmentError("observation on day " + std::to_string(o.day) +
                             " lies outside the modelled span");
      }
      total += nb_log_pmf(o.count, series.at(o.day), phis[s]);
    }
  }
  return total;
}

}  // namespace seiprd
