#pragma once

#include "seiprd/integrator.hpp"
#include "seiprd/model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace seiprd {

struct ObservationParams {
  double phi_deaths = 0.0;
  double phi_admissions = 0.0;
  double phi_calls = 0.0;
  PiecewiseLinear rho_admissions;  // admissions per new pending individual
  PiecewiseLinear rho_calls;       // symptom reports per new infectious or pending individual

  void validate() const;
};

struct Observation {
  int day = 0;
  std::int64_t count = 0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Day-indexed counts with strictly increasing days. Days may be missing.
class CountSeries {
 public:
  CountSeries() = default;
  explicit CountSeries(std::vector<Observation> observations);

  /// Appends one observation; throws OrderingError or ValidationError on bad input.
  void push_back(int day, std::int64_t count);

  const std::vector<Observation>& observations() const { return observations_; }
  std::size_t size() const { return observations_.size(); }
  bool empty() const { return observations_.empty(); }
  auto begin() const { return observations_.begin(); }
  auto end() const { return observations_.end(); }

  int first_day() const { return observations_.front().day; }
  int last_day() const { return observations_.back().day; }

  /// Count on `day`; throws AlignmentError when that day has no observation.
  std::int64_t at(int day) const;

  /// Observations whose day lies in [first, last].
  CountSeries window(int first, int last) const;

  friend bool operator==(const CountSeries&, const CountSeries&) = default;

 private:
  std::vector<Observation> observations_;
};

/// The three surveillance streams the observation model links to the transmission model.
struct SurveillanceData {
  CountSeries deaths;
  CountSeries admissions;
  CountSeries calls;

  CountSeries& stream(std::size_t i);
  const CountSeries& stream(std::size_t i) const;

  /// Largest observed day across streams, or 0 when every stream is empty.
  int last_day() const;
  SurveillanceData window(int first, int last) const;

  friend bool operator==(const SurveillanceData&, const SurveillanceData&) = default;
};

/// Means indexed by model day starting at `first_day`.
struct DaySeries {
  int first_day = 0;
  std::vector<double> values;

  bool contains(int day) const
  {
    return day >= first_day && day < first_day + static_cast<int>(values.size());
  }
  double at(int day) const { return values[static_cast<std::size_t>(day - first_day)]; }
};

struct LatentMeans {
  DaySeries deaths;  // starts at day 1
  DaySeries admissions;
  DaySeries calls;

  const DaySeries& stream(std::size_t i) const;
};

inline constexpr double min_observation_mean = 1e-10;

/// log NegativeBinomial(n | mu, phi) in the mean/dispersion parameterisation,
/// variance mu + mu^2 / phi.
double nb_log_pmf(std::int64_t n, double mu, double phi);

/// Gamma-Poisson draw with mean mu and dispersion phi.
template <class Rng>
std::int64_t sample_nb(double mu, double phi, Rng& rng)
{
  std::gamma_distribution<double> rate(phi, mu / phi);
  const double lambda = rate(rng);
  std::poisson_distribution<std::int64_t> count(lambda);
  return lambda > 0.0 ? count(rng) : 0;
}

LatentMeans latent_means(const DailyTrajectory& trajectory, const TransmissionParams& tp,
                         const ObservationParams& op);

double log_likelihood(const SurveillanceData& data, const LatentMeans& means,
                      const ObservationParams& op);

}  // namespace seiprd
