#pragma once

#include "seiprd/priors.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace seiprd {

struct NbComponent {
  double mean = 0.0;
  double dispersion = 0.0;
};

inline constexpr double truncation_tail = 1e-9;
inline constexpr std::int64_t truncation_cap = 10'000'000;

/**
 * @brief Discrete predictive distribution over counts 0, 1, 2, ...
 *
 * Either an equal-weight mixture of negative binomials (one per posterior
 * draw) or an explicit finite-support pmf. The pmf is tabulated up to the
 * truncation bound K_max, the smallest k whose cdf reaches 1 - 1e-9, capped
 * at 10^7; queries beyond it are answered exactly from the components.
 */
class PredictiveDistribution {
 public:
  PredictiveDistribution() = default;

  static PredictiveDistribution from_components(std::vector<NbComponent> components);
  static PredictiveDistribution from_pmf(std::vector<double> pmf);

  double pmf(std::int64_t k) const;
  double cdf(std::int64_t k) const;
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  /// Smallest k with cdf(k) >= q.
  std::int64_t quantile(double q) const;

  std::int64_t truncation() const { return static_cast<std::int64_t>(pmf_.size()) - 1; }
  bool truncation_capped() const { return capped_; }
  /// Probability mass above K_max (zero for finite-support pmfs).
  double tail_mass() const { return 1.0 - cdf_.back(); }
  /// Sum of squared probabilities up to K_max.
  double squared_norm() const { return squared_norm_; }

  const std::vector<NbComponent>& components() const { return components_; }
  std::span<const double> pmf_table() const { return pmf_; }

 private:
  void tabulate_moments_from_pmf();
  void finish_tables();

  std::vector<NbComponent> components_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
  double variance_ = 0.0;
  double squared_norm_ = 0.0;
  bool capped_ = false;
};

enum class ForecastMode { posterior_samples, point_estimate };

struct ForecastOptions {
  int first_day = 1;
  int horizon = 21;
  int substeps_per_day = 4;
  // Use at most this many evenly spaced draws as mixture components; 0 keeps all.
  std::size_t max_components = 0;
};

struct Forecast {
  ForecastMode mode = ForecastMode::posterior_samples;
  int first_day = 0;
  std::vector<PredictiveDistribution> days;
  std::size_t dropped_components = 0;  // draws whose trajectory diverged
};

/// Componentwise mean of the draws on the constrained scale.
ParamVector posterior_mean(std::span<const ParamVector> draws);

Forecast posterior_predictive(std::span<const ParamVector> draws, const ModelSpec& spec,
                              ForecastMode mode, const ForecastOptions& options);

}  // namespace seiprd
