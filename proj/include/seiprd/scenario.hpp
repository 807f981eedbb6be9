#pragma once

#include "seiprd/mcmc.hpp"
#include "seiprd/observation.hpp"
#include "seiprd/priors.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace seiprd {

/// Knot days `first, second, second + spacing, ...` up to and including the
/// first knot at or after `through`.
std::vector<double> knot_schedule(double first, double second, double spacing, double through);

/**
 * Knot layout for England 2020: beta from 17 Feb with the second knot on
 * 24 Mar and weekly after that; admissions ratios every 12 weeks and calls
 * ratios every 4 weeks, both from 24 Mar.
 */
ModelSpec england_spec(std::int64_t population, int window_last);

/// Synthetic workload with known generating parameters.
struct Scenario {
  std::string name;
  ModelSpec spec;
  ParamVector truth;
  int calibration_first = 1;
  int calibration_last = 0;
  int horizon = 21;
  double generating_sigma_beta = 0.0;
  ChainConfig chains;
};

/// Six beta knots over 120 days, N = 10^6.
Scenario desk_scenario();

/// Negative-binomial counts for every stream and day in [first_day, last_day].
/// Calls are dropped on weekends, mirroring the weekday-only feed.
SurveillanceData simulate_synthetic(const TransmissionParams& tp, const ObservationParams& op,
                                    int first_day, int last_day, std::uint64_t seed,
                                    int substeps_per_day = 4);

/// Custom starting intervals for alpha, beta, the periods and omega; (-2, 2)
/// on the unconstrained scale for everything else.
std::vector<InitInterval> default_init_intervals(const ParamLayout& layout);

std::vector<ParamVector> constrained_draws(const PosteriorDraws& draws, const ParamLayout& layout);

struct Calibration {
  PosteriorDraws draws;
  std::vector<ParamVector> params;
  std::size_t divergences = 0;
};

/// Runs the chains on the posterior for `data`, which should already be cut to
/// the calibration window.
Calibration calibrate(const ModelSpec& spec, const SurveillanceData& data, const PriorConfig& prior,
                      const ChainConfig& chains, int substeps_per_day = 4);

}  // namespace seiprd
