#pragma once

#include "seiprd/forecast.hpp"
#include "seiprd/mcmc.hpp"
#include "seiprd/observation.hpp"
#include "seiprd/priors.hpp"
#include "seiprd/scoring.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace seiprd {

enum class Preset { england, desk };

std::string_view preset_name(Preset preset);
/// Throws ConfigError for unknown names.
Preset parse_preset(std::string_view name);

inline const std::vector<double> default_sigma_betas{0.0005, 0.001, 0.0025, 0.005,
                                                     0.01,   0.025, 0.05};

/// Everything a sweep, calibration or forecast run needs.
struct RunConfig {
  Preset preset = Preset::england;
  std::filesystem::path deaths_csv;
  std::filesystem::path admissions_csv;
  std::filesystem::path calls_csv;
  std::int64_t population = 0;
  int window_first = 0;  // model days, inclusive
  int window_last = 0;
  int horizon = 21;
  std::vector<double> sigma_betas = default_sigma_betas;
  ChainConfig chains;
  int substeps_per_day = 4;
  std::size_t max_components = 0;  // forecast mixture size; 0 keeps every draw
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  /// Throws ConfigError when the window, horizon or sigma list is invalid.
  void validate() const;
  /// Knot layout implied by the preset and window.
  ModelSpec model_spec() const;
};

/**
 * Defaults for a preset. England: N = 56,550,138, window 2020-03-24 to
 * 2020-12-31 with the six-chain 512/256 budget. Desk: N = 10^6, days 1 to 120,
 * and the longer thinned budget that random-walk Metropolis needs.
 */
RunConfig preset_config(Preset preset);

/// Reads the three CSV files named in the config.
SurveillanceData load_data(const RunConfig& cfg);

/// Calibration data: the three streams cut to the window.
SurveillanceData calibration_window(const RunConfig& cfg, const SurveillanceData& data);

/// Death observations on the forecast days following the window.
CountSeries held_out_deaths(const RunConfig& cfg, const SurveillanceData& data);

struct ModeResult {
  Forecast forecast;
  std::vector<int> scored_days;       // forecast days with an observation
  std::vector<std::int64_t> observed;  // aligned with scored_days
  ScoreReport scores;
};

struct CellResult {
  double sigma_beta = 0.0;
  bool ok = false;
  std::string failure;  // error category and message when !ok
  std::vector<ParamVector> draws;
  std::size_t divergences = 0;
  double max_rhat = 0.0;
  double min_ess = 0.0;
  double mean_acceptance = 0.0;
  std::vector<std::string> warnings;
  ModeResult point;
  ModeResult posterior;

  const ModeResult& mode(ForecastMode m) const
  {
    return m == ForecastMode::point_estimate ? point : posterior;
  }
};

struct BestCell {
  ScoringRule rule = ScoringRule::logs;
  ForecastMode mode = ForecastMode::posterior_samples;
  std::size_t cell = 0;
  double value = 0.0;
};

/**
 * @brief Best cell per mean score across both forecast modes.
 *
 * Lowest value for the proper scores; for NSES the largest value below one,
 * or the smallest value if every cell is above one. `overall` is the sigma
 * that wins the most rules, ties going to the lower winning RPS.
 */
struct BestSelection {
  std::vector<BestCell> per_rule;
  std::optional<std::size_t> overall;
};

BestSelection select_best(const std::vector<CellResult>& cells);

struct SweepResult {
  std::vector<CellResult> cells;
  BestSelection best;
};

/// Calibrates, forecasts and scores one sigma. Initialisation failures are
/// recorded in the result; every other error propagates.
CellResult run_cell(const RunConfig& cfg, const SurveillanceData& data, double sigma_beta);

SweepResult run_sweep(const RunConfig& cfg, const SurveillanceData& data);

/// Loads the CSVs, runs the sweep and writes every output file.
SweepResult run_sweep(const RunConfig& cfg);

std::string sigma_label(double sigma_beta);
std::string_view mode_name(ForecastMode mode);
ForecastMode parse_mode(std::string_view name);

// Output tables, each returned as complete CSV text.
std::string score_table_csv(const RunConfig& cfg, const SweepResult& result);
std::string quantiles_csv(const CellResult& cell);
std::string components_csv(const CellResult& cell);
std::string cells_csv(const SweepResult& result);
std::string best_csv(const RunConfig& cfg, const SweepResult& result);
std::string draws_csv(const std::vector<ParamVector>& draws);
std::string metadata_text(const RunConfig& cfg, const SweepResult& result);

void write_sweep_outputs(const RunConfig& cfg, const SweepResult& result);

/// Quantile levels written for every forecast day.
inline constexpr double forecast_quantiles[] = {0.025, 0.25, 0.5, 0.75, 0.975};

std::string forecast_quantiles_csv(const Forecast& forecast, const CountSeries& observed);
std::string forecast_components_csv(const Forecast& forecast);

/// Reads a draws file written by draws_csv(); column names must match the layout.
std::vector<ParamVector> read_draws_csv(const std::filesystem::path& path,
                                        const ParamLayout& layout);

/// Reads a components file back into one forecast per mode present in it.
std::vector<Forecast> read_components_csv(const std::filesystem::path& path);

}  // namespace seiprd
