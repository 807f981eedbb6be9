#include "seiprd/sweep.hpp"

#include "seiprd/errors.hpp"
#include "seiprd/io.hpp"
#include "seiprd/scenario.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace seiprd {

namespace {

constexpr std::int64_t england_population = 56'550'138;

constexpr ForecastMode table_modes[] = {ForecastMode::point_estimate,
                                        ForecastMode::posterior_samples};

std::vector<std::string_view> split(std::string_view line, char sep = ',')
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) {
      return out;
    }
    start = pos + 1;
  }
}

std::string_view strip_cr(std::string_view s)
{
  if (!s.empty() && s.back() == '\r') {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view text, std::size_t row, const std::string& what)
{
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError(row, what + ": row " + std::to_string(row) + ": '" + std::string(text) +
                               "' is not a number");
  }
  return value;
}

std::string join_doubles(const std::vector<double>& values)
{
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += (i ? ";" : "") + sigma_label(values[i]);
  }
  return out;
}

std::string_view metric_name(ProposalMetric m)
{
  return m == ProposalMetric::dense ? "dense" : "diagonal";
}

std::size_t nses_over_one(const ScoreReport& report)
{
  const auto k = static_cast<std::size_t>(ScoringRule::nses);
  return static_cast<std::size_t>(std::count_if(report.per_day.begin(), report.per_day.end(),
                                                [k](const RuleScores& s) { return s[k] > 1.0; }));
}

ModeResult forecast_and_score(const RunConfig& cfg, const std::vector<ParamVector>& draws,
                              const ModelSpec& spec, ForecastMode mode, const CountSeries& held_out)
{
  ForecastOptions options;
  options.first_day = cfg.window_last + 1;
  options.horizon = cfg.horizon;
  options.substeps_per_day = cfg.substeps_per_day;
  options.max_components = cfg.max_components;

  ModeResult out;
  out.forecast = posterior_predictive(draws, spec, mode, options);
  std::vector<PredictiveDistribution> scored;
  for (const auto& o : held_out) {
    const int index = o.day - out.forecast.first_day;
    if (index < 0 || index >= static_cast<int>(out.forecast.days.size())) {
      continue;
    }
    out.scored_days.push_back(o.day);
    out.observed.push_back(o.count);
    scored.push_back(out.forecast.days[static_cast<std::size_t>(index)]);
  }
  out.scores = score_forecast(scored, out.observed);
  return out;
}

}  // namespace

std::string_view preset_name(Preset preset)
{
  return preset == Preset::desk ? "desk" : "england";
}

Preset parse_preset(std::string_view name)
{
  if (name == "england") {
    return Preset::england;
  }
  if (name == "desk") {
    return Preset::desk;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "', expected england or desk");
}

void RunConfig::validate() const
{
  if (!(window_first < window_last)) {
    throw ConfigError("calibration window start must precede its end");
  }
  if (window_first < 0) {
    throw ConfigError("calibration window must start on or after 2020-02-17");
  }
  if (horizon < 1) {
    throw ConfigError("forecast horizon must be at least one day");
  }
  if (sigma_betas.empty()) {
    throw ConfigError("sigma_beta list is empty");
  }
  for (double s : sigma_betas) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ConfigError("sigma_beta values must be positive, got " + format_double(s));
    }
  }
  if (population < 6) {
    throw ConfigError("population must be at least 6");
  }
  if (substeps_per_day < 1) {
    throw ConfigError("substeps per day must be at least 1");
  }
  try {
    chains.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

ModelSpec RunConfig::model_spec() const
{
  ModelSpec spec;
  if (preset == Preset::desk) {
    spec = desk_scenario().spec;
    spec.population = population;
  } else {
    spec = england_spec(population, window_last);
  }
  return spec;
}

RunConfig preset_config(Preset preset)
{
  RunConfig cfg;
  cfg.preset = preset;
  if (preset == Preset::desk) {
    const auto scenario = desk_scenario();
    cfg.population = scenario.spec.population;
    cfg.window_first = scenario.calibration_first;
    cfg.window_last = scenario.calibration_last;
    cfg.horizon = scenario.horizon;
    cfg.chains = scenario.chains;
    cfg.chains.init_intervals.clear();
  } else {
    cfg.population = england_population;
    cfg.window_first = day_from_iso("2020-03-24");
    cfg.window_last = day_from_iso("2020-12-31");
  }
  return cfg;
}

SurveillanceData load_data(const RunConfig& cfg)
{
  if (cfg.deaths_csv.empty() || cfg.admissions_csv.empty() || cfg.calls_csv.empty()) {
    throw ConfigError("deaths, admissions and calls CSV paths are all required");
  }
  return {ingest_csv(cfg.deaths_csv), ingest_csv(cfg.admissions_csv), ingest_csv(cfg.calls_csv)};
}

SurveillanceData calibration_window(const RunConfig& cfg, const SurveillanceData& data)
{
  return data.window(cfg.window_first, cfg.window_last);
}

CountSeries held_out_deaths(const RunConfig& cfg, const SurveillanceData& data)
{
  return data.deaths.window(cfg.window_last + 1, cfg.window_last + cfg.horizon);
}

CellResult run_cell(const RunConfig& cfg, const SurveillanceData& data, double sigma_beta)
{
  const ModelSpec spec = cfg.model_spec();
  const ParamLayout layout(spec);
  PriorConfig prior;
  prior.sigma_beta = sigma_beta;
  ChainConfig chains = cfg.chains;
  chains.seed = cfg.seed;
  if (chains.init_intervals.empty()) {
    chains.init_intervals = default_init_intervals(layout);
  }

  CellResult cell;
  cell.sigma_beta = sigma_beta;
  Calibration calibration;
  try {
    calibration =
        calibrate(spec, calibration_window(cfg, data), prior, chains, cfg.substeps_per_day);
  } catch (const InitialisationError& e) {
    cell.failure = std::string(category_name(e.category())) + ": " + e.what();
    return cell;
  }
  cell.ok = true;
  cell.draws = std::move(calibration.params);
  cell.divergences = calibration.divergences;
  cell.warnings = calibration.draws.warnings();
  cell.min_ess = calibration.draws.diagnostics.empty() ? 0.0 : INFINITY;
  for (const auto& d : calibration.draws.diagnostics) {
    cell.max_rhat = std::max(cell.max_rhat, d.rhat);
    cell.min_ess = std::min(cell.min_ess, d.ess);
  }
  for (const auto& c : calibration.draws.chains) {
    cell.mean_acceptance += c.acceptance / static_cast<double>(calibration.draws.chains.size());
  }

  const auto held_out = held_out_deaths(cfg, data);
  cell.point = forecast_and_score(cfg, cell.draws, spec, ForecastMode::point_estimate, held_out);
  cell.posterior =
      forecast_and_score(cfg, cell.draws, spec, ForecastMode::posterior_samples, held_out);
  return cell;
}

BestSelection select_best(const std::vector<CellResult>& cells)
{
  BestSelection best;
  for (auto rule : all_rules) {
    std::optional<BestCell> winner;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!cells[c].ok) {
        continue;
      }
      for (auto mode : table_modes) {
        const double v = cells[c].mode(mode).scores.mean_of(rule);
        if (std::isnan(v)) {
          continue;
        }
        bool better = !winner;
        if (winner && rule == ScoringRule::nses) {
          const double w = winner->value;
          if (v < 1.0) {
            better = !(w < 1.0) || v > w;
          } else {
            better = !(w < 1.0) && v < w;
          }
        } else if (winner) {
          better = v < winner->value;
        }
        if (better) {
          winner = BestCell{rule, mode, c, v};
        }
      }
    }
    if (winner) {
      best.per_rule.push_back(*winner);
    }
  }

  std::map<std::size_t, std::size_t> wins;
  for (const auto& w : best.per_rule) {
    ++wins[w.cell];
  }
  auto best_rps = [&cells](std::size_t c) {
    return std::min(cells[c].point.scores.mean_of(ScoringRule::rps),
                    cells[c].posterior.scores.mean_of(ScoringRule::rps));
  };
  for (const auto& [cell, count] : wins) {
    if (!best.overall || count > wins[*best.overall] ||
        (count == wins[*best.overall] && best_rps(cell) < best_rps(*best.overall))) {
      best.overall = cell;
    }
  }
  return best;
}

SweepResult run_sweep(const RunConfig& cfg, const SurveillanceData& data)
{
  cfg.validate();
  if (held_out_deaths(cfg, data).empty()) {
    throw AlignmentError("no death observations in the " + std::to_string(cfg.horizon) +
                         " days after " + iso_from_day(cfg.window_last));
  }
  SweepResult result;
  for (double sigma : cfg.sigma_betas) {
    result.cells.push_back(run_cell(cfg, data, sigma));
  }
  result.best = select_best(result.cells);
  return result;
}

SweepResult run_sweep(const RunConfig& cfg)
{
  cfg.validate();
  auto result = run_sweep(cfg, load_data(cfg));
  write_sweep_outputs(cfg, result);
  return result;
}

std::string sigma_label(double sigma_beta)
{
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), sigma_beta,
                                 std::chars_format::fixed);
  return ec == std::errc{} ? std::string(buf.data(), ptr) : format_double(sigma_beta);
}

std::string_view mode_name(ForecastMode mode)
{
  return mode == ForecastMode::point_estimate ? "point_estimate" : "posterior_samples";
}

ForecastMode parse_mode(std::string_view name)
{
  if (name == "point_estimate") {
    return ForecastMode::point_estimate;
  }
  if (name == "posterior_samples") {
    return ForecastMode::posterior_samples;
  }
  throw ConfigError("unknown forecast mode '" + std::string(name) +
                    "', expected point_estimate or posterior_samples");
}

std::string score_table_csv(const RunConfig& cfg, const SweepResult& result)
{
  std::ostringstream out;
  out << "block,score";
  for (double s : cfg.sigma_betas) {
    out << ',' << sigma_label(s);
  }
  out << '\n';
  for (auto mode : table_modes) {
    for (auto rule : all_rules) {
      out << mode_name(mode) << ',' << mean_rule_name(rule);
      for (const auto& cell : result.cells) {
        out << ',' << (cell.ok ? format_double(cell.mode(mode).scores.mean_of(rule)) : "NA");
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string forecast_quantiles_csv(const Forecast& forecast, const CountSeries& observed)
{
  std::ostringstream out;
  out << "mode,date,day,mean";
  for (double q : forecast_quantiles) {
    out << ",q" << format_double(q);
  }
  out << ",observed\n";
  for (std::size_t i = 0; i < forecast.days.size(); ++i) {
    const int day = forecast.first_day + static_cast<int>(i);
    const auto& p = forecast.days[i];
    out << mode_name(forecast.mode) << ',' << iso_from_day(day) << ',' << day << ','
        << format_double(p.mean());
    for (double q : forecast_quantiles) {
      out << ',' << p.quantile(q);
    }
    out << ',';
    for (const auto& o : observed) {
      if (o.day == day) {
        out << o.count;
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string quantiles_csv(const CellResult& cell)
{
  CountSeries observed;
  for (std::size_t i = 0; i < cell.posterior.scored_days.size(); ++i) {
    observed.push_back(cell.posterior.scored_days[i], cell.posterior.observed[i]);
  }
  std::string text = forecast_quantiles_csv(cell.point.forecast, observed);
  const std::string rest = forecast_quantiles_csv(cell.posterior.forecast, observed);
  text += rest.substr(rest.find('\n') + 1);
  return text;
}

std::string forecast_components_csv(const Forecast& forecast)
{
  std::ostringstream out;
  out << "mode,date,day,component,mean,dispersion\n";
  for (std::size_t i = 0; i < forecast.days.size(); ++i) {
    const int day = forecast.first_day + static_cast<int>(i);
    const auto& comps = forecast.days[i].components();
    for (std::size_t c = 0; c < comps.size(); ++c) {
      out << mode_name(forecast.mode) << ',' << iso_from_day(day) << ',' << day << ',' << c << ','
          << format_double(comps[c].mean) << ',' << format_double(comps[c].dispersion) << '\n';
    }
  }
  return out.str();
}

std::string components_csv(const CellResult& cell)
{
  std::string text = forecast_components_csv(cell.point.forecast);
  const std::string rest = forecast_components_csv(cell.posterior.forecast);
  text += rest.substr(rest.find('\n') + 1);
  return text;
}

std::string cells_csv(const SweepResult& result)
{
  std::ostringstream out;
  out << "sigma_beta,status,failure,divergences,max_rhat,min_ess,mean_acceptance,warnings,"
         "point_nses_verdict,posterior_nses_verdict,point_days_nses_above_one,"
         "posterior_days_nses_above_one,scored_days\n";
  for (const auto& cell : result.cells) {
    out << sigma_label(cell.sigma_beta) << ',' << (cell.ok ? "ok" : "failed") << ',';
    if (!cell.ok) {
      std::string reason = cell.failure;
      std::replace(reason.begin(), reason.end(), ',', ';');
      std::replace(reason.begin(), reason.end(), '\n', ' ');
      out << reason << ",,,,,,,,,,\n";
      continue;
    }
    out << ',' << cell.divergences << ',' << format_double(cell.max_rhat) << ','
        << format_double(cell.min_ess) << ',' << format_double(cell.mean_acceptance) << ','
        << cell.warnings.size() << ',' << verdict_name(cell.point.scores.nses_verdict) << ','
        << verdict_name(cell.posterior.scores.nses_verdict) << ','
        << nses_over_one(cell.point.scores) << ',' << nses_over_one(cell.posterior.scores) << ','
        << cell.posterior.scored_days.size() << '\n';
  }
  return out.str();
}

std::string best_csv(const RunConfig& cfg, const SweepResult& result)
{
  std::ostringstream out;
  out << "score,block,sigma_beta,value\n";
  for (const auto& b : result.best.per_rule) {
    out << mean_rule_name(b.rule) << ',' << mode_name(b.mode) << ','
        << sigma_label(cfg.sigma_betas[b.cell]) << ',' << format_double(b.value) << '\n';
  }
  out << "overall,,";
  if (result.best.overall) {
    out << sigma_label(cfg.sigma_betas[*result.best.overall]);
  }
  out << ",\n";
  return out.str();
}

std::string draws_csv(const std::vector<ParamVector>& draws)
{
  std::ostringstream out;
  out << "draw";
  if (!draws.empty()) {
    for (const auto& name : draws.front().layout.names()) {
      out << ',' << name;
    }
  }
  out << '\n';
  for (std::size_t i = 0; i < draws.size(); ++i) {
    out << i;
    for (double v : draws[i].values) {
      out << ',' << format_double(v);
    }
    out << '\n';
  }
  return out.str();
}

std::string metadata_text(const RunConfig& cfg, const SweepResult& result)
{
  std::ostringstream out;
  auto kv = [&out](std::string_view key, const auto& value) {
    out << key << " = " << value << '\n';
  };
  kv("preset", preset_name(cfg.preset));
  kv("deaths_csv", cfg.deaths_csv.generic_string());
  kv("admissions_csv", cfg.admissions_csv.generic_string());
  kv("calls_csv", cfg.calls_csv.generic_string());
  for (const auto& [key, path] : {std::pair{"deaths_csv_hash", cfg.deaths_csv},
                                  std::pair{"admissions_csv_hash", cfg.admissions_csv},
                                  std::pair{"calls_csv_hash", cfg.calls_csv}}) {
    kv(key, std::filesystem::exists(path) ? git_blob_hash_file(path) : std::string("missing"));
  }
  kv("population", cfg.population);
  kv("window_first", iso_from_day(cfg.window_first));
  kv("window_last", iso_from_day(cfg.window_last));
  kv("horizon", cfg.horizon);
  kv("sigma_betas", join_doubles(cfg.sigma_betas));
  kv("chains", cfg.chains.n_chains);
  kv("samples", cfg.chains.n_samples);
  kv("warmup", cfg.chains.n_warmup);
  kv("thin", cfg.chains.thin);
  kv("target_acceptance", format_double(cfg.chains.target_acceptance));
  kv("metric", metric_name(cfg.chains.metric));
  kv("init_retries", cfg.chains.init_retries);
  kv("substeps_per_day", cfg.substeps_per_day);
  kv("max_components", cfg.max_components);
  kv("seed", cfg.seed);
  kv("score_table_hash", git_blob_hash(score_table_csv(cfg, result)));

  for (const auto& cell : result.cells) {
    const std::string prefix = "cell." + sigma_label(cell.sigma_beta) + ".";
    kv(prefix + "status", cell.ok ? "ok" : "failed");
    if (!cell.ok) {
      kv(prefix + "failure", cell.failure);
      continue;
    }
    kv(prefix + "draws", cell.draws.size());
    kv(prefix + "divergences", cell.divergences);
    kv(prefix + "max_rhat", format_double(cell.max_rhat));
    kv(prefix + "min_ess", format_double(cell.min_ess));
    for (const auto& w : cell.warnings) {
      kv(prefix + "warning", w);
    }
    for (auto mode : table_modes) {
      const auto& m = cell.mode(mode);
      const std::string p = prefix + std::string(mode_name(mode)) + ".";
      std::int64_t k_max = 0;
      bool capped = false;
      double tail = 0.0;
      for (const auto& day : m.forecast.days) {
        k_max = std::max(k_max, day.truncation());
        capped = capped || day.truncation_capped();
        tail = std::max(tail, day.tail_mass());
      }
      kv(p + "components", m.forecast.days.front().components().size());
      kv(p + "dropped_components", m.forecast.dropped_components);
      kv(p + "max_truncation", k_max);
      kv(p + "truncation_capped", capped ? "true" : "false");
      kv(p + "max_tail_mass", format_double(tail));
      kv(p + "infinite_logs", m.scores.infinite_logs);
    }
  }
  return out.str();
}

void write_sweep_outputs(const RunConfig& cfg, const SweepResult& result)
{
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) {
    throw IoError("cannot create " + cfg.output_dir.string() + ": " + ec.message());
  }
  const auto& dir = cfg.output_dir;
  write_file(dir / "score_table.csv", score_table_csv(cfg, result));
  write_file(dir / "cells.csv", cells_csv(result));
  write_file(dir / "best.csv", best_csv(cfg, result));
  for (const auto& cell : result.cells) {
    if (!cell.ok) {
      continue;
    }
    const std::string label = sigma_label(cell.sigma_beta);
    write_file(dir / ("quantiles_sigma_" + label + ".csv"), quantiles_csv(cell));
    write_file(dir / ("components_sigma_" + label + ".csv"), components_csv(cell));
    write_file(dir / ("draws_sigma_" + label + ".csv"), draws_csv(cell.draws));
  }
  write_file(dir / "metadata.txt", metadata_text(cfg, result));
}

std::vector<ParamVector> read_draws_csv(const std::filesystem::path& path,
                                        const ParamLayout& layout)
{
  std::istringstream in(read_file(path));
  const std::string what = path.string();
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(0, what + ": empty draws file");
  }
  const auto header = split(strip_cr(line));
  const auto names = layout.names();
  if (header.size() != names.size() + 1 || header.front() != "draw" ||
      !std::equal(names.begin(), names.end(), header.begin() + 1)) {
    throw FormatError(0, what + ": columns do not match the parameter layout of this model");
  }
  std::vector<ParamVector> draws;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto text = strip_cr(line);
    if (text.empty()) {
      continue;
    }
    ++row;
    const auto fields = split(text);
    if (fields.size() != header.size()) {
      throw FormatError(row, what + ": row " + std::to_string(row) + " has the wrong width");
    }
    std::vector<double> values;
    values.reserve(names.size());
    for (std::size_t i = 1; i < fields.size(); ++i) {
      values.push_back(parse_double(fields[i], row, what));
    }
    ParamVector p(layout, std::move(values));
    if (!p.in_support()) {
      throw ValidationError(row, what + ": row " + std::to_string(row) + " is outside the support");
    }
    draws.push_back(std::move(p));
  }
  if (draws.empty()) {
    throw FormatError(0, what + ": no draws");
  }
  return draws;
}

std::vector<Forecast> read_components_csv(const std::filesystem::path& path)
{
  std::istringstream in(read_file(path));
  const std::string what = path.string();
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "mode,date,day,component,mean,dispersion") {
    throw FormatError(0, what + ": expected header 'mode,date,day,component,mean,dispersion'");
  }

  struct Partial {
    ForecastMode mode;
    int first_day;
    std::vector<std::vector<NbComponent>> days;
  };
  std::vector<Partial> partial;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto text = strip_cr(line);
    if (text.empty()) {
      continue;
    }
    ++row;
    const auto f = split(text);
    if (f.size() != 6) {
      throw FormatError(row, what + ": row " + std::to_string(row) + " has the wrong width");
    }
    const ForecastMode mode = parse_mode(f[0]);
    const int day = static_cast<int>(parse_double(f[2], row, what));
    if (day != day_from_iso(f[1])) {
      throw FormatError(row, what + ": row " + std::to_string(row) + ": date and day disagree");
    }
    const NbComponent comp{parse_double(f[4], row, what), parse_double(f[5], row, what)};
    if (partial.empty() || partial.back().mode != mode) {
      partial.push_back({mode, day, {}});
    }
    auto& p = partial.back();
    const int index = day - p.first_day;
    if (index == static_cast<int>(p.days.size())) {
      p.days.emplace_back();
    } else if (index != static_cast<int>(p.days.size()) - 1) {
      throw OrderingError(row, what + ": row " + std::to_string(row) +
                                   ": forecast days must be consecutive");
    }
    p.days.back().push_back(comp);
  }
  if (partial.empty()) {
    throw FormatError(0, what + ": no components");
  }

  std::vector<Forecast> out;
  for (auto& p : partial) {
    Forecast f;
    f.mode = p.mode;
    f.first_day = p.first_day;
    for (auto& comps : p.days) {
      f.days.push_back(PredictiveDistribution::from_components(std::move(comps)));
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace seiprd
