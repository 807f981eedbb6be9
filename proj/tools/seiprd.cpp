// Command-line front end: calibrate, forecast, score, sweep, simulate.

#include "seiprd/errors.hpp"
#include "seiprd/io.hpp"
#include "seiprd/scenario.hpp"
#include "seiprd/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using namespace seiprd;

// Flags for every RunConfig field. Values are applied on top of the preset
// defaults only when given on the command line or in the config file.
struct Flags {
  std::string preset = "england";
  std::string deaths, admissions, calls;
  std::int64_t population = 0;
  std::string window_start, window_end;
  int horizon = 0;
  std::vector<double> sigma_betas;
  std::size_t chains = 0, samples = 0, warmup = 0, thin = 0, threads = 0, init_retries = 0;
  double target_acceptance = 0.0;
  std::string metric;
  int substeps = 0;
  std::size_t max_components = 0;
  std::string out;
  std::uint64_t seed = 0;
};

template <class T>
CLI::Option* flag(CLI::App& app, const std::string& name, T& target, const std::string& help)
{
  return app.add_option(name, target, help);
}

bool given(const CLI::App& app, const std::string& name) { return app.get_option(name)->count() > 0; }

void add_run_flags(CLI::App& app, Flags& f)
{
  flag(app, "--preset", f.preset, "Knot layout and defaults: england or desk")
      ->check(CLI::IsMember({"england", "desk"}));
  flag(app, "--deaths", f.deaths, "Daily deaths CSV (date,count)");
  flag(app, "--admissions", f.admissions, "Daily hospital admissions CSV (date,count)");
  flag(app, "--calls", f.calls, "Daily symptom-report calls CSV (date,count)");
  flag(app, "--population", f.population, "Population size N");
  flag(app, "--window-start", f.window_start, "First calibration date, YYYY-MM-DD");
  flag(app, "--window-end", f.window_end, "Last calibration date, YYYY-MM-DD");
  flag(app, "--horizon", f.horizon, "Forecast horizon in days");
  flag(app, "--sigma-beta", f.sigma_betas, "Comma-separated sigma_beta values")
      ->delimiter(',');
  flag(app, "--chains", f.chains, "Number of chains");
  flag(app, "--samples", f.samples, "Iterations per chain, warmup included");
  flag(app, "--warmup", f.warmup, "Warmup iterations per chain");
  flag(app, "--thin", f.thin, "Keep every n-th post-warmup iteration");
  flag(app, "--target-acceptance", f.target_acceptance, "Target acceptance rate");
  flag(app, "--metric", f.metric, "Proposal metric: diagonal or dense")
      ->check(CLI::IsMember({"diagonal", "dense"}));
  flag(app, "--threads", f.threads, "Worker threads for the chains; 0 uses every core");
  flag(app, "--init-retries", f.init_retries, "Initialisation attempts per chain");
  flag(app, "--substeps", f.substeps, "Integrator substeps per day");
  flag(app, "--max-components", f.max_components,
       "Mixture components per forecast day; 0 keeps every draw");
  flag(app, "--out", f.out, "Output directory");
  flag(app, "--seed", f.seed, "Random seed");
}

RunConfig build_config(const CLI::App& app, const Flags& f)
{
  RunConfig cfg = preset_config(parse_preset(f.preset));
  auto set = [&app](const std::string& name) { return given(app, name); };
  if (set("--deaths")) cfg.deaths_csv = f.deaths;
  if (set("--admissions")) cfg.admissions_csv = f.admissions;
  if (set("--calls")) cfg.calls_csv = f.calls;
  if (set("--population")) cfg.population = f.population;
  if (set("--window-start")) cfg.window_first = day_from_iso(f.window_start);
  if (set("--window-end")) cfg.window_last = day_from_iso(f.window_end);
  if (set("--horizon")) cfg.horizon = f.horizon;
  if (set("--sigma-beta")) cfg.sigma_betas = f.sigma_betas;
  if (set("--chains")) cfg.chains.n_chains = f.chains;
  if (set("--samples")) cfg.chains.n_samples = f.samples;
  if (set("--warmup")) cfg.chains.n_warmup = f.warmup;
  if (set("--thin")) cfg.chains.thin = f.thin;
  if (set("--target-acceptance")) cfg.chains.target_acceptance = f.target_acceptance;
  if (set("--metric")) {
    cfg.chains.metric = f.metric == "dense" ? ProposalMetric::dense : ProposalMetric::diagonal;
  }
  if (set("--threads")) cfg.chains.max_threads = f.threads;
  if (set("--init-retries")) cfg.chains.init_retries = f.init_retries;
  if (set("--substeps")) cfg.substeps_per_day = f.substeps;
  if (set("--max-components")) cfg.max_components = f.max_components;
  if (set("--out")) cfg.output_dir = f.out;
  if (set("--seed")) cfg.seed = f.seed;
  cfg.validate();
  return cfg;
}

void ensure_dir(const std::filesystem::path& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
}

int cmd_simulate(const RunConfig& cfg)
{
  if (cfg.preset != Preset::desk) {
    throw ConfigError("simulate needs known parameters; only the desk preset carries them");
  }
  const auto scenario = desk_scenario();
  ModelSpec spec = scenario.spec;
  spec.population = cfg.population;
  const auto tp = to_transmission_params(scenario.truth, spec);
  const auto op = to_observation_params(scenario.truth, spec);
  const auto data = simulate_synthetic(tp, op, cfg.window_first, cfg.window_last + cfg.horizon,
                                       cfg.seed, cfg.substeps_per_day);
  ensure_dir(cfg.output_dir);
  write_count_csv(cfg.output_dir / "deaths.csv", data.deaths);
  write_count_csv(cfg.output_dir / "admissions.csv", data.admissions);
  write_count_csv(cfg.output_dir / "calls.csv", data.calls);
  write_file(cfg.output_dir / "truth.csv", draws_csv({scenario.truth}));
  std::cout << "wrote deaths.csv, admissions.csv, calls.csv and truth.csv to "
            << cfg.output_dir.string() << '\n';
  return 0;
}

int cmd_calibrate(const RunConfig& cfg)
{
  if (cfg.sigma_betas.size() != 1) {
    throw ConfigError("calibrate takes exactly one --sigma-beta value");
  }
  const auto spec = cfg.model_spec();
  const ParamLayout layout(spec);
  PriorConfig prior;
  prior.sigma_beta = cfg.sigma_betas.front();
  ChainConfig chains = cfg.chains;
  chains.seed = cfg.seed;
  if (chains.init_intervals.empty()) {
    chains.init_intervals = default_init_intervals(layout);
  }
  const auto data = calibration_window(cfg, load_data(cfg));
  const auto cal = calibrate(spec, data, prior, chains, cfg.substeps_per_day);

  ensure_dir(cfg.output_dir);
  write_file(cfg.output_dir / "draws.csv", draws_csv(cal.params));

  std::ostringstream diag;
  diag << "parameter,mean,q05,q50,q95,rhat,ess\n";
  const auto names = layout.names();
  for (std::size_t k = 0; k < layout.size(); ++k) {
    std::vector<double> v;
    v.reserve(cal.params.size());
    for (const auto& p : cal.params) {
      v.push_back(p[k]);
    }
    double mean = 0.0;
    for (double x : v) {
      mean += x / static_cast<double>(v.size());
    }
    std::sort(v.begin(), v.end());
    auto q = [&v](double level) {
      return v[std::min(v.size() - 1, static_cast<std::size_t>(level * static_cast<double>(v.size())))];
    };
    const auto d = cal.draws.diagnostics.empty() ? ParameterDiagnostics{} : cal.draws.diagnostics[k];
    diag << names[k] << ',' << format_double(mean) << ',' << format_double(q(0.05)) << ','
         << format_double(q(0.5)) << ',' << format_double(q(0.95)) << ',' << format_double(d.rhat)
         << ',' << format_double(d.ess) << '\n';
  }
  write_file(cfg.output_dir / "diagnostics.csv", diag.str());
  for (const auto& w : cal.draws.warnings()) {
    std::cerr << "warning: " << w << '\n';
  }
  std::cout << "wrote " << cal.params.size() << " draws to "
            << (cfg.output_dir / "draws.csv").string() << '\n';
  return 0;
}

int cmd_forecast(const RunConfig& cfg, const std::string& draws_path, const std::string& mode)
{
  const auto spec = cfg.model_spec();
  const auto draws = read_draws_csv(draws_path, ParamLayout(spec));
  ForecastOptions options;
  options.first_day = cfg.window_last + 1;
  options.horizon = cfg.horizon;
  options.substeps_per_day = cfg.substeps_per_day;
  options.max_components = cfg.max_components;

  std::vector<ForecastMode> modes;
  if (mode == "both") {
    modes = {ForecastMode::point_estimate, ForecastMode::posterior_samples};
  } else {
    modes = {parse_mode(mode)};
  }
  CountSeries observed;
  if (!cfg.deaths_csv.empty()) {
    observed = ingest_csv(cfg.deaths_csv).window(options.first_day,
                                                 options.first_day + options.horizon - 1);
  }

  std::string quantiles;
  std::string components;
  for (auto m : modes) {
    const auto f = posterior_predictive(draws, spec, m, options);
    auto q = forecast_quantiles_csv(f, observed);
    auto c = forecast_components_csv(f);
    if (!quantiles.empty()) {
      q = q.substr(q.find('\n') + 1);
      c = c.substr(c.find('\n') + 1);
    }
    quantiles += q;
    components += c;
  }
  ensure_dir(cfg.output_dir);
  write_file(cfg.output_dir / "quantiles.csv", quantiles);
  write_file(cfg.output_dir / "components.csv", components);
  std::cout << "wrote quantiles.csv and components.csv to " << cfg.output_dir.string() << '\n';
  return 0;
}

int cmd_score(const RunConfig& cfg, const std::string& components_path)
{
  if (cfg.deaths_csv.empty()) {
    throw ConfigError("score needs --deaths with the observed counts");
  }
  const auto observed = ingest_csv(cfg.deaths_csv);
  std::ostringstream per_day;
  per_day << "mode,date,day,observed";
  for (auto r : all_rules) {
    per_day << ',' << rule_name(r);
  }
  per_day << '\n';
  std::ostringstream means;
  means << "mode,days";
  for (auto r : all_rules) {
    means << ',' << mean_rule_name(r);
  }
  means << ",nses_verdict\n";

  for (const auto& f : read_components_csv(components_path)) {
    std::vector<PredictiveDistribution> scored;
    std::vector<std::int64_t> counts;
    std::vector<int> days;
    for (const auto& o : observed) {
      const int index = o.day - f.first_day;
      if (index >= 0 && index < static_cast<int>(f.days.size())) {
        scored.push_back(f.days[static_cast<std::size_t>(index)]);
        counts.push_back(o.count);
        days.push_back(o.day);
      }
    }
    if (scored.empty()) {
      throw AlignmentError("no observations fall on the forecast days");
    }
    const auto report = score_forecast(scored, counts);
    for (std::size_t i = 0; i < days.size(); ++i) {
      per_day << mode_name(f.mode) << ',' << iso_from_day(days[i]) << ',' << days[i] << ','
              << counts[i];
      for (double s : report.per_day[i]) {
        per_day << ',' << format_double(s);
      }
      per_day << '\n';
    }
    means << mode_name(f.mode) << ',' << days.size();
    for (double s : report.mean) {
      means << ',' << format_double(s);
    }
    means << ',' << verdict_name(report.nses_verdict) << '\n';
  }
  ensure_dir(cfg.output_dir);
  write_file(cfg.output_dir / "scores.csv", per_day.str());
  write_file(cfg.output_dir / "mean_scores.csv", means.str());
  std::cout << means.str();
  return 0;
}

int cmd_sweep(const RunConfig& cfg)
{
  const auto result = run_sweep(cfg);
  std::cout << score_table_csv(cfg, result);
  for (const auto& cell : result.cells) {
    if (!cell.ok) {
      std::cerr << "sigma_beta " << sigma_label(cell.sigma_beta) << " failed: " << cell.failure
                << '\n';
    }
  }
  return 0;
}

int report(ErrorCategory category, const std::string& message, std::optional<std::size_t> row = {})
{
  nlohmann::json j{{"error", std::string(category_name(category))}, {"message", message}};
  if (row) {
    j["row"] = *row;
  }
  std::cerr << j.dump() << '\n';
  return exit_code(category);
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"SEIPRD calibration, forecasting and forecast scoring"};
  app.set_config("--config", "", "TOML or INI file with flag values; command-line flags win");
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  add_run_flags(app, flags);

  auto* simulate = app.add_subcommand("simulate", "Draw synthetic surveillance data (desk preset)");
  auto* calibrate = app.add_subcommand("calibrate", "Run the chains for one sigma_beta");
  auto* forecast = app.add_subcommand("forecast", "Posterior predictive forecast of daily deaths");
  auto* score = app.add_subcommand("score", "Score stored forecast components against observations");
  auto* sweep = app.add_subcommand("sweep", "Calibrate, forecast and score every sigma_beta");

  std::string draws_path;
  std::string mode = "both";
  forecast->add_option("--draws", draws_path, "Draws CSV written by calibrate")->required();
  forecast->add_option("--mode", mode, "point_estimate, posterior_samples or both")
      ->check(CLI::IsMember({"point_estimate", "posterior_samples", "both"}));
  std::string components_path;
  score->add_option("--components", components_path, "Components CSV written by forecast")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(ErrorCategory::config, e.what());
  }

  try {
    const RunConfig cfg = build_config(app, flags);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (calibrate->parsed()) return cmd_calibrate(cfg);
    if (forecast->parsed()) return cmd_forecast(cfg, draws_path, mode);
    if (score->parsed()) return cmd_score(cfg, components_path);
    if (sweep->parsed()) return cmd_sweep(cfg);
  } catch (const ValidationError& e) {
    return report(e.category(), e.what(), e.row());
  } catch (const OrderingError& e) {
    return report(e.category(), e.what(), e.row());
  } catch (const FormatError& e) {
    return report(e.category(), e.what(), e.row() ? std::optional<std::size_t>(e.row()) : std::nullopt);
  } catch (const Error& e) {
    return report(e.category(), e.what());
  }
  return report(ErrorCategory::config, "no subcommand given");
}
