#include "seiprd/errors.hpp"
#include "seiprd/io.hpp"
#include "seiprd/scenario.hpp"
#include "seiprd/sweep.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace seiprd;

namespace {

const std::filesystem::path scratch = std::filesystem::temp_directory_path() / "seiprd_sweep_test";

RunConfig tiny_config()
{
  RunConfig cfg = preset_config(Preset::desk);
  cfg.chains.n_chains = 2;
  cfg.chains.n_samples = 600;
  cfg.chains.n_warmup = 300;
  cfg.chains.thin = 3;
  cfg.max_components = 50;
  return cfg;
}

SurveillanceData desk_data(const RunConfig& cfg, std::uint64_t seed)
{
  const auto s = desk_scenario();
  return simulate_synthetic(to_transmission_params(s.truth, s.spec),
                            to_observation_params(s.truth, s.spec), cfg.window_first,
                            cfg.window_last + cfg.horizon, seed);
}

std::size_t count_lines(const std::string& text)
{
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

CellResult fake_cell(double sigma, double rps_point, double rps_post, double nses_point,
                     double nses_post)
{
  CellResult c;
  c.sigma_beta = sigma;
  c.ok = true;
  for (auto r : all_rules) {
    c.point.scores.mean[static_cast<std::size_t>(r)] = rps_point;
    c.posterior.scores.mean[static_cast<std::size_t>(r)] = rps_post;
  }
  c.point.scores.mean[static_cast<std::size_t>(ScoringRule::nses)] = nses_point;
  c.posterior.scores.mean[static_cast<std::size_t>(ScoringRule::nses)] = nses_post;
  return c;
}

int run_cli(const std::string& args)
{
  const std::string command = std::string(SEIPRD_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("preset defaults")
{
  const auto england = preset_config(Preset::england);
  CHECK(england.population == 56'550'138);
  CHECK(england.window_first == day_from_iso("2020-03-24"));
  CHECK(england.window_last == day_from_iso("2020-12-31"));
  CHECK(england.horizon == 21);
  CHECK(england.sigma_betas.size() == 7);
  CHECK(england.chains.n_chains * england.chains.n_retained() == 1536);
  CHECK(parse_preset("desk") == Preset::desk);
  CHECK_THROWS_AS(parse_preset("wales"), ConfigError);

  auto bad = england;
  bad.sigma_betas = {};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = england;
  bad.sigma_betas = {-0.1};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = england;
  bad.window_last = bad.window_first - 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = england;
  bad.chains.n_warmup = bad.chains.n_samples;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("sigma labels are fixed-point")
{
  CHECK(sigma_label(0.0005) == "0.0005");
  CHECK(sigma_label(0.05) == "0.05");
  CHECK(sigma_label(0.001) == "0.001");
}

TEST_CASE("best cell selection")
{
  SweepResult r;
  r.cells.push_back(fake_cell(0.001, 5.0, 4.0, 1.4, 1.3));
  r.cells.push_back(fake_cell(0.01, 3.0, 2.0, 0.9, 1.1));
  r.cells.push_back(fake_cell(0.05, 6.0, 2.5, 0.95, 0.7));
  const auto best = select_best(r.cells);
  REQUIRE(best.per_rule.size() == num_rules);
  for (const auto& b : best.per_rule) {
    if (b.rule == ScoringRule::nses) {
      // largest mean NSES below one
      CHECK(b.cell == 2);
      CHECK(b.mode == ForecastMode::point_estimate);
      CHECK(b.value == 0.95);
    } else {
      CHECK(b.cell == 1);
      CHECK(b.mode == ForecastMode::posterior_samples);
      CHECK(b.value == 2.0);
    }
  }
  REQUIRE(best.overall.has_value());
  CHECK(*best.overall == 1);

  std::vector<CellResult> above;
  above.push_back(fake_cell(0.001, 1.0, 1.0, 1.4, 1.3));
  above.push_back(fake_cell(0.01, 1.0, 1.0, 1.2, 1.6));
  const auto b2 = select_best(above);
  for (const auto& b : b2.per_rule) {
    if (b.rule == ScoringRule::nses) {
      CHECK(b.cell == 1);
      CHECK(b.value == 1.2);
    }
  }

  // failed cells never win
  std::vector<CellResult> failed;
  failed.push_back(fake_cell(0.001, 0.1, 0.1, 0.9, 0.9));
  failed.back().ok = false;
  failed.push_back(fake_cell(0.01, 1.0, 1.0, 0.5, 0.5));
  for (const auto& b : select_best(failed).per_rule) {
    CHECK(b.cell == 1);
  }
}

TEST_CASE("tiny sweep produces complete tables")
{
  auto cfg = tiny_config();
  cfg.sigma_betas = {0.005, 0.05};
  const auto data = desk_data(cfg, 3);
  const auto result = run_sweep(cfg, data);
  REQUIRE(result.cells.size() == 2);
  for (const auto& c : result.cells) {
    CHECK(c.ok);
    CHECK(c.draws.size() == 200);
    CHECK(c.point.forecast.days.size() == 21);
    CHECK(c.posterior.forecast.days.size() == 21);
    CHECK(c.point.scored_days.size() == 21);
    CHECK(c.posterior.forecast.days.front().components().size() == 50);
    CHECK(c.point.forecast.days.front().components().size() == 1);
  }

  const auto table = score_table_csv(cfg, result);
  CHECK(first_line(table) == "block,score,0.005,0.05");
  CHECK(count_lines(table) == 1 + 2 * num_rules);
  CHECK(table.find("point_estimate,LogS,") != std::string::npos);
  CHECK(table.find("posterior_samples,NSES,") != std::string::npos);
  CHECK(table.find("point_estimate,LogS,") < table.find("posterior_samples,LogS,"));

  const auto quantiles = quantiles_csv(result.cells[0]);
  CHECK(first_line(quantiles) == "mode,date,day,mean,q0.025,q0.25,q0.5,q0.75,q0.975,observed");
  CHECK(count_lines(quantiles) == 1 + 2 * 21);

  cfg.sigma_betas = {0.01};
  const auto single = run_sweep(cfg, data);
  CHECK(first_line(score_table_csv(cfg, single)) == "block,score,0.01");
  CHECK(single.best.overall == 0u);
}

TEST_CASE("components and draws round-trip through their files")
{
  auto cfg = tiny_config();
  cfg.sigma_betas = {0.01};
  const auto data = desk_data(cfg, 4);
  const auto result = run_sweep(cfg, data);
  const auto& cell = result.cells.front();
  std::filesystem::create_directories(scratch);

  const auto components_path = scratch / "components.csv";
  write_file(components_path, components_csv(cell));
  const auto forecasts = read_components_csv(components_path);
  REQUIRE(forecasts.size() == 2);
  const auto held_out = held_out_deaths(cfg, data);
  for (const auto& f : forecasts) {
    const auto& original = cell.mode(f.mode);
    std::vector<PredictiveDistribution> days;
    std::vector<std::int64_t> observed;
    for (int day : original.scored_days) {
      days.push_back(f.days[static_cast<std::size_t>(day - f.first_day)]);
      observed.push_back(held_out.at(day));
    }
    const auto rescored = score_forecast(days, observed);
    for (auto r : all_rules) {
      CHECK(rescored.mean_of(r) == original.scores.mean_of(r));
    }
  }

  const auto draws_path = scratch / "draws.csv";
  write_file(draws_path, draws_csv(cell.draws));
  const auto back = read_draws_csv(draws_path, cell.draws.front().layout);
  REQUIRE(back.size() == cell.draws.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].values == cell.draws[i].values);
  }
}

TEST_CASE("an empty held-out window is an alignment error")
{
  auto cfg = tiny_config();
  cfg.sigma_betas = {0.01};
  auto data = desk_data(cfg, 5);
  data.deaths = data.deaths.window(cfg.window_first, cfg.window_last);
  CHECK_THROWS_AS(run_sweep(cfg, data), AlignmentError);
}

TEST_CASE("synthetic data generation")
{
  const auto s = desk_scenario();
  const auto tp = to_transmission_params(s.truth, s.spec);
  const auto op = to_observation_params(s.truth, s.spec);
  const auto a = simulate_synthetic(tp, op, 1, 60, 7);
  const auto b = simulate_synthetic(tp, op, 1, 60, 7);
  CHECK(a.deaths == b.deaths);
  CHECK(a.calls == b.calls);
  CHECK(a.deaths.size() == 60);
  for (const auto& o : a.calls.observations()) {
    CHECK_FALSE(is_weekend(o.day));
  }

  auto silent = tp;
  silent.beta = PiecewiseLinear({0.0, 1.0}, {0.0, 0.0});
  silent.ifr = 1e-12;
  const auto none = simulate_synthetic(silent, op, 1, 30, 1);
  std::int64_t total = 0;
  for (const auto& o : none.deaths.observations()) {
    total += o.count;
  }
  CHECK(total == 0);

  // mean of simulated deaths on one day against the latent mean
  const auto traj = integrate_daily(tp, {4, 80});
  const double mu = traj[80].D() - traj[79].D();
  double sum = 0.0;
  const int reps = 10'000;
  for (int i = 0; i < reps; ++i) {
    sum += static_cast<double>(simulate_synthetic(tp, op, 80, 80, 100 + i).deaths.at(80));
  }
  CHECK(sum / reps == doctest::Approx(mu).epsilon(0.02));
}

TEST_CASE("command-line error categories")
{
  std::filesystem::create_directories(scratch);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("") == exit_code(ErrorCategory::config));
  CHECK(run_cli("sweep --no-such-flag 1") == exit_code(ErrorCategory::config));
  CHECK(run_cli("sweep --preset wales") == exit_code(ErrorCategory::config));
  CHECK(run_cli("sweep --deaths /nonexistent/d.csv --admissions /nonexistent/a.csv "
                "--calls /nonexistent/c.csv --out " + (scratch / "cli").string()) ==
        exit_code(ErrorCategory::io));

  const auto bad = scratch / "bad.csv";
  write_file(bad, "date,count\n2020-03-25,1\n2020-03-26,-4\n");
  CHECK(run_cli("sweep --deaths " + bad.string() + " --admissions " + bad.string() + " --calls " +
                bad.string() + " --out " + (scratch / "cli").string()) ==
        exit_code(ErrorCategory::validation));
  CHECK(run_cli("simulate --preset england --out " + (scratch / "sim").string()) ==
        exit_code(ErrorCategory::config));

  // flags override the config file
  const auto config = scratch / "run.toml";
  write_file(config, "preset = \"desk\"\nseed = 9\nhorizon = 0\n");
  CHECK(run_cli("simulate --config " + config.string() + " --out " + (scratch / "sim").string()) ==
        exit_code(ErrorCategory::config));
  CHECK(run_cli("simulate --config " + config.string() + " --horizon 3 --out " +
                (scratch / "sim").string()) == 0);
  CHECK(std::filesystem::exists(scratch / "sim" / "deaths.csv"));
}
