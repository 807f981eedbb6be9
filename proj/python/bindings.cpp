// Python bindings for the core operations.

#include "seiprd/errors.hpp"
#include "seiprd/integrator.hpp"
#include "seiprd/io.hpp"
#include "seiprd/mcmc.hpp"
#include "seiprd/scenario.hpp"
#include "seiprd/scoring.hpp"
#include "seiprd/sweep.hpp"

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

namespace py = pybind11;
using namespace seiprd;

namespace {

py::array_t<double> matrix(const std::vector<double>& values, std::vector<py::ssize_t> shape)
{
  py::array_t<double> out(shape);
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

// Keyword names follow the command-line flags with dashes as underscores.
RunConfig config_from(const py::dict& kw)
{
  const std::string preset = kw.contains("preset") ? kw["preset"].cast<std::string>() : "england";
  RunConfig cfg = preset_config(parse_preset(preset));
  for (const auto& [key_obj, value] : kw) {
    const auto key = key_obj.cast<std::string>();
    if (key == "preset") continue;
    else if (key == "deaths") cfg.deaths_csv = value.cast<std::string>();
    else if (key == "admissions") cfg.admissions_csv = value.cast<std::string>();
    else if (key == "calls") cfg.calls_csv = value.cast<std::string>();
    else if (key == "population") cfg.population = value.cast<std::int64_t>();
    else if (key == "window_start") cfg.window_first = day_from_iso(value.cast<std::string>());
    else if (key == "window_end") cfg.window_last = day_from_iso(value.cast<std::string>());
    else if (key == "horizon") cfg.horizon = value.cast<int>();
    else if (key == "sigma_beta") cfg.sigma_betas = value.cast<std::vector<double>>();
    else if (key == "chains") cfg.chains.n_chains = value.cast<std::size_t>();
    else if (key == "samples") cfg.chains.n_samples = value.cast<std::size_t>();
    else if (key == "warmup") cfg.chains.n_warmup = value.cast<std::size_t>();
    else if (key == "thin") cfg.chains.thin = value.cast<std::size_t>();
    else if (key == "target_acceptance") cfg.chains.target_acceptance = value.cast<double>();
    else if (key == "metric") {
      const auto m = value.cast<std::string>();
      if (m != "dense" && m != "diagonal") throw ConfigError("metric must be dense or diagonal");
      cfg.chains.metric = m == "dense" ? ProposalMetric::dense : ProposalMetric::diagonal;
    }
    else if (key == "threads") cfg.chains.max_threads = value.cast<std::size_t>();
    else if (key == "init_retries") cfg.chains.init_retries = value.cast<std::size_t>();
    else if (key == "substeps") cfg.substeps_per_day = value.cast<int>();
    else if (key == "max_components") cfg.max_components = value.cast<std::size_t>();
    else if (key == "out") cfg.output_dir = value.cast<std::string>();
    else if (key == "seed") cfg.seed = value.cast<std::uint64_t>();
    else throw ConfigError("unknown option '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

py::dict series_dict(const CountSeries& s)
{
  std::vector<int> days;
  std::vector<std::int64_t> counts;
  for (const auto& o : s) {
    days.push_back(o.day);
    counts.push_back(o.count);
  }
  py::dict d;
  d["day"] = days;
  d["count"] = counts;
  return d;
}

py::dict rule_dict(const RuleScores& s)
{
  py::dict d;
  for (auto r : all_rules) {
    d[py::str(std::string(rule_name(r)))] = s[static_cast<std::size_t>(r)];
  }
  return d;
}

ScoringRule parse_rule(const std::string& name)
{
  for (auto r : all_rules) {
    if (rule_name(r) == name) return r;
  }
  throw ConfigError("unknown scoring rule '" + name + "'");
}

py::dict forecast_dict(const Forecast& f)
{
  const auto n = static_cast<py::ssize_t>(f.days.size());
  std::vector<double> mean, quantiles;
  for (const auto& p : f.days) {
    mean.push_back(p.mean());
    for (double q : forecast_quantiles) {
      quantiles.push_back(static_cast<double>(p.quantile(q)));
    }
  }
  py::dict d;
  d["mode"] = std::string(mode_name(f.mode));
  d["first_day"] = f.first_day;
  d["mean"] = matrix(mean, {n});
  d["quantile_levels"] = std::vector<double>(std::begin(forecast_quantiles), std::end(forecast_quantiles));
  d["quantiles"] = matrix(quantiles, {n, static_cast<py::ssize_t>(std::size(forecast_quantiles))});
  d["dropped_components"] = f.dropped_components;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "SEIPRD transmission model, calibration, forecasting and scoring";

  static py::exception<Error> base(m, "SeiprdError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(base.ptr())(py::str(e.what()));
      exc.attr("category") = std::string(category_name(e.category()));
      PyErr_SetObject(base.ptr(), exc.ptr());
    }
  });

  m.def("compartment_names", [] {
    return std::vector<std::string>{"S", "E1", "E2", "I1", "I2", "P1", "P2", "R", "D"};
  });

  m.def(
      "integrate",
      [](double alpha1, double alpha2, std::vector<double> beta_knots, std::vector<double> beta_values,
         double latent_period, double infectious_period, double pending_period, double ifr,
         std::int64_t population, int days, int substeps) {
        TransmissionParams tp;
        tp.alpha1 = alpha1;
        tp.alpha2 = alpha2;
        tp.beta = PiecewiseLinear(std::move(beta_knots), std::move(beta_values));
        tp.latent_period = latent_period;
        tp.infectious_period = infectious_period;
        tp.pending_period = pending_period;
        tp.ifr = ifr;
        tp.population = population;
        const auto traj = integrate_daily(tp, {substeps, days});
        std::vector<double> flat;
        for (const auto& s : traj.states) {
          flat.insert(flat.end(), s.values.begin(), s.values.end());
        }
        return matrix(flat, {static_cast<py::ssize_t>(traj.states.size()), 9});
      },
      py::arg("alpha1"), py::arg("alpha2"), py::arg("beta_knots"), py::arg("beta_values"),
      py::arg("latent_period"), py::arg("infectious_period"), py::arg("pending_period"),
      py::arg("ifr"), py::arg("population"), py::arg("days"), py::arg("substeps") = 4,
      "Daily compartment values, shape (days + 1, 9), columns as compartment_names().");

  m.def("nb_log_pmf", &nb_log_pmf, py::arg("n"), py::arg("mu"), py::arg("phi"));

  m.def(
      "score",
      [](const std::string& rule, std::vector<double> pmf, std::int64_t x) {
        return score(parse_rule(rule), PredictiveDistribution::from_pmf(std::move(pmf)), x);
      },
      py::arg("rule"), py::arg("pmf"), py::arg("x"));

  m.def(
      "score_all",
      [](std::vector<double> pmf, std::int64_t x) {
        return rule_dict(score_all(PredictiveDistribution::from_pmf(std::move(pmf)), x));
      },
      py::arg("pmf"), py::arg("x"), "Every scoring rule for a finite pmf on 0..len(pmf)-1.");

  m.def(
      "score_mixture",
      [](const std::vector<std::pair<double, double>>& components, std::int64_t x) {
        std::vector<NbComponent> c;
        for (const auto& [mean, dispersion] : components) {
          c.push_back({mean, dispersion});
        }
        return rule_dict(score_all(PredictiveDistribution::from_components(std::move(c)), x));
      },
      py::arg("components"), py::arg("x"),
      "Every scoring rule for an equal-weight mixture of (mean, dispersion) negative binomials.");

  m.def(
      "run_chains",
      [](const std::function<double(py::array_t<double>)>& log_density, std::size_t dim,
         std::size_t chains, std::size_t samples, std::size_t warmup, std::size_t thin,
         std::uint64_t seed, const std::string& metric) {
        ChainConfig cfg;
        cfg.n_chains = chains;
        cfg.n_samples = samples;
        cfg.n_warmup = warmup;
        cfg.thin = thin;
        cfg.seed = seed;
        cfg.max_threads = 1;  // the callback holds the GIL
        cfg.metric = metric == "dense" ? ProposalMetric::dense : ProposalMetric::diagonal;
        auto target = [&log_density, dim](std::span<const double> x) {
          py::array_t<double> a(static_cast<py::ssize_t>(dim));
          std::copy(x.begin(), x.end(), a.mutable_data());
          return log_density(a);
        };
        const auto draws = run_chains(target, dim, cfg);
        py::dict out;
        out["draws"] = matrix(draws.values, {static_cast<py::ssize_t>(draws.n_chains),
                                             static_cast<py::ssize_t>(draws.n_draws),
                                             static_cast<py::ssize_t>(dim)});
        std::vector<double> rhat, ess, acceptance;
        for (const auto& d : draws.diagnostics) {
          rhat.push_back(d.rhat);
          ess.push_back(d.ess);
        }
        for (const auto& c : draws.chains) {
          acceptance.push_back(c.acceptance);
        }
        out["rhat"] = rhat;
        out["ess"] = ess;
        out["acceptance"] = acceptance;
        out["warnings"] = draws.warnings();
        return out;
      },
      py::arg("log_density"), py::arg("dim"), py::arg("chains") = 6, py::arg("samples") = 512,
      py::arg("warmup") = 256, py::arg("thin") = 1, py::arg("seed") = 1,
      py::arg("metric") = "diagonal",
      "Adaptive random-walk Metropolis on an unconstrained log density.");

  m.def("split_rhat", [](const std::vector<double>& values, std::size_t chains) {
    return split_rhat(values, chains).value;
  });
  m.def("ess", [](const std::vector<double>& values, std::size_t chains) {
    return ess(values, chains);
  });

  m.def("desk_truth", [] {
    const auto s = desk_scenario();
    py::dict d;
    const auto names = s.truth.layout.names();
    for (std::size_t k = 0; k < names.size(); ++k) {
      d[py::str(names[k])] = s.truth[k];
    }
    return d;
  });

  m.def(
      "simulate_desk",
      [](int first_day, int last_day, std::uint64_t seed) {
        const auto s = desk_scenario();
        const auto data = simulate_synthetic(to_transmission_params(s.truth, s.spec),
                                             to_observation_params(s.truth, s.spec), first_day,
                                             last_day, seed);
        py::dict d;
        d["deaths"] = series_dict(data.deaths);
        d["admissions"] = series_dict(data.admissions);
        d["calls"] = series_dict(data.calls);
        return d;
      },
      py::arg("first_day"), py::arg("last_day"), py::arg("seed") = 1,
      "Synthetic counts from the desk scenario's generating parameters.");

  m.def("day_from_iso", &day_from_iso);
  m.def("iso_from_day", &iso_from_day);

  m.def(
      "calibrate",
      [](double sigma_beta, const py::kwargs& kw) {
        RunConfig cfg = config_from(kw);
        const auto spec = cfg.model_spec();
        const ParamLayout layout(spec);
        PriorConfig prior;
        prior.sigma_beta = sigma_beta;
        ChainConfig chains = cfg.chains;
        chains.seed = cfg.seed;
        if (chains.init_intervals.empty()) {
          chains.init_intervals = default_init_intervals(layout);
        }
        const auto data = calibration_window(cfg, load_data(cfg));
        Calibration cal;
        {
          py::gil_scoped_release release;
          cal = calibrate(spec, data, prior, chains, cfg.substeps_per_day);
        }
        std::vector<double> flat;
        for (const auto& p : cal.params) {
          flat.insert(flat.end(), p.values.begin(), p.values.end());
        }
        py::dict out;
        out["names"] = layout.names();
        out["draws"] = matrix(flat, {static_cast<py::ssize_t>(cal.params.size()),
                                     static_cast<py::ssize_t>(layout.size())});
        std::vector<double> rhat;
        for (const auto& d : cal.draws.diagnostics) {
          rhat.push_back(d.rhat);
        }
        out["rhat"] = rhat;
        out["divergences"] = cal.divergences;
        return out;
      },
      py::arg("sigma_beta"),
      "Calibrates on the configured data; keywords follow the command-line flags.");

  m.def(
      "forecast",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> draws,
         const std::string& mode, const py::kwargs& kw) {
        RunConfig cfg = config_from(kw);
        const auto spec = cfg.model_spec();
        const ParamLayout layout(spec);
        if (draws.ndim() != 2 || static_cast<std::size_t>(draws.shape(1)) != layout.size()) {
          throw DomainError("draws must have shape (n, " + std::to_string(layout.size()) + ")");
        }
        std::vector<ParamVector> params;
        for (py::ssize_t i = 0; i < draws.shape(0); ++i) {
          const double* row = draws.data(i, 0);
          params.emplace_back(layout, std::vector<double>(row, row + layout.size()));
        }
        ForecastOptions options;
        options.first_day = cfg.window_last + 1;
        options.horizon = cfg.horizon;
        options.substeps_per_day = cfg.substeps_per_day;
        options.max_components = cfg.max_components;
        return forecast_dict(posterior_predictive(params, spec, parse_mode(mode), options));
      },
      py::arg("draws"), py::arg("mode") = "posterior_samples",
      "Posterior-predictive daily deaths after the calibration window.");

  m.def(
      "sweep",
      [](const py::kwargs& kw) {
        const RunConfig cfg = config_from(kw);
        SweepResult result;
        {
          py::gil_scoped_release release;
          result = run_sweep(cfg);
        }
        py::dict out;
        out["score_table"] = score_table_csv(cfg, result);
        out["best"] = best_csv(cfg, result);
        out["cells"] = cells_csv(result);
        out["output_dir"] = cfg.output_dir.string();
        return out;
      },
      "Calibrates, forecasts and scores every sigma_beta and writes the output files.");
}
