#include "seiprd/priors.hpp"

#include "seiprd/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace seiprd {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

double log_beta_pdf(double x, double a, double b)
{
  const double log_norm = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_norm;
}

double log_normal_pdf(double x, double mean, double sd)
{
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

// log P(X > 0) for X ~ Normal(mean, sd), i.e. log Phi(mean / sd).
double log_upper_mass_at_zero(double mean, double sd)
{
  return std::log(0.5 * std::erfc(-mean / (sd * std::numbers::sqrt2)));
}

double log_truncated_normal_pdf(double x, double mean, double sd)
{
  return log_normal_pdf(x, mean, sd) - log_upper_mass_at_zero(mean, sd);
}

double logit(double x) { return std::log(x) - std::log1p(-x); }

double inv_logit(double u)
{
  if (u >= 0.0) {
    return 1.0 / (1.0 + std::exp(-u));
  }
  const double e = std::exp(u);
  return e / (1.0 + e);
}

std::vector<double> slice(const ParamVector& p, std::size_t first, std::size_t count)
{
  return {p.values.begin() + static_cast<std::ptrdiff_t>(first),
          p.values.begin() + static_cast<std::ptrdiff_t>(first + count)};
}

}  // namespace

void ModelSpec::validate() const
{
  if (population < 6) {
    throw DomainError("population must be at least 6");
  }
  if (beta_knots.size() < 2 || rho_admissions_knots.size() < 2 || rho_calls_knots.size() < 2) {
    throw DomainError("every knot schedule needs at least two knots");
  }
  if (beta_knots.front() != 0.0) {
    throw DomainError("beta knots must start at model day 0");
  }
  auto increasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (!(v[i] > v[i - 1])) {
        return false;
      }
    }
    return true;
  };
  if (!increasing(beta_knots) || !increasing(rho_admissions_knots) ||
      !increasing(rho_calls_knots)) {
    throw DomainError("knot times must be strictly increasing");
  }
}

ParamLayout::ParamLayout(std::size_t n_beta, std::size_t n_rho_admissions, std::size_t n_rho_calls)
    : n_beta_{n_beta}, n_rho_admissions_{n_rho_admissions}, n_rho_calls_{n_rho_calls}
{
  rho_admissions_ = beta_begin + n_beta_ + 7;
  rho_calls_ = rho_admissions_ + n_rho_admissions_;
}

ParamLayout::ParamLayout(const ModelSpec& spec)
    : ParamLayout(spec.beta_knots.size(), spec.rho_admissions_knots.size(),
                  spec.rho_calls_knots.size())
{
}

Support ParamLayout::support(std::size_t i) const
{
  if (i == alpha1 || i == alpha2 || i == ifr() || i >= rho_admissions_) {
    return Support::unit_interval;
  }
  return Support::positive;
}

std::string ParamLayout::name(std::size_t i) const
{
  if (i == alpha1) return "alpha1";
  if (i == alpha2) return "alpha2";
  if (i < latent_period()) return "beta_" + std::to_string(i - beta_begin + 1);
  if (i == latent_period()) return "d_L";
  if (i == infectious_period()) return "d_I";
  if (i == pending_period()) return "d_P";
  if (i == ifr()) return "omega";
  if (i == inv_phi_deaths()) return "inv_phi_deaths";
  if (i == inv_phi_admissions()) return "inv_phi_admissions";
  if (i == inv_phi_calls()) return "inv_phi_calls";
  if (i < rho_calls_) return "rho_admissions_" + std::to_string(i - rho_admissions_ + 1);
  return "rho_calls_" + std::to_string(i - rho_calls_ + 1);
}

std::vector<std::string> ParamLayout::names() const
{
  std::vector<std::string> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    out.push_back(name(i));
  }
  return out;
}

ParamVector::ParamVector(ParamLayout l, std::vector<double> v)
    : layout{l}, values{std::move(v)}
{
  if (values.size() != layout.size()) {
    throw DomainError("parameter vector has " + std::to_string(values.size()) +
                      " entries, layout expects " + std::to_string(layout.size()));
  }
}

bool ParamVector::in_support() const
{
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = values[i];
    if (!std::isfinite(x) || !(x > 0.0)) {
      return false;
    }
    if (layout.support(i) == Support::unit_interval && !(x < 1.0)) {
      return false;
    }
  }
  return true;
}

void PriorConfig::validate() const
{
  if (!(sigma_beta > 0.0) || !std::isfinite(sigma_beta)) {
    throw DomainError("sigma_beta must be positive");
  }
}

double log_prior(const ParamVector& p, const PriorConfig& cfg)
{
  if (!p.in_support()) {
    return neg_inf;
  }
  const auto& l = p.layout;
  double lp = 0.0;
  lp += log_beta_pdf(p[l.alpha1], cfg.alpha1_a, cfg.alpha1_b);
  lp += log_beta_pdf(p[l.alpha2], cfg.alpha2_a, cfg.alpha2_b);

  // half-normal on the first knot, truncated normal random walk afterwards
  lp += std::log(2.0) + log_normal_pdf(p[l.beta(0)], 0.0, cfg.beta1_scale);
  for (std::size_t j = 1; j < l.n_beta(); ++j) {
    lp += log_truncated_normal_pdf(p[l.beta(j)], p[l.beta(j - 1)], cfg.sigma_beta);
  }

  lp += log_truncated_normal_pdf(p[l.latent_period()], cfg.latent_mean, cfg.latent_sd);
  lp += log_truncated_normal_pdf(p[l.infectious_period()], cfg.infectious_mean, cfg.infectious_sd);
  lp += log_truncated_normal_pdf(p[l.pending_period()], cfg.pending_mean, cfg.pending_sd);
  lp += log_beta_pdf(p[l.ifr()], cfg.ifr_a, cfg.ifr_b);

  for (std::size_t i : {l.inv_phi_deaths(), l.inv_phi_admissions(), l.inv_phi_calls()}) {
    lp += std::log(cfg.inv_phi_rate) - cfg.inv_phi_rate * p[i];
  }
  for (std::size_t k = 0; k < l.n_rho_admissions(); ++k) {
    lp += log_beta_pdf(p[l.rho_admissions(k)], cfg.rho_a, cfg.rho_b);
  }
  for (std::size_t k = 0; k < l.n_rho_calls(); ++k) {
    lp += log_beta_pdf(p[l.rho_calls(k)], cfg.rho_a, cfg.rho_b);
  }
  return std::isnan(lp) ? neg_inf : lp;
}

Unconstrained to_unconstrained(const ParamVector& p)
{
  if (!p.in_support()) {
    throw DomainError("cannot transform a parameter vector outside its support");
  }
  Unconstrained out;
  out.values.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = p[i];
    if (p.layout.support(i) == Support::positive) {
      out.values[i] = std::log(x);
      out.log_jacobian += std::log(x);
    } else {
      out.values[i] = logit(x);
      out.log_jacobian += std::log(x) + std::log1p(-x);
    }
  }
  return out;
}

Constrained to_constrained(std::span<const double> u, const ParamLayout& layout)
{
  if (u.size() != layout.size()) {
    throw DomainError("unconstrained vector does not match the parameter layout");
  }
  Constrained out;
  out.params.layout = layout;
  out.params.values.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (layout.support(i) == Support::positive) {
      out.params.values[i] = std::exp(u[i]);
      out.log_jacobian += u[i];
    } else {
      const double x = inv_logit(u[i]);
      out.params.values[i] = x;
      // log x(1-x) = -softplus(-u) - softplus(u)
      out.log_jacobian += -std::abs(u[i]) - 2.0 * std::log1p(std::exp(-std::abs(u[i])));
    }
  }
  return out;
}

TransmissionParams to_transmission_params(const ParamVector& p, const ModelSpec& spec)
{
  const auto& l = p.layout;
  TransmissionParams tp;
  tp.alpha1 = p[l.alpha1];
  tp.alpha2 = p[l.alpha2];
  tp.beta = PiecewiseLinear(spec.beta_knots, slice(p, l.beta(0), l.n_beta()));
  tp.latent_period = p[l.latent_period()];
  tp.infectious_period = p[l.infectious_period()];
  tp.pending_period = p[l.pending_period()];
  tp.ifr = p[l.ifr()];
  tp.population = spec.population;
  return tp;
}

ObservationParams to_observation_params(const ParamVector& p, const ModelSpec& spec)
{
  const auto& l = p.layout;
  ObservationParams op;
  op.phi_deaths = 1.0 / p[l.inv_phi_deaths()];
  op.phi_admissions = 1.0 / p[l.inv_phi_admissions()];
  op.phi_calls = 1.0 / p[l.inv_phi_calls()];
  op.rho_admissions = PiecewiseLinear(spec.rho_admissions_knots,
                                      slice(p, l.rho_admissions(0), l.n_rho_admissions()));
  op.rho_calls = PiecewiseLinear(spec.rho_calls_knots, slice(p, l.rho_calls(0), l.n_rho_calls()));
  return op;
}

Posterior::Posterior(ModelSpec spec, SurveillanceData data, PriorConfig prior, int substeps_per_day)
    : spec_{std::move(spec)},
      layout_{spec_},
      data_{std::move(data)},
      prior_{prior},
      substeps_{substeps_per_day},
      horizon_{std::max(1, data_.last_day())},
      divergences_{std::make_shared<std::atomic<std::size_t>>(0)}
{
  spec_.validate();
  prior_.validate();
  if (substeps_ < 1) {
    throw DomainError("substeps_per_day must be at least 1");
  }
}

Posterior::Terms Posterior::terms(std::span<const double> u) const
{
  Terms t;
  auto constrained = to_constrained(u, layout_);
  t.log_jacobian = constrained.log_jacobian;
  t.prior = log_prior(constrained.params, prior_);
  if (!std::isfinite(t.prior)) {
    t.total = neg_inf;
    return t;
  }

  const auto tp = to_transmission_params(constrained.params, spec_);
  const auto op = to_observation_params(constrained.params, spec_);
  DailyTrajectory trajectory;
  try {
    trajectory = integrate_daily(tp, IntegratorConfig{substeps_, horizon_});
  } catch (const IntegrationDiverged&) {
    divergences_->fetch_add(1);
    t.likelihood = neg_inf;
    t.total = neg_inf;
    return t;
  }
  t.likelihood = log_likelihood(data_, latent_means(trajectory, tp, op), op);
  t.total = t.prior + t.likelihood + t.log_jacobian;
  if (std::isnan(t.total)) {
    t.total = neg_inf;
  }
  return t;
}

}  // namespace seiprd
