#include "seiprd/model.hpp"

#include "seiprd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace seiprd {

double CompartmentState::total() const
{
  return std::accumulate(values.begin(), values.end(), 0.0);
}

bool CompartmentState::all_finite() const
{
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> knot_times, std::vector<double> knot_values)
    : times_{std::move(knot_times)}, values_{std::move(knot_values)}
{
  if (times_.size() != values_.size()) {
    throw DomainError("piecewise-linear function needs one value per knot");
  }
  if (times_.size() < 2) {
    throw DomainError("piecewise-linear function needs at least two knots");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || !std::isfinite(values_[i])) {
      throw DomainError("piecewise-linear knots must be finite");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw DomainError("piecewise-linear knot times must be strictly increasing");
    }
  }
  slopes_.resize(times_.size() - 1);
  for (std::size_t j = 0; j + 1 < times_.size(); ++j) {
    slopes_[j] = (values_[j + 1] - values_[j]) / (times_[j + 1] - times_[j]);
  }
}

double PiecewiseLinear::operator()(double t) const
{
  if (t <= times_.front()) {
    return values_.front();
  }
  if (t >= times_.back()) {
    return values_.back();
  }
  // first knot strictly greater than t; t lies in [times_[j-1], times_[j])
  auto upper = std::upper_bound(times_.begin(), times_.end(), t);
  auto j = static_cast<std::size_t>(upper - times_.begin()) - 1;
  return values_[j] + slopes_[j] * (t - times_[j]);
}

double eval_piecewise(const PiecewiseLinear& f, double t) { return f(t); }

namespace {

bool in_open_unit_interval(double x) { return x > 0.0 && x < 1.0; }

}  // namespace

void TransmissionParams::validate() const
{
  if (!in_open_unit_interval(alpha1) || !in_open_unit_interval(alpha2)) {
    throw DomainError("alpha1 and alpha2 must lie in (0, 1)");
  }
  if (!in_open_unit_interval(ifr)) {
    throw DomainError("infection fatality ratio must lie in (0, 1)");
  }
  if (!(latent_period > 0.0) || !(infectious_period > 0.0) || !(pending_period > 0.0) ||
      !std::isfinite(latent_period) || !std::isfinite(infectious_period) ||
      !std::isfinite(pending_period)) {
    throw DomainError("latent, infectious and pending periods must be positive");
  }
  if (population < 6) {
    throw DomainError("population must be at least 6, got " + std::to_string(population));
  }
  if (beta.size() < 2) {
    throw DomainError("beta needs at least two knots");
  }
  if (beta.knot_times().front() != 0.0) {
    throw DomainError("beta knots must start at model day 0");
  }
  for (double b : beta.knot_values()) {
    if (b < 0.0) {
      throw DomainError("beta knot values must be non-negative");
    }
  }
}

CompartmentState initial_state(const TransmissionParams& params)
{
  params.validate();
  const double rest = static_cast<double>(params.population) - 5.0;
  const double a1 = params.alpha1;
  const double a2 = params.alpha2;
  const double exposed = 0.5 * rest * (1.0 - a1) * a2 + 1.0;
  const double infectious = 0.5 * rest * (1.0 - a1) * (1.0 - a2) + 1.0;

  CompartmentState y;
  y[Compartment::S] = rest * a1 + 1.0;
  y[Compartment::E1] = exposed;
  y[Compartment::E2] = exposed;
  y[Compartment::I1] = infectious;
  y[Compartment::I2] = infectious;
  return y;
}

CompartmentState rhs(double t, const CompartmentState& y, const TransmissionParams& params)
{
  return TransmissionRhs(params)(t, y);
}

TransmissionRhs::TransmissionRhs(const TransmissionParams& params)
    : beta_{&params.beta},
      inv_population_{1.0 / static_cast<double>(params.population)},
      latent_rate_{2.0 / params.latent_period},
      infectious_rate_{2.0 / params.infectious_period},
      pending_rate_{2.0 / params.pending_period},
      ifr_{params.ifr}
{
}

CompartmentState TransmissionRhs::operator()(double t, const CompartmentState& y) const
{
  const double infection = (*beta_)(t) * (y.I1() + y.I2()) * inv_population_ * y.S();
  const double pending_exit = pending_rate_ * y.P2();

  CompartmentState dy;
  dy[Compartment::S] = -infection;
  dy[Compartment::E1] = infection - latent_rate_ * y.E1();
  dy[Compartment::E2] = latent_rate_ * (y.E1() - y.E2());
  dy[Compartment::I1] = latent_rate_ * y.E2() - infectious_rate_ * y.I1();
  dy[Compartment::I2] = infectious_rate_ * (y.I1() - y.I2());
  dy[Compartment::P1] = infectious_rate_ * y.I2() - pending_rate_ * y.P1();
  dy[Compartment::P2] = pending_rate_ * (y.P1() - y.P2());
  dy[Compartment::R] = pending_exit * (1.0 - ifr_);
  dy[Compartment::D] = pending_exit * ifr_;
  return dy;
}

}  // namespace seiprd
