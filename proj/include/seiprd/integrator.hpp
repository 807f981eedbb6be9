#pragma once

#include "seiprd/errors.hpp"
#include "seiprd/model.hpp"

#include <cstddef>
#include <vector>

namespace seiprd {

struct IntegratorConfig {
  int substeps_per_day = 4;
  int horizon_days = 0;

  void validate() const;
};

/// One state per model day, day 0 through the horizon inclusive.
struct DailyTrajectory {
  std::vector<CompartmentState> states;

  int horizon() const { return static_cast<int>(states.size()) - 1; }
  const CompartmentState& operator[](int day) const { return states[static_cast<std::size_t>(day)]; }
};

/**
 * @brief One explicit trapezoidal (Heun) step.
 *
 * Works for any state type that supports `y + h * f` arithmetic and an
 * `is_finite` overload, so the scalar case can be tested on its own.
 */
template <class F, class State>
State heun_step(F&& f, double t, const State& y, double h)
{
  if (!(h > 0.0)) {
    throw DomainError("heun_step needs a positive step size");
  }
  const State k1 = f(t, y);
  const State predictor = y + h * k1;
  const State k2 = f(t + h, predictor);
  State next = y + (0.5 * h) * (k1 + k2);
  if (!is_finite(k1) || !is_finite(k2) || !is_finite(next)) {
    throw NumericError("non-finite value in trapezoidal step");
  }
  return next;
}

/// Integrates from initial_state(params) and records the state at each whole day.
/// Throws IntegrationDiverged when a compartment leaves [-10N, 10N].
DailyTrajectory integrate_daily(const TransmissionParams& params, const IntegratorConfig& cfg);

}  // namespace seiprd
