#include "seiprd/integrator.hpp"

#include <cmath>
#include <string>

namespace seiprd {

void IntegratorConfig::validate() const
{
  if (substeps_per_day < 1) {
    throw DomainError("substeps_per_day must be at least 1");
  }
  if (horizon_days < 1) {
    throw DomainError("horizon_days must be positive");
  }
}

DailyTrajectory integrate_daily(const TransmissionParams& params, const IntegratorConfig& cfg)
{
  cfg.validate();
  CompartmentState y = initial_state(params);

  const double limit = 10.0 * static_cast<double>(params.population);
  const double h = 1.0 / cfg.substeps_per_day;
  const TransmissionRhs f(params);

  DailyTrajectory trajectory;
  trajectory.states.reserve(static_cast<std::size_t>(cfg.horizon_days) + 1);
  trajectory.states.push_back(y);

  for (int day = 0; day < cfg.horizon_days; ++day) {
    for (int k = 0; k < cfg.substeps_per_day; ++k) {
      // grid points are computed from the integer day to avoid drift in t
      const double t = day + static_cast<double>(k) / cfg.substeps_per_day;
      try {
        y = heun_step(f, t, y, h);
      } catch (const NumericError&) {
        throw IntegrationDiverged(day + 1, "non-finite state during day " + std::to_string(day + 1));
      }
    }
    for (double v : y.values) {
      if (std::abs(v) > limit) {
        throw IntegrationDiverged(day + 1, "integration diverged on day " + std::to_string(day + 1));
      }
    }
    trajectory.states.push_back(y);
  }
  return trajectory;
}

}  // namespace seiprd
