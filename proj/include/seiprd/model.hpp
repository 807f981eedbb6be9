#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace seiprd {

/// Index of each disease state inside a CompartmentState.
enum class Compartment : std::size_t { S = 0, E1, E2, I1, I2, P1, P2, R, D };

inline constexpr std::size_t num_compartments = 9;

/**
 * @brief Populations of the nine disease states S, E1, E2, I1, I2, P1, P2, R, D.
 *
 * Doubles as the derivative type returned by rhs(), so it carries the vector
 * arithmetic needed by the time steppers.
 */
struct CompartmentState {
  std::array<double, num_compartments> values{};

  double& operator[](Compartment c) { return values[static_cast<std::size_t>(c)]; }
  double operator[](Compartment c) const { return values[static_cast<std::size_t>(c)]; }

  double S() const { return values[0]; }
  double E1() const { return values[1]; }
  double E2() const { return values[2]; }
  double I1() const { return values[3]; }
  double I2() const { return values[4]; }
  double P1() const { return values[5]; }
  double P2() const { return values[6]; }
  double R() const { return values[7]; }
  double D() const { return values[8]; }

  double total() const;
  bool all_finite() const;

  CompartmentState& operator+=(const CompartmentState& other)
  {
    for (std::size_t i = 0; i < num_compartments; ++i) {
      values[i] += other.values[i];
    }
    return *this;
  }

  CompartmentState& operator-=(const CompartmentState& other)
  {
    for (std::size_t i = 0; i < num_compartments; ++i) {
      values[i] -= other.values[i];
    }
    return *this;
  }

  CompartmentState& operator*=(double factor)
  {
    for (auto& v : values) {
      v *= factor;
    }
    return *this;
  }

  friend bool operator==(const CompartmentState&, const CompartmentState&) = default;
};

inline CompartmentState operator+(CompartmentState lhs, const CompartmentState& rhs)
{
  return lhs += rhs;
}

inline CompartmentState operator-(CompartmentState lhs, const CompartmentState& rhs)
{
  return lhs -= rhs;
}

inline CompartmentState operator*(double factor, CompartmentState state) { return state *= factor; }

inline CompartmentState operator*(CompartmentState state, double factor) { return state *= factor; }

inline bool is_finite(double value) { return std::isfinite(value); }

inline bool is_finite(const CompartmentState& state) { return state.all_finite(); }

/**
 * @brief Continuous piecewise-linear function of model time.
 *
 * Between knots the value is interpolated linearly; before the first knot and
 * from the last knot onwards it is held at the nearest knot value.
 */
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> knot_times, std::vector<double> knot_values);

  const std::vector<double>& knot_times() const { return times_; }
  const std::vector<double>& knot_values() const { return values_; }
  std::size_t size() const { return times_.size(); }

  double operator()(double t) const;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<double> slopes_;  // per segment
};

double eval_piecewise(const PiecewiseLinear& f, double t);

struct TransmissionParams {
  double alpha1 = 0.0;  // share of the non-seed population initially susceptible
  double alpha2 = 0.0;  // share of the initially infected not yet infectious
  PiecewiseLinear beta;  // effective contact rate per day
  double latent_period = 0.0;      // d_L, days
  double infectious_period = 0.0;  // d_I, days
  double pending_period = 0.0;     // d_P, days
  double ifr = 0.0;                // omega
  std::int64_t population = 0;

  /// Throws DomainError when any field is outside its support.
  void validate() const;
};

CompartmentState initial_state(const TransmissionParams& params);

/// Time derivative of every compartment at model day `t`.
CompartmentState rhs(double t, const CompartmentState& state, const TransmissionParams& params);

/// rhs() with the rate constants computed once, for repeated evaluation.
class TransmissionRhs {
 public:
  explicit TransmissionRhs(const TransmissionParams& params);

  CompartmentState operator()(double t, const CompartmentState& y) const;

 private:
  const PiecewiseLinear* beta_;
  double inv_population_;
  double latent_rate_;
  double infectious_rate_;
  double pending_rate_;
  double ifr_;
};

}  // namespace seiprd
