#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's numerical code.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

struct SeiprdInputs {
  double n = 0.0;
  double alpha1 = 0.0, alpha2 = 0.0;
  std::vector<double> beta_times, beta_values;
  double d_l = 0.0, d_i = 0.0, d_p = 0.0, omega = 0.0;
};

using State = std::array<double, 9>;

inline double interp(const std::vector<double>& ts, const std::vector<double>& vs, double t)
{
  if (t <= ts.front()) return vs.front();
  if (t >= ts.back()) return vs.back();
  for (std::size_t j = 1; j < ts.size(); ++j) {
    if (t < ts[j]) {
      const double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
      return (1.0 - w) * vs[j - 1] + w * vs[j];
    }
  }
  return vs.back();
}

inline State initial(const SeiprdInputs& p)
{
  const double m = p.n - 5.0;
  const double e = 0.5 * m * (1.0 - p.alpha1) * p.alpha2 + 1.0;
  const double i = 0.5 * m * (1.0 - p.alpha1) * (1.0 - p.alpha2) + 1.0;
  return {m * p.alpha1 + 1.0, e, e, i, i, 0.0, 0.0, 0.0, 0.0};
}

// S, E1, E2, I1, I2, P1, P2, R, D written out flow by flow.
inline State derivative(const SeiprdInputs& p, double t, const State& y)
{
  const double b = interp(p.beta_times, p.beta_values, t);
  const double infection = b * (y[3] + y[4]) * y[0] / p.n;
  const double e1_out = 2.0 / p.d_l * y[1];
  const double e2_out = 2.0 / p.d_l * y[2];
  const double i1_out = 2.0 / p.d_i * y[3];
  const double i2_out = 2.0 / p.d_i * y[4];
  const double p1_out = 2.0 / p.d_p * y[5];
  const double p2_out = 2.0 / p.d_p * y[6];
  return {-infection,     infection - e1_out, e1_out - e2_out,
          e2_out - i1_out, i1_out - i2_out,   i2_out - p1_out,
          p1_out - p2_out, (1.0 - p.omega) * p2_out, p.omega * p2_out};
}

/// Classical fourth-order Runge-Kutta, states at every whole day.
inline std::vector<State> rk4_daily(const SeiprdInputs& p, int substeps, int days)
{
  std::vector<State> out{initial(p)};
  State y = out.front();
  const double h = 1.0 / substeps;
  auto axpy = [](const State& a, double s, const State& b) {
    State r;
    for (std::size_t i = 0; i < 9; ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  for (int d = 0; d < days; ++d) {
    for (int k = 0; k < substeps; ++k) {
      const double t = d + static_cast<double>(k) / substeps;
      const State k1 = derivative(p, t, y);
      const State k2 = derivative(p, t + h / 2, axpy(y, h / 2, k1));
      const State k3 = derivative(p, t + h / 2, axpy(y, h / 2, k2));
      const State k4 = derivative(p, t + h, axpy(y, h, k3));
      for (std::size_t i = 0; i < 9; ++i) {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
    }
    out.push_back(y);
  }
  return out;
}

/// Negative binomial pmf by the product recurrence p_n = p_{n-1} (n - 1 + phi) / n * mu / (mu + phi).
inline std::vector<double> nb_pmf_table(double mu, double phi, std::size_t n_max)
{
  std::vector<double> p(n_max + 1);
  const double q = mu / (mu + phi);
  p[0] = std::pow(phi / (mu + phi), phi);
  for (std::size_t n = 1; n <= n_max; ++n) {
    p[n] = p[n - 1] * (static_cast<double>(n) - 1.0 + phi) / static_cast<double>(n) * q;
  }
  return p;
}

struct Scores {
  double logs, qs, sphs, rps, dss, ses, nses;
};

/// Table formulas evaluated term by term on a finite-support pmf.
inline Scores brute_force_scores(const std::vector<double>& p, std::size_t x)
{
  double norm2 = 0.0, mean = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    norm2 += p[k] * p[k];
    mean += static_cast<double>(k) * p[k];
  }
  double var = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    var += (static_cast<double>(k) - mean) * (static_cast<double>(k) - mean) * p[k];
  }
  const double px = x < p.size() ? p[x] : 0.0;
  double rps = 0.0, cdf = 0.0;
  const std::size_t last = std::max(p.size() - 1, x);
  for (std::size_t k = 0; k <= last; ++k) {
    cdf += k < p.size() ? p[k] : 0.0;
    const double step = x <= k ? 1.0 : 0.0;
    rps += (cdf - step) * (cdf - step);
  }
  const double err = static_cast<double>(x) - mean;
  return {-std::log(px),
          -2.0 * px + norm2,
          -px / std::sqrt(norm2),
          rps,
          err * err / var + std::log(var),
          err * err,
          err * err / var};
}

}  // namespace oracle
