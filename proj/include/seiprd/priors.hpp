#pragma once

#include "seiprd/integrator.hpp"
#include "seiprd/model.hpp"
#include "seiprd/observation.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace seiprd {

/// Fixed structure of a calibration problem: population and knot schedules.
struct ModelSpec {
  std::int64_t population = 0;
  std::vector<double> beta_knots;
  std::vector<double> rho_admissions_knots;
  std::vector<double> rho_calls_knots;

  void validate() const;
};

enum class Support { unit_interval, positive };

/**
 * @brief Position of every parameter inside a flat parameter vector.
 *
 * Layout: alpha1, alpha2, beta_1..beta_{J+1}, d_L, d_I, d_P, omega,
 * 1/phi_deaths, 1/phi_admissions, 1/phi_calls, rho_admissions knots,
 * rho_calls knots.
 */
class ParamLayout {
 public:
  ParamLayout() = default;
  ParamLayout(std::size_t n_beta, std::size_t n_rho_admissions, std::size_t n_rho_calls);
  explicit ParamLayout(const ModelSpec& spec);

  std::size_t size() const { return rho_calls_ + n_rho_calls_; }
  std::size_t n_beta() const { return n_beta_; }
  std::size_t n_rho_admissions() const { return n_rho_admissions_; }
  std::size_t n_rho_calls() const { return n_rho_calls_; }

  static constexpr std::size_t alpha1 = 0;
  static constexpr std::size_t alpha2 = 1;
  static constexpr std::size_t beta_begin = 2;
  std::size_t beta(std::size_t j) const { return beta_begin + j; }
  std::size_t latent_period() const { return beta_begin + n_beta_; }
  std::size_t infectious_period() const { return latent_period() + 1; }
  std::size_t pending_period() const { return latent_period() + 2; }
  std::size_t ifr() const { return latent_period() + 3; }
  std::size_t inv_phi_deaths() const { return latent_period() + 4; }
  std::size_t inv_phi_admissions() const { return latent_period() + 5; }
  std::size_t inv_phi_calls() const { return latent_period() + 6; }
  std::size_t rho_admissions(std::size_t k) const { return rho_admissions_ + k; }
  std::size_t rho_calls(std::size_t l) const { return rho_calls_ + l; }

  Support support(std::size_t index) const;
  std::string name(std::size_t index) const;
  std::vector<std::string> names() const;

  friend bool operator==(const ParamLayout&, const ParamLayout&) = default;

 private:
  std::size_t n_beta_ = 0;
  std::size_t n_rho_admissions_ = 0;
  std::size_t n_rho_calls_ = 0;
  std::size_t rho_admissions_ = 0;
  std::size_t rho_calls_ = 0;
};

/// Constrained parameter values in ParamLayout order.
struct ParamVector {
  ParamLayout layout;
  std::vector<double> values;

  ParamVector() = default;
  ParamVector(ParamLayout l, std::vector<double> v);

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::size_t size() const { return values.size(); }

  /// True when every component lies inside its support.
  bool in_support() const;
};

struct PriorConfig {
  double sigma_beta = 0.025;  // sd of the random walk on successive beta knots

  double alpha1_a = 5.0, alpha1_b = 0.5;
  double alpha2_a = 1.1, alpha2_b = 1.1;
  double beta1_scale = 0.5;  // half-normal
  double latent_mean = 4.0, latent_sd = 3.0;
  double infectious_mean = 5.0, infectious_sd = 4.0;
  double pending_mean = 13.0, pending_sd = 4.0;
  double ifr_a = 5.7, ifr_b = 624.1;
  double inv_phi_rate = 5.0;
  double rho_a = 1.1, rho_b = 1.1;

  void validate() const;
};

/// Sum of every component's log prior density, -inf outside the support.
double log_prior(const ParamVector& p, const PriorConfig& cfg);

struct Unconstrained {
  std::vector<double> values;
  double log_jacobian = 0.0;
};

struct Constrained {
  ParamVector params;
  double log_jacobian = 0.0;  // log |d constrained / d unconstrained|
};

/// log for positive components, logit for (0, 1) components.
Unconstrained to_unconstrained(const ParamVector& p);
Constrained to_constrained(std::span<const double> u, const ParamLayout& layout);

TransmissionParams to_transmission_params(const ParamVector& p, const ModelSpec& spec);
ObservationParams to_observation_params(const ParamVector& p, const ModelSpec& spec);

/**
 * @brief Log posterior on the unconstrained space.
 *
 * Integrates the transmission model up to the last observed day, so the data
 * passed in should already be restricted to the calibration window. Safe to
 * call from several threads at once.
 */
class Posterior {
 public:
  struct Terms {
    double prior = 0.0;
    double likelihood = 0.0;
    double log_jacobian = 0.0;
    double total = 0.0;
  };

  Posterior(ModelSpec spec, SurveillanceData data, PriorConfig prior, int substeps_per_day = 4);

  Terms terms(std::span<const double> u) const;
  double operator()(std::span<const double> u) const { return terms(u).total; }

  std::size_t dimension() const { return layout_.size(); }
  const ParamLayout& layout() const { return layout_; }
  const ModelSpec& spec() const { return spec_; }
  const SurveillanceData& data() const { return data_; }
  const PriorConfig& prior() const { return prior_; }
  int horizon() const { return horizon_; }

  /// Number of evaluations rejected because the trajectory diverged.
  std::size_t divergences() const { return divergences_->load(); }

 private:
  ModelSpec spec_;
  ParamLayout layout_;
  SurveillanceData data_;
  PriorConfig prior_;
  int substeps_;
  int horizon_;
  std::shared_ptr<std::atomic<std::size_t>> divergences_;
};

}  // namespace seiprd
