#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace seiprd {

using Rng = std::mt19937_64;

/// Independent generator for one chain, derived from (seed, chain index).
Rng chain_rng(std::uint64_t seed, std::size_t chain);

/// Log target density on the unconstrained space. Must be callable concurrently.
using LogDensity = std::function<double(std::span<const double>)>;

enum class InitKind {
  unconstrained,  // uniform on (lower, upper) directly
  positive,       // uniform on a positive interval, then log
  unit_interval,  // uniform on a sub-interval of (0, 1), then logit
};

struct InitInterval {
  InitKind kind = InitKind::unconstrained;
  double lower = -2.0;
  double upper = 2.0;
};

enum class ProposalMetric { diagonal, dense };

struct ChainConfig {
  std::size_t n_chains = 6;
  std::size_t n_samples = 512;  // iterations per chain, warmup included
  std::size_t n_warmup = 256;
  std::size_t thin = 1;  // keep every thin-th post-warmup iteration
  std::uint64_t seed = 1;
  double target_acceptance = 0.234;
  // One entry per coordinate; an empty table draws every coordinate on (-2, 2).
  std::vector<InitInterval> init_intervals;
  ProposalMetric metric = ProposalMetric::diagonal;
  std::size_t max_threads = 0;  // 0 picks the hardware concurrency
  std::size_t init_retries = 100;

  void validate() const;
  std::size_t n_retained() const { return (n_samples - n_warmup) / thin; }
};

std::vector<double> init_point(const ChainConfig& cfg, std::size_t dim, Rng& rng);

struct AdaptationEvent {
  std::size_t iteration = 0;
  double log_scale = 0.0;
  bool metric_updated = false;
};

struct ChainStats {
  std::vector<double> initial_point;
  double warmup_acceptance = 0.0;
  double acceptance = 0.0;  // post-warmup
  double log_scale = 0.0;   // frozen global proposal scale
  std::vector<double> proposal_sd;  // per-coordinate proposal sd after warmup
  std::vector<AdaptationEvent> adaptation_trace;
  std::vector<std::string> warnings;
};

struct ParameterDiagnostics {
  double rhat = 1.0;
  double ess = 0.0;
  bool degenerate = false;
};

/// Retained post-warmup draws, stored chain-major then draw then coordinate.
struct PosteriorDraws {
  std::size_t n_chains = 0;
  std::size_t n_draws = 0;  // per chain
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<double> log_density;
  std::vector<ChainStats> chains;
  std::vector<ParameterDiagnostics> diagnostics;  // empty when fewer than 2 chains

  std::size_t total() const { return n_chains * n_draws; }
  double at(std::size_t chain, std::size_t draw, std::size_t k) const
  {
    return values[(chain * n_draws + draw) * dim + k];
  }
  std::span<const double> draw(std::size_t chain, std::size_t i) const
  {
    return {values.data() + (chain * n_draws + i) * dim, dim};
  }
  /// Coordinate k for every draw, chain-major.
  std::vector<double> parameter(std::size_t k) const;
  std::vector<std::string> warnings() const;
};

/**
 * @brief Adaptive random-walk Metropolis over independent chains.
 *
 * During warmup the global proposal scale follows a Robbins-Monro recursion
 * toward the target acceptance rate and the proposal metric is re-estimated at
 * the end of expanding windows. Everything is frozen once warmup ends.
 * Results are identical for any thread count.
 */
PosteriorDraws run_chains(const LogDensity& log_density, std::size_t dim, const ChainConfig& cfg);

struct RhatResult {
  double value = 1.0;
  bool degenerate = false;
};

/// Split-Rhat of one coordinate; `chain_major` holds n_chains equal-length chains.
RhatResult split_rhat(std::span<const double> chain_major, std::size_t n_chains);

/// Multi-chain effective sample size with Geyer's initial positive sequence.
double ess(std::span<const double> chain_major, std::size_t n_chains);

std::vector<double> split_rhat(const PosteriorDraws& draws);
std::vector<double> ess(const PosteriorDraws& draws);

}  // namespace seiprd
