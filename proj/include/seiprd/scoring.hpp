#pragma once

#include "seiprd/forecast.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace seiprd {

/// Scores for count forecasts. All are negatively oriented; every rule except
/// the normalised squared error score is proper.
enum class ScoringRule { logs, qs, sphs, rps, dss, ses, nses };

inline constexpr std::size_t num_rules = 7;
inline constexpr std::array<ScoringRule, num_rules> all_rules = {
    ScoringRule::logs, ScoringRule::qs,  ScoringRule::sphs, ScoringRule::rps,
    ScoringRule::dss,  ScoringRule::ses, ScoringRule::nses};

/// Lower-case name of the single-forecast score, e.g. "rps".
std::string_view rule_name(ScoringRule rule);
/// Name of the mean score over several forecasts, e.g. "RPS".
std::string_view mean_rule_name(ScoringRule rule);
bool is_proper(ScoringRule rule);

/// logs returns +inf when the observed count has zero probability.
double score(ScoringRule rule, const PredictiveDistribution& p, std::int64_t x);

using RuleScores = std::array<double, num_rules>;

RuleScores score_all(const PredictiveDistribution& p, std::int64_t x);

enum class NsesVerdict { over_confident, over_cautious, calibrated };

std::string_view verdict_name(NsesVerdict verdict);

struct ScoreReport {
  std::vector<RuleScores> per_day;
  RuleScores mean{};
  NsesVerdict nses_verdict = NsesVerdict::calibrated;
  std::size_t infinite_logs = 0;     // days whose observed count had zero mass
  std::int64_t max_truncation = 0;   // largest K_max among the scored days
  bool truncation_capped = false;
  double max_tail_mass = 0.0;

  double mean_of(ScoringRule rule) const { return mean[static_cast<std::size_t>(rule)]; }
};

ScoreReport mean_scores(std::span<const RuleScores> per_day);

/// Scores one forecast per day against the matching observation.
ScoreReport score_forecast(std::span<const PredictiveDistribution> forecasts,
                           std::span<const std::int64_t> observed);

}  // namespace seiprd
