#include "seiprd/scoring.hpp"

#include "seiprd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace seiprd {

namespace {

double standard_deviation(const PredictiveDistribution& p, ScoringRule rule)
{
  const double sd = std::sqrt(p.variance());
  if (!(sd > 0.0)) {
    throw DegenerateDistributionError(std::string(rule_name(rule)) +
                                      " is undefined for a zero-variance forecast");
  }
  return sd;
}

double ranked_probability(const PredictiveDistribution& p, std::int64_t x)
{
  const std::int64_t kmax = p.truncation();
  const auto table = p.pmf_table();
  double cumulative = 0.0;
  double sum = 0.0;
  for (std::int64_t k = 0; k <= kmax; ++k) {
    cumulative += table[static_cast<std::size_t>(k)];
    const double step = x <= k ? 1.0 : 0.0;
    sum += (cumulative - step) * (cumulative - step);
  }
  // observation beyond K_max: every remaining term has indicator 0
  for (std::int64_t k = kmax + 1; k < x; ++k) {
    cumulative += p.pmf(k);
    sum += cumulative * cumulative;
  }
  return sum;
}

}  // namespace

std::string_view rule_name(ScoringRule rule)
{
  switch (rule) {
    case ScoringRule::logs: return "logs";
    case ScoringRule::qs: return "qs";
    case ScoringRule::sphs: return "sphs";
    case ScoringRule::rps: return "rps";
    case ScoringRule::dss: return "dss";
    case ScoringRule::ses: return "ses";
    case ScoringRule::nses: return "nses";
  }
  return "unknown";
}

std::string_view mean_rule_name(ScoringRule rule)
{
  switch (rule) {
    case ScoringRule::logs: return "LogS";
    case ScoringRule::qs: return "QS";
    case ScoringRule::sphs: return "SphS";
    case ScoringRule::rps: return "RPS";
    case ScoringRule::dss: return "DSS";
    case ScoringRule::ses: return "SES";
    case ScoringRule::nses: return "NSES";
  }
  return "unknown";
}

bool is_proper(ScoringRule rule) { return rule != ScoringRule::nses; }

std::string_view verdict_name(NsesVerdict verdict)
{
  switch (verdict) {
    case NsesVerdict::over_confident: return "over-confident";
    case NsesVerdict::over_cautious: return "over-cautious";
    case NsesVerdict::calibrated: return "calibrated";
  }
  return "unknown";
}

double score(ScoringRule rule, const PredictiveDistribution& p, std::int64_t x)
{
  if (x < 0) {
    throw DomainError("observed count must be non-negative");
  }
  switch (rule) {
    case ScoringRule::logs: {
      const double px = p.pmf(x);
      return px > 0.0 ? -std::log(px) : std::numeric_limits<double>::infinity();
    }
    case ScoringRule::qs:
      return -2.0 * p.pmf(x) + p.squared_norm();
    case ScoringRule::sphs:
      return -p.pmf(x) / std::sqrt(p.squared_norm());
    case ScoringRule::rps:
      return ranked_probability(p, x);
    case ScoringRule::dss: {
      const double sd = standard_deviation(p, rule);
      const double z = (static_cast<double>(x) - p.mean()) / sd;
      return z * z + 2.0 * std::log(sd);
    }
    case ScoringRule::ses: {
      const double e = static_cast<double>(x) - p.mean();
      return e * e;
    }
    case ScoringRule::nses: {
      const double sd = standard_deviation(p, rule);
      const double z = (static_cast<double>(x) - p.mean()) / sd;
      return z * z;
    }
  }
  throw DomainError("unknown scoring rule");
}

RuleScores score_all(const PredictiveDistribution& p, std::int64_t x)
{
  RuleScores out{};
  for (std::size_t r = 0; r < num_rules; ++r) {
    out[r] = score(all_rules[r], p, x);
  }
  return out;
}

ScoreReport mean_scores(std::span<const RuleScores> per_day)
{
  if (per_day.empty()) {
    throw DomainError("mean scores need at least one day");
  }
  ScoreReport report;
  report.per_day.assign(per_day.begin(), per_day.end());
  report.mean.fill(0.0);
  for (const auto& day : per_day) {
    for (std::size_t r = 0; r < num_rules; ++r) {
      report.mean[r] += day[r];
    }
    if (std::isinf(day[static_cast<std::size_t>(ScoringRule::logs)])) {
      ++report.infinite_logs;
    }
  }
  for (auto& m : report.mean) {
    m /= static_cast<double>(per_day.size());
  }
  const double nses = report.mean_of(ScoringRule::nses);
  report.nses_verdict = nses > 1.0   ? NsesVerdict::over_confident
                        : nses < 1.0 ? NsesVerdict::over_cautious
                                     : NsesVerdict::calibrated;
  return report;
}

ScoreReport score_forecast(std::span<const PredictiveDistribution> forecasts,
                           std::span<const std::int64_t> observed)
{
  if (forecasts.size() != observed.size()) {
    throw AlignmentError("need exactly one observation per forecast day");
  }
  std::vector<RuleScores> per_day;
  per_day.reserve(forecasts.size());
  for (std::size_t d = 0; d < forecasts.size(); ++d) {
    per_day.push_back(score_all(forecasts[d], observed[d]));
  }
  auto report = mean_scores(per_day);
  for (const auto& f : forecasts) {
    report.max_truncation = std::max(report.max_truncation, f.truncation());
    report.truncation_capped = report.truncation_capped || f.truncation_capped();
    report.max_tail_mass = std::max(report.max_tail_mass, f.tail_mass());
  }
  return report;
}

}  // namespace seiprd
