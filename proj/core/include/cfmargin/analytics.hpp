#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfmargin/margin.hpp"

namespace cfmargin {

/// Disjoint two-way partition of a dataset by a scalar predicate.
struct OddSplit {
  std::string predicate = "mean_initial_speed";
  double threshold = 0.0;
  std::vector<std::string> high;  // episode ids strictly above the threshold
  std::vector<std::string> low;   // the rest (boundary equality goes low)
};

/// Partitions by the mean over agents of their speed at step 0.
OddSplit split_by_speed(const OddDataset& ds, double threshold);

/// One intensity of the cross-episode mean curve.
struct AggregateCurvePoint {
  double intensity = 0.0;
  double mean_p = 0.0;   // weighted mean of p_hat across episodes
  double ci_half = 0.0;  // normal-approximation 95% half-width (0 for n = 1)
  int episodes = 0;
  // Severity curves: weighted mean of the per-episode mean collision severity,
  // over the episodes that had at least one colliding rep at this intensity.
  SeverityProfile mean_severity;
  int severity_episodes = 0;
};

struct MarginHistogramBucket {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  bool censored_bucket = false;  // the "> gamma_max" sentinel bucket
};

/// aggregate() output: mean curve on the shared base grid, margin histogram
/// with an explicit censored bucket, and the severity summary over
/// non-censored episodes.
struct AggregateReport {
  CounterfactualKind kind = CounterfactualKind::Aggressiveness;
  int episodes = 0;
  int censored = 0;
  double mean_margin = 0.0;  // over non-censored episodes (0 when none)
  SeverityProfile severity_summary;  // mean severity-at-margin, non-censored
  std::vector<AggregateCurvePoint> curve;
  std::vector<MarginHistogramBucket> histogram;
};

/// Cross-episode aggregation. All results must share the kind and the base
/// intensity grid (bisection extras are per-episode and excluded). Weights,
/// when given, must match results in length, be nonnegative and not all zero;
/// uniform weights reproduce the unweighted means exactly.
AggregateReport aggregate(const std::vector<MarginResult>& results,
                          const std::vector<double>* weights = nullptr);

/// One agent's row in the ranking report.
struct AgentRanking {
  std::string agent;
  int episodes = 0;
  int censored = 0;
  bool all_censored = false;  // insensitive over the tested range
  double mean_margin = 0.0;   // over non-censored episodes
  SeverityProfile severity_summary;
};

/// Orders agents by mean non-censored margin, descending (safer first).
/// All-censored agents rank safest and are flagged. Ties keep input order.
std::vector<AgentRanking> rank_agents(
    const std::vector<std::pair<std::string, std::vector<MarginResult>>>& per_agent);

/// Spearman rank correlation (average ranks on ties). Returns 0 when either
/// side has zero rank variance.
double spearman_rank_correlation(const std::vector<double>& xs,
                                 const std::vector<double>& ys);

/// One-sided bootstrap test of mean(a) > mean(b): resamples both sides
/// `iterations` times (counter-based, deterministic in `seed`) and returns
/// the fraction of resampled differences <= 0, add-one smoothed. Small values
/// are evidence for the hypothesis.
double bootstrap_p_mean_greater(const std::vector<double>& a, const std::vector<double>& b,
                                int iterations, std::uint64_t seed);

}  // namespace cfmargin
