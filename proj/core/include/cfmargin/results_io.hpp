#pragma once

#include <string>
#include <vector>

#include "cfmargin/analytics.hpp"
#include "cfmargin/scenario_io.hpp"

namespace cfmargin {

/// Csv: comma-separated with a fixed header row, parseable back.
/// Structured: one "record key=value ..." line per row, for humans and grep.
enum class OutputFormat { Csv, Structured };

/// Probability table: one row per evaluated curve point.
/// Columns: episode_id,kind,intensity,reps,collisions,p_hat,ci_low,ci_high,failures
std::string write_probability_table(const std::vector<MarginResult>& results, OutputFormat fmt);

/// Margin table: one row per (episode, kind, mode) search. A censored margin
/// is written as the sentinel ">gamma_max" with the censored flag set.
/// Columns: episode_id,kind,mode,margin,censored,grid_resolution,
///          p_fatal_at_margin,p_mais3_at_margin,p_mais2_at_margin
std::string write_margin_table(const std::vector<MarginResult>& results, OutputFormat fmt);

struct ProbabilityRow {
  std::string episode_id;
  CounterfactualKind kind = CounterfactualKind::Aggressiveness;
  ProbabilityPoint point;
};

struct MarginRow {
  std::string episode_id;
  CounterfactualKind kind = CounterfactualKind::Aggressiveness;
  MarginMode mode = MarginMode::NonReactive;
  bool censored = true;
  double margin = 0.0;
  double grid_resolution = 0.0;
  SeverityProfile severity_at_margin;
};

/// Parsers accept the Csv form only.
std::vector<ProbabilityRow> parse_probability_table(const std::string& text);
std::vector<MarginRow> parse_margin_table(const std::string& text);

/// Rebuilds MarginResult records from the two tables (one margin row plus its
/// curve points). `grid_points` identifies the base grid so bisection extras
/// regain their off-grid flag; a mismatched count is a semantic error.
std::vector<MarginResult> stitch_results(const std::vector<ProbabilityRow>& points,
                                         const std::vector<MarginRow>& margins, int grid_points);

// Aggregate report tables.
std::string write_aggregate_curve(const AggregateReport& rep, OutputFormat fmt);
std::string write_aggregate_histogram(const AggregateReport& rep, OutputFormat fmt);
std::string write_aggregate_summary(const AggregateReport& rep, OutputFormat fmt);
std::string write_rankings(const std::vector<AgentRanking>& rankings, OutputFormat fmt);

}  // namespace cfmargin
