#pragma once

#include <string>
#include <vector>

#include "cfmargin/counterfactuals.hpp"
#include "cfmargin/severity.hpp"

namespace cfmargin {

/// Monte-Carlo collision-probability estimate at one intensity.
struct ProbabilityPoint {
  double intensity = 0.0;
  int reps = 0;        // realizations that ran to completion
  int collisions = 0;  // of those, how many ended with an ego contact
  int failures = 0;    // realizations aborted by simulation errors
  double p_hat = 0.0;  // collisions / reps (0 when reps == 0)
  double ci_low = 0.0;  // Wilson 95% interval
  double ci_high = 0.0;
  bool usable = true;        // false when failures exceed the failure budget
  bool on_base_grid = true;  // false for bisection midpoints
  SeverityProfile mean_collision_severity;  // mean over the colliding reps
};

struct WilsonInterval {
  double low = 0.0;
  double high = 0.0;
};

/// 95% (z = 1.96) score interval for `successes` out of `n`. n = 0 gives [0,1].
WilsonInterval wilson_interval(int successes, int n, double z = 1.96);

/// What the ego does while the others misbehave.
///  - Reactive: the ego runs a named closed-loop policy.
///  - NonReactive: the ego replays its recorded trajectory (lower bound).
///  - BestResponse: a rep counts as a collision only if the replayed ego
///    collides AND the best command program found still collides (upper bound).
enum class MarginMode { Reactive, NonReactive, BestResponse };

const char* margin_mode_name(MarginMode mode);

/// Outcome of the threshold search at one (episode, kind, mode).
struct MarginResult {
  std::string episode_id;
  CounterfactualKind kind = CounterfactualKind::Aggressiveness;
  MarginMode mode = MarginMode::NonReactive;
  bool censored = true;        // no tested intensity crossed epsilon
  double margin = 0.0;         // smallest tested intensity with p_hat > epsilon
  double grid_resolution = 0.0;  // width of the final search cell
  SeverityProfile severity_at_margin;  // mean over colliding reps at the margin
  std::vector<ProbabilityPoint> curve;  // every evaluated point, ascending
};

struct MarginSearchConfig {
  double epsilon = 0.05;       // in (0,1)
  int grid_points = 11;        // G equally spaced intensities over [0, gamma_max]
  int refine_rounds = 4;       // bisection depth inside the first crossing cell
  int reps = 50;               // per point, stochastic kinds (deterministic: 1)
  double failure_budget = 0.05;  // max tolerated failed-rep fraction per point
  int workers = 1;             // <= 0 picks hardware concurrency
};

/// Everything the searches share: the episode under analysis, the ego, the
/// ego's reactive policy (Reactive mode only), search knobs, severity model,
/// and the seed all randomness chains from. Results are identical for any
/// worker count.
struct MarginContext {
  const Episode* episode = nullptr;
  std::string ego_id;
  PolicySpec ego_policy;  // consulted by Reactive mode
  MarginSearchConfig search;
  SeverityModel severity;
  std::uint64_t seed = 0;
};

/// Collision probability of the ego at one intensity. Deterministic kinds
/// short-circuit to a single rep (the estimate is exactly 0 or 1). Rep seeds
/// depend on (episode, kind, intensity, rep) but never on the mode, so the
/// NonReactive and BestResponse modes see identical realizations.
ProbabilityPoint estimate_collision_prob(const MarginContext& ctx, CounterfactualKind kind,
                                         double gamma, MarginMode mode);

/// The threshold search: evaluates the full base grid ascending, then bisects
/// inside the first cell where p_hat crosses epsilon. The margin is the
/// smallest tested intensity whose estimate exceeds epsilon; censored when no
/// grid point crosses. Throws std::runtime_error when a point is unusable
/// (failure budget exceeded).
MarginResult safety_margin(const MarginContext& ctx, CounterfactualKind kind,
                           MarginMode mode);

/// safety_margin with the ego replaying its recording (mode NonReactive).
MarginResult lower_bound_margin(const MarginContext& ctx, CounterfactualKind kind);

/// safety_margin in BestResponse mode (mode BestResponse). Guaranteed, by
/// shared rep seeds and pointwise domination, to sit at or above the
/// non-reactive margin (censored counting as +infinity).
MarginResult upper_bound_margin(const MarginContext& ctx, CounterfactualKind kind);

/// Best rollout found for one realization, per the lexicographic objective.
struct BestResponseOutcome {
  std::vector<AgentState> trajectory;  // ego states, length horizon+1
  SeverityProfile severity;
  bool collided = true;
  int rollouts = 0;        // candidate rollouts evaluated
  int rollout_failures = 0;
};

/// Searches piecewise-constant ego command programs (3 segments, acceleration
/// in {-8,-4,0,2} m/s^2, steering rate in {-0.4,0,0.4} rad/s, 12^3 programs,
/// plus the program nearest the recorded trajectory as an extra candidate)
/// against the setup's wrapped opponents at rep `rep`. Cost is lexicographic:
/// (p_fatal, p_mais3plus, p_mais2plus, collided, mean squared position
/// deviation from the recording). Intended for realizations whose replayed
/// ego collides; with `exhaustive` false the scan stops at the first
/// non-colliding candidate (severity is zero for every such candidate; they
/// differ only in the final tie-break). Throws when every rollout fails.
BestResponseOutcome best_response(const CounterfactualSetup& setup, int rep,
                                  const SeverityModel& severity, bool exhaustive = true);

}  // namespace cfmargin
