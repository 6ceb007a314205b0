#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfmargin/geometry.hpp"

namespace cfmargin {

// ---------------------------------------------------------------------------
// Map

enum class SignalKind { StopSign, TrafficLight };
enum class LightState { Red, Green };

struct SignalPhase {
  LightState state = LightState::Red;
  double duration = 0.0;  // s
};

struct Signal {
  std::string id;
  SignalKind kind = SignalKind::StopSign;
  std::string lanelet;      // lanelet carrying the stop line
  double stop_arclength = 0.0;  // position of the stop line along the lanelet
  std::vector<SignalPhase> phases;  // periodic schedule; empty for stop signs

  double cycle_length() const;
  /// Phase at absolute simulation time (stop signs are permanently "Red").
  LightState state_at(double time) const;
};

struct Lanelet {
  std::string id;
  std::vector<Vec2> centerline;  // >= 2 points
  double width = 0.0;            // > 0
  std::vector<std::string> successors;

  double arclength() const;
};

struct LaneNetwork {
  std::vector<Lanelet> lanelets;
  std::vector<Signal> signals;

  const Lanelet* find_lanelet(const std::string& id) const;
  const Signal* find_signal(const std::string& id) const;
  int signal_index(const std::string& id) const;
  /// Connected centerline for a lanelet-id chain (duplicate joints removed).
  Polyline route_polyline(const std::vector<std::string>& route) const;
  /// Arclength of a lanelet's start within a route chain, if present.
  std::optional<double> route_offset(const std::vector<std::string>& route,
                                     const std::string& lanelet_id) const;
};

// ---------------------------------------------------------------------------
// Agents

struct AgentState {
  Vec2 position;
  double heading = 0.0;  // rad
  double speed = 0.0;    // m/s, never negative
  double steer = 0.0;    // rad
  double length = 4.5;   // footprint, m
  double width = 1.8;

  Obb footprint() const { return {position, heading, length, width}; }
  Vec2 velocity() const { return heading_dir(heading) * speed; }
};

struct Command {
  double accel = 0.0;       // m/s^2
  double steer_rate = 0.0;  // rad/s
};

struct KinematicModel {
  double wheelbase = 2.5;  // > 0
  double a_min = -8.0;     // < 0
  double a_max = 3.0;      // > 0
  double omega_min = -0.5;
  double omega_max = 0.5;
  double delta_max = 0.55;
  double v_max = 50.0;
};

/// IDM car-following parameters (see agents module for the model itself).
struct IdmParams {
  double v0 = 15.0;      // desired speed m/s
  double headway = 1.5;  // time headway s
  double s0 = 2.0;       // minimum spacing m
  double a = 1.5;        // max accel m/s^2
  double b = 2.0;        // comfortable decel m/s^2
  double exponent = 4.0;
  double lambda = 0.0;   // aggressiveness in [0,1]
};

struct PolicySpec {
  std::string name = "IDMAgent";  // IDMAgent | IDMLatency2 | IDMShortsighted10 | Replay | BestResponse
  IdmParams idm;
};

// ---------------------------------------------------------------------------
// Episodes

struct AgentRecord {
  std::string id;
  PolicySpec policy;
  std::vector<std::string> route;  // lanelet chain
  KinematicModel kinematics;
  std::vector<AgentState> states;  // length horizon+1
};

/// A recorded multi-agent interaction: the unit of counterfactual analysis.
/// Carries enough context (map, routes, policies) to be re-simulated.
struct Episode {
  std::string id;
  int horizon = 0;   // steps; states run 0..horizon
  double dt = 0.1;   // s
  std::uint64_t seed = 0;
  LaneNetwork map;
  std::vector<AgentRecord> agents;
  // signal_states[k][j] = state of map.signals[j] at step k; horizon+1 rows.
  std::vector<std::vector<LightState>> signal_states;
  std::optional<std::string> truncation;  // reason, when halted early

  const AgentRecord* find_agent(const std::string& id) const;
  int agent_index(const std::string& id) const;
  double duration() const { return horizon * dt; }
};

struct OddDataset {
  std::vector<Episode> episodes;  // non-empty
  std::string label;
};

// ---------------------------------------------------------------------------
// Scenario inputs (parsed/written by scenario_io)

struct ScenarioAgent {
  std::string id;
  AgentState initial;
  std::vector<std::string> route;  // connected lanelet chain
  PolicySpec policy;
  KinematicModel kinematics;
};

struct ScenarioFile {
  std::string id = "scenario";
  LaneNetwork map;
  std::vector<ScenarioAgent> agents;
  double duration = 10.0;  // s, > 0
  double dt = 0.1;         // s, > 0
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Counterfactual descriptors

enum class CounterfactualKind {
  Aggressiveness,
  Distraction,
  IllegalPrecedence,
  ImpairedReflexes,
  Unseen,
};

inline constexpr CounterfactualKind kAllKinds[] = {
    CounterfactualKind::Aggressiveness, CounterfactualKind::Distraction,
    CounterfactualKind::IllegalPrecedence, CounterfactualKind::ImpairedReflexes,
    CounterfactualKind::Unseen,
};

/// Upper end of the kind's intensity range (lower end is always 0).
double intensity_max(CounterfactualKind kind);
const char* kind_name(CounterfactualKind kind);
std::optional<CounterfactualKind> kind_from_name(const std::string& name);
/// True when a realization consumes no randomness (all reps coincide).
bool kind_is_deterministic(CounterfactualKind kind);

struct ClampedIntensity {
  double value = 0.0;
  bool clipped = false;
};

/// Clips gamma to the kind's range. Negative gamma is rejected.
ClampedIntensity clamp_intensity(CounterfactualKind kind, double gamma);

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string field;
  std::string agent;  // empty when not agent-specific
  int step = -1;      // -1 when not step-specific
  std::string message;
};

/// Empty result iff all Episode invariants hold. Violations are data, not errors.
std::vector<Violation> validate_episode(const Episode& e);

}  // namespace cfmargin
