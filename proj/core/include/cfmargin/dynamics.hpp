#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfmargin/scenario.hpp"

namespace cfmargin {

// ---------------------------------------------------------------------------
// Observations and the simulator/policy interface

struct NearbyAgent {
  int index = -1;  // position in the episode/world agent order
  AgentState state;
};

struct SignalSighting {
  int signal_index = -1;
  SignalKind kind = SignalKind::StopSign;
  LightState state = LightState::Red;
  double distance = 0.0;  // along the observer's route to the stop line, >= 0
};

struct Observation {
  int self_index = -1;
  AgentState self;
  double time = 0.0;
  std::vector<NearbyAgent> nearby;     // excludes self
  std::vector<SignalSighting> signals; // ahead on the observer's route
};

/// An agent's decision maker: observations in, commands out.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Command step(const Observation& obs) = 0;
};

/// Rewrites what a policy sees.
class ObservationFilter {
 public:
  virtual ~ObservationFilter() = default;
  virtual Observation apply(const Observation& obs) = 0;
};

/// Rewrites what a policy commands.
class CommandFilter {
 public:
  virtual ~CommandFilter() = default;
  virtual Command apply(const Command& cmd, const Observation& obs) = 0;
};

/// Base policy wrapped by observation/command filters. With no filters (or
/// filters at identity settings) the output equals the base policy's exactly.
class FilteredPolicy : public Policy {
 public:
  FilteredPolicy(std::unique_ptr<Policy> base,
                 std::vector<std::unique_ptr<ObservationFilter>> obs_filters,
                 std::vector<std::unique_ptr<CommandFilter>> cmd_filters)
      : base_(std::move(base)),
        obs_filters_(std::move(obs_filters)),
        cmd_filters_(std::move(cmd_filters)) {}

  Command step(const Observation& obs) override {
    if (obs_filters_.empty() && cmd_filters_.empty()) return base_->step(obs);
    Observation o = obs;
    for (auto& f : obs_filters_) o = f->apply(o);
    Command c = base_->step(o);
    for (auto& f : cmd_filters_) c = f->apply(c, o);
    return c;
  }

 private:
  std::unique_ptr<Policy> base_;
  std::vector<std::unique_ptr<ObservationFilter>> obs_filters_;
  std::vector<std::unique_ptr<CommandFilter>> cmd_filters_;
};

// ---------------------------------------------------------------------------
// Vehicle dynamics

/// One step of the kinematic bicycle model (RK4). Commands outside the model
/// bounds are clamped first (reported via `command_clamped`); the returned
/// state respects speed >= 0, v <= v_max and |steer| <= delta_max exactly.
AgentState step_dynamics(const AgentState& s, const Command& u, double dt,
                         const KinematicModel& m, bool* command_clamped = nullptr);

// ---------------------------------------------------------------------------
// Collision checking

enum class ImpactClass { Front, Side, Rear };

const char* impact_class_name(ImpactClass c);

struct ContactEvent {
  int step = 0;
  int agent_a = -1;  // indices into the episode agent order, a < b
  int agent_b = -1;
  double delta_v = 0.0;       // |v_a - v_b| at first contact
  double impact_angle = 0.0;  // |heading_a - heading_b| normalized to [0, pi]
  ImpactClass class_a = ImpactClass::Front;
  ImpactClass class_b = ImpactClass::Front;
};

/// First contact per agent pair over the whole trajectory (separating-axis
/// test on the oriented footprints); later contacts of the same pair merge.
std::vector<ContactEvent> check_contacts(const Episode& e);

bool agent_collided(const std::vector<ContactEvent>& events, int agent_index);

/// coll(e, i): true iff agent i appears in any contact event of e.
bool coll(const Episode& e, int agent_index);

// ---------------------------------------------------------------------------
// Closed-loop simulation

struct SimAgent {
  std::string id;
  AgentState initial;
  std::vector<std::string> route;
  KinematicModel kinematics;
  PolicySpec recorded_policy;  // stored in the episode for later re-simulation
  std::unique_ptr<Policy> policy;
};

struct SimConfig {
  double visibility_radius = 100.0;
  bool allow_early_halt = true;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, Episode partial, int step, std::string agent)
      : std::runtime_error(what), partial_episode(std::move(partial)), step(step),
        agent(std::move(agent)) {}
  Episode partial_episode;
  int step;
  std::string agent;
};

/// World snapshot handed to observation building.
struct WorldState {
  const std::vector<std::string>* agent_ids = nullptr;
  const std::vector<AgentState>* states = nullptr;
  const std::vector<LightState>* signal_states = nullptr;
  double time = 0.0;
};

/// Precomputed per-agent route context (projection + signal stop lines).
struct RouteContext {
  Polyline path;
  struct SignalStop {
    int signal_index;
    SignalKind kind;
    double stop_s;  // arclength of the stop line along the route
  };
  std::vector<SignalStop> signal_stops;
};

RouteContext build_route_context(const LaneNetwork& map, const std::vector<std::string>& route);

/// Exactly the agents whose footprint centers lie within `radius`, plus the
/// signals ahead on the observer's route within `radius`.
Observation make_observation(const WorldState& world, int agent_index,
                             const RouteContext& route, double radius);

/// Closed-loop stepping of all agents: observations -> policies -> commands ->
/// dynamics. Deterministic for fixed inputs. Halts early only when every agent
/// is in contact or off the map (recorded as Episode::truncation).
Episode run_closed_loop(const LaneNetwork& map, std::vector<SimAgent> agents,
                        double dt, int horizon, const std::string& episode_id,
                        std::uint64_t seed, const SimConfig& cfg = {});

/// Scenario-file frontend: builds each agent's policy from its PolicySpec via
/// the registry in agents.hpp, then runs the closed loop for `horizon` steps.
Episode simulate(const ScenarioFile& scenario, std::uint64_t seed, int horizon,
                 const SimConfig& cfg = {});

}  // namespace cfmargin
