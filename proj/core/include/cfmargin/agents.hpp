#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>

#include "cfmargin/dynamics.hpp"

namespace cfmargin {

/// Deceleration floor shared by every driver model (emergency braking).
inline constexpr double kHardBrake = -8.0;

/// Car-following acceleration: relaxation toward the desired speed plus an
/// interaction brake against a leader at bumper-to-bumper gap `gap`, closing
/// at `closing_speed` (own speed minus leader speed along the path).
/// gap <= 0 means the leader is already overlapped: emergency branch, returns
/// kHardBrake. The result never falls below kHardBrake.
double idm_accel(const IdmParams& p, double speed, double gap, double closing_speed);

/// Free-road branch: no leader in range.
double idm_free_accel(const IdmParams& p, double speed);

/// Moves the parameter set toward a tailgating, hard-charging preset
/// (headway 0.5 s, spacing 0.5 m, accel 3, decel 4, desired speed +30%).
/// lambda = 0 returns `base` bit-for-bit; lambda = 1 is the full preset.
IdmParams apply_aggressiveness(const IdmParams& base, double lambda);

/// Latency expressed in whole steps (rounded to nearest).
int latency_steps(double seconds, double dt);

/// Everything a reactive policy needs to know about the agent it drives.
struct PolicyBuildContext {
  const LaneNetwork* map = nullptr;
  std::vector<std::string> route;
  KinematicModel kinematics;
  double dt = 0.1;
  double self_length = 4.5;
  double self_width = 1.8;
  int self_index = 0;
};

/// Route-following driver. Longitudinally: IDM against the nearest leader in
/// the own lane, with virtual stationary leaders for red lights, stop signs
/// and crossing traffic that has precedence. Laterally: pure pursuit along
/// the route centerline with a deadbeat steering-rate command.
class IdmRouteFollower : public Policy {
 public:
  IdmRouteFollower(const IdmParams& params, const PolicyBuildContext& ctx);

  Command step(const Observation& obs) override;

  const IdmParams& params() const { return params_; }

 private:
  struct StopSignProgress {
    double hold_started = -1.0;  // time the full stop began; < 0 = still rolling
    bool cleared = false;
  };

  double stop_line_accel(double speed, double distance) const;
  bool crossing_clear(const Observation& obs, Vec2 stop_point) const;
  std::optional<double> yield_distance(const Observation& obs, double s_me) const;

  IdmParams params_;
  KinematicModel model_;
  RouteContext route_;
  double dt_;
  double self_length_;
  std::vector<Vec2> signal_points_;  // stop-line positions of every map signal
  std::map<int, StopSignProgress> stop_memory_;  // keyed by signal index
};

/// Delays observations by a fixed number of steps. Zero is a pass-through.
/// The first observation seeds the buffer, so early steps see the scene as it
/// was at t = 0 rather than nothing.
class LatencyFilter : public ObservationFilter {
 public:
  explicit LatencyFilter(int delay_steps) : delay_steps_(delay_steps) {}
  Observation apply(const Observation& obs) override;

 private:
  int delay_steps_;
  std::deque<Observation> buffer_;
};

/// Drops nearby agents farther than `range` meters from the observer.
class ShortsightedFilter : public ObservationFilter {
 public:
  explicit ShortsightedFilter(double range) : range_(range) {}
  Observation apply(const Observation& obs) override;

 private:
  double range_;
};

/// Replays a recorded trajectory by reconstructing, at each step, the command
/// the dynamics consumed between consecutive recorded states. Ignores what it
/// observes; past the end of the recording it coasts.
class ReplayPolicy : public Policy {
 public:
  ReplayPolicy(std::vector<AgentState> states, double dt);
  Command step(const Observation& obs) override;

 private:
  std::vector<AgentState> states_;
  double dt_;
  std::size_t next_ = 1;
};

/// Builds the reactive policy named by `spec`: IDMAgent, IDMLatency2 (0.2 s
/// observation delay) or IDMShortsighted10 (10 m sensing range). Replay and
/// best-response egos are constructed explicitly by the counterfactual engine
/// from recorded trajectories, never from a name.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const PolicyBuildContext& ctx);

}  // namespace cfmargin
