#include "cfmargin/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfmargin {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Same-lane classification: centers within this lateral offset of the route.
constexpr double kLaneHalfWidth = 1.5;

// Pure pursuit.
constexpr double kMinLookahead = 5.0;    // m
constexpr double kLookaheadTime = 1.0;   // s

// Stop signs.
constexpr double kStopSpeed = 0.1;        // below this counts as fully stopped
constexpr double kStopHoldTime = 0.5;     // s at rest before departure
constexpr double kStopClearRadius = 15.0; // m around the stop line that must be clear
constexpr double kStopTolerance = 1.0;    // m beyond s0 that still counts as "at the line"

// Crossing-conflict precedence.
constexpr double kYieldFloor = 0.8;       // s, minimum accepted arrival-time window
constexpr double kYieldFactor = 2.0;      // window = max(floor, factor * headway)
constexpr double kConflictRange = 60.0;   // m, conflicts farther ahead are ignored
constexpr double kConflictStandoff = 3.0; // m held back from the conflict point
constexpr double kCreepSpeed = 0.3;       // m/s floor for arrival-time estimates
constexpr double kCrossAngleMin = kPi / 6.0;
constexpr double kSignalGovernRadius = 25.0;  // m, conflicts this close to a stop line
                                              // are settled by the signals alone

double lerp(double a, double b, double t) { return a + t * (b - a); }

// (v/v0)^e, with v0 = 0 meaning "parked": settle at rest, brake if rolling.
double desired_speed_term(const IdmParams& p, double speed) {
  if (p.v0 <= 0.0) return speed > 0.0 ? 2.0 : 1.0;
  return std::pow(speed / p.v0, p.exponent);
}

}  // namespace

double idm_accel(const IdmParams& p, double speed, double gap, double closing_speed) {
  if (gap <= 0.0) return kHardBrake;
  const double s_star =
      p.s0 + speed * p.headway + speed * closing_speed / (2.0 * std::sqrt(p.a * p.b));
  const double ratio = s_star / gap;
  const double a = p.a * (1.0 - desired_speed_term(p, speed) - ratio * ratio);
  return std::max(a, kHardBrake);
}

double idm_free_accel(const IdmParams& p, double speed) {
  return p.a * (1.0 - desired_speed_term(p, speed));
}

IdmParams apply_aggressiveness(const IdmParams& base, double lambda) {
  IdmParams out = base;
  out.headway = lerp(base.headway, 0.5, lambda);
  out.s0 = lerp(base.s0, 0.5, lambda);
  out.a = lerp(base.a, 3.0, lambda);
  out.b = lerp(base.b, 4.0, lambda);
  out.v0 = base.v0 * (1.0 + 0.3 * lambda);
  out.lambda = lerp(base.lambda, 1.0, lambda);
  return out;
}

int latency_steps(double seconds, double dt) {
  return static_cast<int>(std::llround(seconds / dt));
}

IdmRouteFollower::IdmRouteFollower(const IdmParams& params, const PolicyBuildContext& ctx)
    : params_(params),
      model_(ctx.kinematics),
      dt_(ctx.dt),
      self_length_(ctx.self_length) {
  if (!ctx.map) throw std::invalid_argument("route follower needs a map");
  route_ = build_route_context(*ctx.map, ctx.route);
  for (const auto& sig : ctx.map->signals) {
    const Lanelet* l = ctx.map->find_lanelet(sig.lanelet);
    if (!l || l->centerline.size() < 2) continue;
    signal_points_.push_back(Polyline(l->centerline).point_at(sig.stop_arclength));
  }
}

double IdmRouteFollower::stop_line_accel(double speed, double distance) const {
  // Virtual stationary leader at the line; the driver settles s0 short of it.
  return idm_accel(params_, speed, distance - 0.5 * self_length_, speed);
}

bool IdmRouteFollower::crossing_clear(const Observation& obs, Vec2 stop_point) const {
  for (const auto& nb : obs.nearby) {
    if ((nb.state.position - stop_point).norm() > kStopClearRadius) continue;
    // Vehicles on the own lane are queue members, handled by car-following.
    if (std::abs(route_.path.lateral_at(nb.state.position)) <= kLaneHalfWidth) continue;
    return false;
  }
  return true;
}

std::optional<double> IdmRouteFollower::yield_distance(const Observation& obs,
                                                       double s_me) const {
  (void)s_me;
  const AgentState& me = obs.self;
  const Vec2 my_dir = heading_dir(me.heading);
  const double window = std::max(kYieldFloor, kYieldFactor * params_.headway);

  std::optional<double> nearest;
  for (const auto& nb : obs.nearby) {
    const double rel = std::abs(angle_diff(nb.state.heading, me.heading));
    if (rel < kCrossAngleMin || rel > kPi - kCrossAngleMin) continue;  // not crossing

    const Vec2 their_dir = heading_dir(nb.state.heading);
    const double denom = my_dir.cross(their_dir);
    if (std::abs(denom) < 1e-6) continue;
    const Vec2 rp = nb.state.position - me.position;
    const double d_me = rp.cross(their_dir) / denom;    // conflict distance, own path
    const double d_other = rp.cross(my_dir) / denom;    // conflict distance, theirs

    if (d_me < kConflictStandoff || d_me > kConflictRange) continue;  // behind or far
    if (d_other < -nb.state.length) continue;                         // already through

    // Signal-governed conflict zones are protected movements: precedence
    // comes from the signals alone (own stop line handling), not from this
    // gap-acceptance heuristic.
    const Vec2 conflict = me.position + my_dir * d_me;
    bool governed = false;
    for (const Vec2& sp : signal_points_) {
      if ((sp - conflict).norm() <= kSignalGovernRadius) {
        governed = true;
        break;
      }
    }
    if (governed) continue;

    const double t_me = d_me / std::max(me.speed, kCreepSpeed);
    const double t_other = d_other / std::max(nb.state.speed, kCreepSpeed);
    if (t_other >= t_me + window) continue;  // own passage clearly first

    bool must_yield;
    if (t_me >= t_other + window) {
      must_yield = true;  // their passage clearly first
    } else {
      must_yield = my_dir.cross(rp) < 0.0;  // simultaneous: right of way from the right
    }
    if (!must_yield) continue;

    const double stop_at = d_me - kConflictStandoff;
    if (!nearest || stop_at < *nearest) nearest = stop_at;
  }
  return nearest;
}

Command IdmRouteFollower::step(const Observation& obs) {
  const AgentState& me = obs.self;
  const double v = me.speed;
  const bool on_route = !route_.path.empty();
  const double s_me = on_route ? route_.path.project(me.position) : 0.0;

  double accel = idm_free_accel(params_, v);

  if (on_route) {
    double best_gap = 1e18;
    double leader_speed = 0.0;
    bool have_leader = false;
    for (const auto& nb : obs.nearby) {
      const double s_j = route_.path.project(nb.state.position);
      if (s_j <= s_me) continue;
      if (std::abs(route_.path.lateral_at(nb.state.position)) > kLaneHalfWidth) continue;
      const double gap = s_j - s_me - 0.5 * (self_length_ + nb.state.length);
      if (gap < best_gap) {
        best_gap = gap;
        have_leader = true;
        leader_speed = nb.state.speed *
                       std::cos(angle_diff(nb.state.heading, route_.path.heading_at(s_j)));
      }
    }
    if (have_leader) {
      accel = std::min(accel, idm_accel(params_, v, best_gap, v - leader_speed));
    }
  }

  for (const auto& sig : obs.signals) {
    if (sig.kind == SignalKind::TrafficLight) {
      if (sig.state == LightState::Green) continue;
      accel = std::min(accel, stop_line_accel(v, sig.distance));
    } else {
      auto& mem = stop_memory_[sig.signal_index];
      if (mem.cleared) continue;
      const double gap = sig.distance - 0.5 * self_length_;
      if (v < kStopSpeed && gap < params_.s0 + kStopTolerance) {
        if (mem.hold_started < 0.0) mem.hold_started = obs.time;
        if (obs.time - mem.hold_started >= kStopHoldTime &&
            crossing_clear(obs, route_.path.point_at(s_me + sig.distance))) {
          mem.cleared = true;
          continue;
        }
      }
      accel = std::min(accel, stop_line_accel(v, sig.distance));
    }
  }

  if (auto stop_at = yield_distance(obs, s_me)) {
    accel = std::min(accel, stop_line_accel(v, *stop_at));
  }

  accel = std::clamp(accel, model_.a_min, model_.a_max);

  double steer_rate;
  if (on_route) {
    const double lookahead = std::max(kMinLookahead, kLookaheadTime * v);
    const Vec2 target = route_.path.point_at(s_me + lookahead);
    const Vec2 d = target - me.position;
    const double alpha = angle_diff(std::atan2(d.y, d.x), me.heading);
    const double desired =
        std::clamp(std::atan(2.0 * model_.wheelbase * std::sin(alpha) / lookahead),
                   -model_.delta_max, model_.delta_max);
    steer_rate = (desired - me.steer) / dt_;
  } else {
    steer_rate = (0.0 - me.steer) / dt_;  // no route: straighten out
  }
  steer_rate = std::clamp(steer_rate, model_.omega_min, model_.omega_max);

  return {accel, steer_rate};
}

Observation LatencyFilter::apply(const Observation& obs) {
  if (delay_steps_ <= 0) return obs;
  if (buffer_.empty()) {
    for (int i = 0; i < delay_steps_; ++i) buffer_.push_back(obs);
  }
  buffer_.push_back(obs);
  Observation out = std::move(buffer_.front());
  buffer_.pop_front();
  return out;
}

Observation ShortsightedFilter::apply(const Observation& obs) {
  Observation out = obs;
  std::erase_if(out.nearby, [&](const NearbyAgent& nb) {
    return (nb.state.position - obs.self.position).norm() > range_;
  });
  return out;
}

ReplayPolicy::ReplayPolicy(std::vector<AgentState> states, double dt)
    : states_(std::move(states)), dt_(dt) {
  if (states_.empty()) throw std::invalid_argument("replay needs a recorded trajectory");
  if (!(dt > 0.0)) throw std::invalid_argument("replay needs a positive dt");
}

Command ReplayPolicy::step(const Observation&) {
  if (next_ >= states_.size()) return {0.0, 0.0};
  const AgentState& prev = states_[next_ - 1];
  const AgentState& next = states_[next_];
  ++next_;
  return {(next.speed - prev.speed) / dt_, (next.steer - prev.steer) / dt_};
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const PolicyBuildContext& ctx) {
  auto wrap = [&](std::unique_ptr<ObservationFilter> filter) -> std::unique_ptr<Policy> {
    std::vector<std::unique_ptr<ObservationFilter>> obs_filters;
    obs_filters.push_back(std::move(filter));
    return std::make_unique<FilteredPolicy>(
        std::make_unique<IdmRouteFollower>(spec.idm, ctx), std::move(obs_filters),
        std::vector<std::unique_ptr<CommandFilter>>{});
  };

  if (spec.name == "IDMAgent") {
    return std::make_unique<IdmRouteFollower>(spec.idm, ctx);
  }
  if (spec.name == "IDMLatency2") {
    return wrap(std::make_unique<LatencyFilter>(latency_steps(0.2, ctx.dt)));
  }
  if (spec.name == "IDMShortsighted10") {
    return wrap(std::make_unique<ShortsightedFilter>(10.0));
  }
  throw std::invalid_argument("policy '" + spec.name + "' cannot be built by name");
}

}  // namespace cfmargin
