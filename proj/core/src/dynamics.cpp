#include "cfmargin/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "cfmargin/agents.hpp"

namespace cfmargin {

namespace {

struct BicycleState {
  double x, y, theta, v, delta;
};

// Derivatives with commands held constant over the step.
BicycleState deriv(const BicycleState& s, double a, double omega, double wheelbase) {
  return {s.v * std::cos(s.theta), s.v * std::sin(s.theta),
          s.v * std::tan(s.delta) / wheelbase, a, omega};
}

BicycleState axpy(const BicycleState& s, const BicycleState& d, double h) {
  return {s.x + h * d.x, s.y + h * d.y, s.theta + h * d.theta, s.v + h * d.v,
          s.delta + h * d.delta};
}

}  // namespace

AgentState step_dynamics(const AgentState& s, const Command& u, double dt,
                         const KinematicModel& m, bool* command_clamped) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!std::isfinite(u.accel) || !std::isfinite(u.steer_rate)) {
    throw std::invalid_argument("non-finite command");
  }
  if (!std::isfinite(s.position.x) || !std::isfinite(s.position.y) ||
      !std::isfinite(s.heading) || !std::isfinite(s.speed) || !std::isfinite(s.steer)) {
    throw std::invalid_argument("non-finite state");
  }

  double a = std::clamp(u.accel, m.a_min, m.a_max);
  double omega = std::clamp(u.steer_rate, m.omega_min, m.omega_max);
  if (command_clamped) *command_clamped = (a != u.accel) || (omega != u.steer_rate);

  // Shorten commands that would overrun a state bound inside the step, so the
  // integrated state lands exactly on the bound (keeps replay reconstruction
  // from logged states exact, including full stops).
  if (s.speed + a * dt < 0.0) a = -s.speed / dt;
  if (s.speed + a * dt > m.v_max) a = (m.v_max - s.speed) / dt;
  const double delta_target = std::clamp(s.steer + omega * dt, -m.delta_max, m.delta_max);
  omega = (delta_target - s.steer) / dt;

  const BicycleState y0{s.position.x, s.position.y, s.heading, s.speed, s.steer};
  const BicycleState k1 = deriv(y0, a, omega, m.wheelbase);
  const BicycleState k2 = deriv(axpy(y0, k1, 0.5 * dt), a, omega, m.wheelbase);
  const BicycleState k3 = deriv(axpy(y0, k2, 0.5 * dt), a, omega, m.wheelbase);
  const BicycleState k4 = deriv(axpy(y0, k3, dt), a, omega, m.wheelbase);

  AgentState out = s;
  out.position.x = y0.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  out.position.y = y0.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  out.heading = y0.theta + dt / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
  out.speed = y0.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
  out.steer = y0.delta + dt / 6.0 * (k1.delta + 2.0 * k2.delta + 2.0 * k3.delta + k4.delta);

  // Safety net; the effective-command preprocessing should already respect these.
  out.speed = std::clamp(out.speed, 0.0, m.v_max);
  out.steer = std::clamp(out.steer, -m.delta_max, m.delta_max);
  return out;
}

const char* impact_class_name(ImpactClass c) {
  switch (c) {
    case ImpactClass::Front: return "front";
    case ImpactClass::Side: return "side";
    case ImpactClass::Rear: return "rear";
  }
  return "?";
}

namespace {

ImpactClass classify_impact(const Obb& body, Vec2 contact) {
  const Vec2 b = body.to_body(contact);
  const double lon = b.x / (0.5 * body.length);
  const double lat = b.y / (0.5 * body.width);
  if (std::abs(lon) >= std::abs(lat)) return lon >= 0.0 ? ImpactClass::Front : ImpactClass::Rear;
  return ImpactClass::Side;
}

ContactEvent make_event(const Episode& e, int step, int i, int j) {
  const AgentState& a = e.agents[i].states[step];
  const AgentState& b = e.agents[j].states[step];
  ContactEvent ev;
  ev.step = step;
  ev.agent_a = i;
  ev.agent_b = j;
  ev.delta_v = (a.velocity() - b.velocity()).norm();
  ev.impact_angle = std::abs(angle_diff(a.heading, b.heading));
  const Vec2 contact = obb_overlap_centroid(a.footprint(), b.footprint());
  ev.class_a = classify_impact(a.footprint(), contact);
  ev.class_b = classify_impact(b.footprint(), contact);
  return ev;
}

}  // namespace

std::vector<ContactEvent> check_contacts(const Episode& e) {
  std::vector<ContactEvent> events;
  const int n = static_cast<int>(e.agents.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int steps = static_cast<int>(
          std::min(e.agents[i].states.size(), e.agents[j].states.size()));
      for (int k = 0; k < steps; ++k) {
        if (obb_intersect(e.agents[i].states[k].footprint(),
                          e.agents[j].states[k].footprint())) {
          events.push_back(make_event(e, k, i, j));
          break;  // first contact only; later contacts of this pair merge
        }
      }
    }
  }
  std::sort(events.begin(), events.end(), [](const ContactEvent& a, const ContactEvent& b) {
    if (a.step != b.step) return a.step < b.step;
    if (a.agent_a != b.agent_a) return a.agent_a < b.agent_a;
    return a.agent_b < b.agent_b;
  });
  return events;
}

bool agent_collided(const std::vector<ContactEvent>& events, int agent_index) {
  for (const auto& ev : events) {
    if (ev.agent_a == agent_index || ev.agent_b == agent_index) return true;
  }
  return false;
}

bool coll(const Episode& e, int agent_index) {
  return agent_collided(check_contacts(e), agent_index);
}

RouteContext build_route_context(const LaneNetwork& map, const std::vector<std::string>& route) {
  RouteContext ctx;
  ctx.path = map.route_polyline(route);
  for (std::size_t j = 0; j < map.signals.size(); ++j) {
    const Signal& sig = map.signals[j];
    if (auto offset = map.route_offset(route, sig.lanelet)) {
      ctx.signal_stops.push_back(
          {static_cast<int>(j), sig.kind, *offset + sig.stop_arclength});
    }
  }
  return ctx;
}

Observation make_observation(const WorldState& world, int agent_index,
                             const RouteContext& route, double radius) {
  const auto& states = *world.states;
  if (agent_index < 0 || agent_index >= static_cast<int>(states.size())) {
    throw std::invalid_argument("unknown agent index in make_observation");
  }
  Observation obs;
  obs.self_index = agent_index;
  obs.self = states[agent_index];
  obs.time = world.time;

  const Vec2 here = obs.self.position;
  for (int j = 0; j < static_cast<int>(states.size()); ++j) {
    if (j == agent_index) continue;
    if ((states[j].position - here).norm() <= radius) {
      obs.nearby.push_back({j, states[j]});
    }
  }

  if (!route.path.empty() && world.signal_states) {
    const double s_me = route.path.project(here);
    for (const auto& stop : route.signal_stops) {
      const double dist = stop.stop_s - s_me;
      if (dist >= 0.0 && dist <= radius) {
        SignalSighting sight;
        sight.signal_index = stop.signal_index;
        sight.kind = stop.kind;
        sight.distance = dist;
        sight.state = (*world.signal_states)[stop.signal_index];
        obs.signals.push_back(sight);
      }
    }
  }
  return obs;
}

namespace {

struct MapBounds {
  double min_x, min_y, max_x, max_y;
  bool contains(Vec2 p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
};

MapBounds map_bounds(const LaneNetwork& map, double margin) {
  MapBounds b{1e18, 1e18, -1e18, -1e18};
  for (const auto& l : map.lanelets) {
    for (const Vec2& p : l.centerline) {
      b.min_x = std::min(b.min_x, p.x);
      b.min_y = std::min(b.min_y, p.y);
      b.max_x = std::max(b.max_x, p.x);
      b.max_y = std::max(b.max_y, p.y);
    }
  }
  b.min_x -= margin;
  b.min_y -= margin;
  b.max_x += margin;
  b.max_y += margin;
  return b;
}

Episode assemble_episode(const LaneNetwork& map, const std::vector<SimAgent>& agents,
                         const std::vector<std::vector<AgentState>>& trajs,
                         const std::vector<std::vector<LightState>>& signal_rows,
                         double dt, int recorded_steps, const std::string& episode_id,
                         std::uint64_t seed) {
  Episode e;
  e.id = episode_id;
  e.horizon = recorded_steps;
  e.dt = dt;
  e.seed = seed;
  e.map = map;
  e.signal_states = signal_rows;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    AgentRecord rec;
    rec.id = agents[i].id;
    rec.policy = agents[i].recorded_policy;
    rec.route = agents[i].route;
    rec.kinematics = agents[i].kinematics;
    rec.states = trajs[i];
    e.agents.push_back(std::move(rec));
  }
  return e;
}

}  // namespace

Episode run_closed_loop(const LaneNetwork& map, std::vector<SimAgent> agents,
                        double dt, int horizon, const std::string& episode_id,
                        std::uint64_t seed, const SimConfig& cfg) {
  if (agents.empty()) throw std::invalid_argument("simulation needs at least one agent");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");

  const int n = static_cast<int>(agents.size());
  std::vector<std::string> ids(n);
  std::vector<RouteContext> routes(n);
  std::vector<std::vector<AgentState>> trajs(n);
  for (int i = 0; i < n; ++i) {
    ids[i] = agents[i].id;
    routes[i] = build_route_context(map, agents[i].route);
    trajs[i].reserve(horizon + 1);
    trajs[i].push_back(agents[i].initial);
  }

  const MapBounds bounds = map_bounds(map, 50.0);
  std::vector<bool> in_contact(n, false);

  std::vector<std::vector<LightState>> signal_rows;
  auto signal_row_at = [&map](double time) {
    std::vector<LightState> row;
    row.reserve(map.signals.size());
    for (const auto& sig : map.signals) row.push_back(sig.state_at(time));
    return row;
  };

  std::vector<AgentState> current(n);
  for (int i = 0; i < n; ++i) current[i] = agents[i].initial;

  std::vector<Command> commands(n);
  int recorded = 0;
  std::optional<std::string> truncation;

  for (int k = 0; k < horizon; ++k) {
    const double time = k * dt;
    signal_rows.push_back(signal_row_at(time));

    WorldState world;
    world.agent_ids = &ids;
    world.states = &current;
    world.signal_states = &signal_rows.back();
    world.time = time;

    for (int i = 0; i < n; ++i) {
      Observation obs = make_observation(world, i, routes[i], cfg.visibility_radius);
      try {
        commands[i] = agents[i].policy->step(obs);
      } catch (const std::exception& ex) {
        Episode partial = assemble_episode(map, agents, trajs, signal_rows, dt, k,
                                           episode_id, seed);
        partial.truncation = std::string("policy failure: ") + ex.what();
        throw SimulationError(std::string("policy '") + ids[i] + "' failed at step " +
                                  std::to_string(k) + ": " + ex.what(),
                              std::move(partial), k, ids[i]);
      }
    }

    for (int i = 0; i < n; ++i) {
      current[i] = step_dynamics(current[i], commands[i], dt, agents[i].kinematics);
      trajs[i].push_back(current[i]);
    }
    recorded = k + 1;

    if (cfg.allow_early_halt) {
      for (int i = 0; i < n; ++i) {
        if (in_contact[i]) continue;
        for (int j = i + 1; j < n; ++j) {
          if (obb_intersect(current[i].footprint(), current[j].footprint())) {
            in_contact[i] = true;
            in_contact[j] = true;
          }
        }
      }
      bool all_done = true;
      for (int i = 0; i < n; ++i) {
        if (!in_contact[i] && bounds.contains(current[i].position)) {
          all_done = false;
          break;
        }
      }
      if (all_done) {
        truncation = "all agents in contact or off-map";
        break;
      }
    }
  }

  // Final signal row so the episode has horizon+1 rows.
  signal_rows.push_back(signal_row_at(recorded * dt));

  Episode e = assemble_episode(map, agents, trajs, signal_rows, dt, recorded, episode_id, seed);
  e.truncation = truncation;
  return e;
}

Episode simulate(const ScenarioFile& scenario, std::uint64_t seed, int horizon,
                 const SimConfig& cfg) {
  std::vector<SimAgent> sim_agents;
  sim_agents.reserve(scenario.agents.size());
  for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
    const ScenarioAgent& a = scenario.agents[i];
    SimAgent sa;
    sa.id = a.id;
    sa.initial = a.initial;
    sa.route = a.route;
    sa.kinematics = a.kinematics;
    sa.recorded_policy = a.policy;
    PolicyBuildContext ctx;
    ctx.map = &scenario.map;
    ctx.route = a.route;
    ctx.kinematics = a.kinematics;
    ctx.dt = scenario.dt;
    ctx.self_length = a.initial.length;
    ctx.self_width = a.initial.width;
    ctx.self_index = static_cast<int>(i);
    sa.policy = make_policy(a.policy, ctx);
    sim_agents.push_back(std::move(sa));
  }
  return run_closed_loop(scenario.map, std::move(sim_agents), scenario.dt, horizon,
                         scenario.id, seed, cfg);
}

}  // namespace cfmargin
