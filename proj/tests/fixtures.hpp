// Hand-built scenarios shared by the unit suites. Small on purpose: two or
// three agents, short horizons, one failure mechanism each.
#pragma once

#include <cmath>

#include "cfmargin/scenario.hpp"

namespace cfmargin::testfix {

inline constexpr double kPi = 3.14159265358979323846;

inline Lanelet straight_lane(const std::string& id, Vec2 a, Vec2 b, double width) {
  Lanelet l;
  l.id = id;
  l.centerline = {a, b};
  l.width = width;
  return l;
}

inline ScenarioAgent car(const std::string& id, Vec2 pos, double heading, double speed,
                         std::vector<std::string> route, double v0, double headway = 1.5) {
  ScenarioAgent a;
  a.id = id;
  a.initial.position = pos;
  a.initial.heading = heading;
  a.initial.speed = speed;
  a.route = std::move(route);
  a.policy.name = "IDMAgent";
  a.policy.idm.v0 = v0;
  a.policy.idm.headway = headway;
  return a;
}

/// Eastbound ego crossing a signalized intersection; one northbound-to-south
/// crosser whose light switches from green to red early enough to stop with
/// ~0.45 s to spare. A distracted crosser that holds a stale green across the
/// switch runs the red at speed and meets the ego inside the box. Nominally
/// contact-free.
inline ScenarioFile signal_cross_fixture() {
  ScenarioFile s;
  s.id = "signal_cross";
  s.duration = 12.0;
  s.dt = 0.1;
  s.seed = 41;
  s.map.lanelets.push_back(straight_lane("ew", {-160.0, 0.0}, {120.0, 0.0}, 3.5));
  s.map.lanelets.push_back(straight_lane("ns", {0.0, 160.0}, {0.0, -120.0}, 3.5));

  const double v_e = 13.5, t_e = 8.0;
  s.agents.push_back(car("ego", {-v_e * t_e, 0.0}, 0.0, v_e, {"ew"}, v_e));

  const double v_m = 12.0, t_m = 8.0;
  s.agents.push_back(car("minor", {0.0, v_m * t_m}, -kPi / 2.0, v_m, {"ns"}, v_m, 1.4));

  // Green long enough that an unbraked arrival is committed; red with 0.45 s
  // of stopping slack for an attentive driver.
  const double commit = v_m * v_m / 16.0 + 0.1 * v_m;
  const double r = t_m - (5.5 + commit) / v_m - 0.45;
  Signal sig;
  sig.id = "s1";
  sig.kind = SignalKind::TrafficLight;
  sig.lanelet = "ns";
  sig.stop_arclength = 160.0 - 5.5;
  sig.phases = {{LightState::Green, r}, {LightState::Red, 60.0}};
  s.map.signals.push_back(sig);
  return s;
}

/// Ego braking hard for a low desired speed with a matched-speed follower
/// close behind. The follower reacts in time when attentive; with delayed
/// observations it eats the braking wave. Nominally contact-free.
inline ScenarioFile rear_end_fixture() {
  ScenarioFile s;
  s.id = "rear_end";
  s.duration = 8.0;
  s.dt = 0.1;
  s.seed = 23;
  s.map.lanelets.push_back(straight_lane("main", {-60.0, 0.0}, {220.0, 0.0}, 3.5));

  ScenarioAgent ego = car("ego", {30.0, 0.0}, 0.0, 12.0, {"main"}, 2.0);
  s.agents.push_back(ego);
  ScenarioAgent tail = car("tail", {0.0, 0.0}, 0.0, 12.0, {"main"}, 12.0, 0.8);
  s.agents.push_back(tail);
  return s;
}

/// One car alone on a straight road: no counterfactual can make it collide.
inline ScenarioFile lone_car_fixture() {
  ScenarioFile s;
  s.id = "lone_car";
  s.duration = 5.0;
  s.dt = 0.1;
  s.seed = 5;
  s.map.lanelets.push_back(straight_lane("main", {-20.0, 0.0}, {120.0, 0.0}, 3.5));
  s.agents.push_back(car("ego", {0.0, 0.0}, 0.0, 10.0, {"main"}, 10.0));
  return s;
}

}  // namespace cfmargin::testfix
