// Driver models: IDM anchors, the aggressiveness preset, observation filters
// and the route follower's signal handling.

#include <cmath>
#include <stdexcept>

#include "cfmargin/agents.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cfmargin;

namespace {

Observation obs_at(Vec2 pos, double heading, double speed, double time = 0.0) {
  Observation o;
  o.self_index = 0;
  o.self.position = pos;
  o.self.heading = heading;
  o.self.speed = speed;
  o.time = time;
  return o;
}

NearbyAgent neighbor(int index, Vec2 pos, double heading, double speed) {
  NearbyAgent nb;
  nb.index = index;
  nb.state.position = pos;
  nb.state.heading = heading;
  nb.state.speed = speed;
  return nb;
}

PolicyBuildContext route_ctx(const LaneNetwork& map, std::vector<std::string> route) {
  PolicyBuildContext ctx;
  ctx.map = &map;
  ctx.route = std::move(route);
  ctx.dt = 0.1;
  return ctx;
}

LaneNetwork straight_map() {
  LaneNetwork map;
  map.lanelets.push_back(testfix::straight_lane("main", {0.0, 0.0}, {200.0, 0.0}, 3.5));
  return map;
}

}  // namespace

TEST_CASE("idm anchors") {
  const IdmParams p;  // v0 15, T 1.5, s0 2, a 1.5, b 2

  CHECK(idm_free_accel(p, p.v0) == 0.0);   // settled at the desired speed
  CHECK(idm_free_accel(p, 0.0) == p.a);    // full push from rest
  CHECK(idm_free_accel(p, 20.0) < 0.0);    // above v0 brakes

  CHECK(idm_accel(p, 10.0, 0.0, 5.0) == kHardBrake);    // overlapped leader
  CHECK(idm_accel(p, 10.0, -2.0, 0.0) == kHardBrake);
  CHECK(idm_accel(p, 30.0, 0.5, 25.0) >= kHardBrake);   // never below the floor

  // Equilibrium gap: s*(v, 0) inflated by the free-speed term, no accel.
  const double v = 10.0;
  const double s_star = p.s0 + v * p.headway;
  const double gap_eq = s_star / std::sqrt(1.0 - std::pow(v / p.v0, p.exponent));
  CHECK(idm_accel(p, v, gap_eq, 0.0) == doctest::Approx(0.0).epsilon(1e-12));

  // Tighter than equilibrium brakes, wider accelerates.
  CHECK(idm_accel(p, v, 0.8 * gap_eq, 0.0) < 0.0);
  CHECK(idm_accel(p, v, 1.2 * gap_eq, 0.0) > 0.0);

  // Parked desired speed: settle at rest, brake if rolling.
  IdmParams parked = p;
  parked.v0 = 0.0;
  CHECK(idm_free_accel(parked, 0.0) == 0.0);
  CHECK(idm_free_accel(parked, 1.0) == doctest::Approx(-p.a));
}

TEST_CASE("apply_aggressiveness endpoints and midpoint") {
  const IdmParams base;

  const IdmParams zero = apply_aggressiveness(base, 0.0);
  CHECK(zero.v0 == base.v0);
  CHECK(zero.headway == base.headway);
  CHECK(zero.s0 == base.s0);
  CHECK(zero.a == base.a);
  CHECK(zero.b == base.b);
  CHECK(zero.exponent == base.exponent);
  CHECK(zero.lambda == base.lambda);

  const IdmParams full = apply_aggressiveness(base, 1.0);
  CHECK(full.headway == doctest::Approx(0.5));
  CHECK(full.s0 == doctest::Approx(0.5));
  CHECK(full.a == doctest::Approx(3.0));
  CHECK(full.b == doctest::Approx(4.0));
  CHECK(full.v0 == doctest::Approx(base.v0 * 1.3));
  CHECK(full.lambda == doctest::Approx(1.0));

  const IdmParams mid = apply_aggressiveness(base, 0.5);
  CHECK(mid.headway == doctest::Approx(1.0));
  CHECK(mid.s0 == doctest::Approx(1.25));
  CHECK(mid.a == doctest::Approx(2.25));
  CHECK(mid.b == doctest::Approx(3.0));
  CHECK(mid.v0 == doctest::Approx(base.v0 * 1.15));

  // More aggressive never means more cautious in any coordinate.
  CHECK(mid.headway < base.headway);
  CHECK(mid.v0 > base.v0);
}

TEST_CASE("latency_steps rounds to whole steps") {
  CHECK(latency_steps(0.2, 0.1) == 2);
  CHECK(latency_steps(0.3, 0.1) == 3);
  CHECK(latency_steps(0.04, 0.1) == 0);
  CHECK(latency_steps(1.0, 0.1) == 10);
  CHECK(latency_steps(0.2, 0.05) == 4);
  CHECK(latency_steps(0.0, 0.1) == 0);
}

TEST_CASE("latency filter delays by whole steps, seeding from the first") {
  LatencyFilter f(2);
  for (int k = 0; k < 6; ++k) {
    Observation in = obs_at({static_cast<double>(k), 0.0}, 0.0, 10.0, 0.1 * k);
    const Observation out = f.apply(in);
    const int expect = k < 2 ? 0 : k - 2;
    CHECK(out.self.position.x == doctest::Approx(expect));
  }

  // Zero latency is a strict pass-through.
  LatencyFilter id(0);
  Observation in = obs_at({7.0, 1.0}, 0.2, 9.0, 3.0);
  in.nearby.push_back(neighbor(1, {1.0, 2.0}, 0.0, 4.0));
  const Observation out = id.apply(in);
  CHECK(out.self.position.x == doctest::Approx(7.0));
  CHECK(out.nearby.size() == 1);
  CHECK(out.time == doctest::Approx(3.0));
}

TEST_CASE("shortsighted filter drops neighbors beyond its range") {
  ShortsightedFilter f(10.0);
  Observation in = obs_at({0.0, 0.0}, 0.0, 10.0);
  in.nearby.push_back(neighbor(1, {10.0, 0.0}, 0.0, 5.0));   // exactly at range
  in.nearby.push_back(neighbor(2, {10.01, 0.0}, 0.0, 5.0));  // just beyond
  in.nearby.push_back(neighbor(3, {-3.0, 1.0}, 0.0, 5.0));
  const Observation out = f.apply(in);
  REQUIRE(out.nearby.size() == 2);
  CHECK(out.nearby[0].index == 1);
  CHECK(out.nearby[1].index == 3);
}

TEST_CASE("route follower: free road, leader, and sensing range") {
  const LaneNetwork map = straight_map();
  const PolicyBuildContext ctx = route_ctx(map, {"main"});
  const IdmParams p;

  IdmRouteFollower free_driver(p, ctx);
  const Observation free_obs = obs_at({10.0, 0.0}, 0.0, 10.0);
  const Command free_cmd = free_driver.step(free_obs);
  CHECK(free_cmd.accel == doctest::Approx(idm_free_accel(p, 10.0)));
  CHECK(free_cmd.steer_rate == doctest::Approx(0.0).epsilon(1e-9));

  // A slower leader 15 m ahead forces braking below the free command.
  Observation led = free_obs;
  led.nearby.push_back(neighbor(1, {25.0, 0.0}, 0.0, 4.0));
  IdmRouteFollower following(p, ctx);
  const Command led_cmd = following.step(led);
  CHECK(led_cmd.accel < free_cmd.accel);

  // The shortsighted wrapper cannot see 15 m out: same command as free road.
  PolicySpec spec;
  spec.name = "IDMShortsighted10";
  spec.idm = p;
  auto myopic = make_policy(spec, ctx);
  const Command blind_cmd = myopic->step(led);
  CHECK(blind_cmd.accel == doctest::Approx(free_cmd.accel));

  // Off-lane traffic is not a leader.
  Observation off = free_obs;
  off.nearby.push_back(neighbor(1, {25.0, 2.5}, 0.0, 4.0));
  IdmRouteFollower unbothered(p, ctx);
  CHECK(unbothered.step(off).accel == doctest::Approx(free_cmd.accel));
}

TEST_CASE("route follower: red light brakes, green light does not") {
  const LaneNetwork map = straight_map();
  const PolicyBuildContext ctx = route_ctx(map, {"main"});
  const IdmParams p;

  Observation obs = obs_at({10.0, 0.0}, 0.0, 10.0);
  SignalSighting sight;
  sight.signal_index = 0;
  sight.kind = SignalKind::TrafficLight;
  sight.state = LightState::Red;
  sight.distance = 30.0;
  obs.signals.push_back(sight);

  IdmRouteFollower red_driver(p, ctx);
  const double red_accel = red_driver.step(obs).accel;
  CHECK(red_accel < idm_free_accel(p, 10.0));

  obs.signals[0].state = LightState::Green;
  IdmRouteFollower green_driver(p, ctx);
  CHECK(green_driver.step(obs).accel == doctest::Approx(idm_free_accel(p, 10.0)));
}

TEST_CASE("route follower: stop sign holds, then departs when clear") {
  LaneNetwork map = straight_map();
  Signal sign;
  sign.id = "stop";
  sign.kind = SignalKind::StopSign;
  sign.lanelet = "main";
  sign.stop_arclength = 50.0;
  map.signals.push_back(sign);

  PolicyBuildContext ctx = route_ctx(map, {"main"});
  const IdmParams p;
  IdmRouteFollower driver(p, ctx);

  // Crawled to rest just short of the line.
  const auto stopped = [&](double time) {
    Observation o = obs_at({46.0, 0.0}, 0.0, 0.05, time);
    SignalSighting s;
    s.signal_index = 0;
    s.kind = SignalKind::StopSign;
    s.state = LightState::Red;
    s.distance = 4.0;
    o.signals.push_back(s);
    return o;
  };

  // Holding: braking command for the first half second at rest.
  CHECK(driver.step(stopped(0.0)).accel < 0.0);
  CHECK(driver.step(stopped(0.2)).accel < 0.0);
  CHECK(driver.step(stopped(0.4)).accel < 0.0);
  // Hold served and crossing clear: the stop releases permanently.
  CHECK(driver.step(stopped(0.5)).accel > 0.0);
  CHECK(driver.step(stopped(0.6)).accel > 0.0);

  // Same situation with cross traffic parked near the stop point: no release.
  IdmRouteFollower blocked(p, ctx);
  const auto blocked_obs = [&](double time) {
    Observation o = stopped(time);
    o.nearby.push_back(neighbor(1, {52.0, 6.0}, -testfix::kPi / 2.0, 0.5));
    return o;
  };
  CHECK(blocked.step(blocked_obs(0.0)).accel < 0.0);
  CHECK(blocked.step(blocked_obs(0.5)).accel < 0.0);
  CHECK(blocked.step(blocked_obs(1.0)).accel < 0.0);
  // Crosser gone: the next evaluation releases.
  CHECK(blocked.step(stopped(1.1)).accel > 0.0);
}

TEST_CASE("replay policy reconstructs recorded commands and coasts past the end") {
  std::vector<AgentState> rec(4);
  rec[0].speed = 5.0;
  rec[1].speed = 6.0;
  rec[2].speed = 6.5;
  rec[3].speed = 6.5;
  rec[1].steer = 0.02;
  rec[2].steer = 0.02;
  rec[3].steer = 0.0;

  ReplayPolicy replay(rec, 0.1);
  const Observation ignored = obs_at({0, 0}, 0.0, 0.0);
  Command c = replay.step(ignored);
  CHECK(c.accel == doctest::Approx(10.0));
  CHECK(c.steer_rate == doctest::Approx(0.2));
  c = replay.step(ignored);
  CHECK(c.accel == doctest::Approx(5.0));
  CHECK(c.steer_rate == doctest::Approx(0.0));
  c = replay.step(ignored);
  CHECK(c.accel == doctest::Approx(0.0));
  CHECK(c.steer_rate == doctest::Approx(-0.2));
  // Past the recording: coast.
  c = replay.step(ignored);
  CHECK(c.accel == doctest::Approx(0.0));
  CHECK(c.steer_rate == doctest::Approx(0.0));

  CHECK_THROWS_AS(ReplayPolicy(std::vector<AgentState>{}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(ReplayPolicy(rec, 0.0), std::invalid_argument);
}

TEST_CASE("make_policy builds reactive drivers by name only") {
  const LaneNetwork map = straight_map();
  const PolicyBuildContext ctx = route_ctx(map, {"main"});
  PolicySpec spec;

  for (const char* name : {"IDMAgent", "IDMLatency2", "IDMShortsighted10"}) {
    spec.name = name;
    CHECK(make_policy(spec, ctx) != nullptr);
  }
  for (const char* name : {"Replay", "BestResponse", "NoSuchDriver"}) {
    spec.name = name;
    CHECK_THROWS_AS(make_policy(spec, ctx), std::invalid_argument);
  }
}
