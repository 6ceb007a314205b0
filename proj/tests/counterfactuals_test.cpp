// Counterfactual engine: zero-intensity identity, filter semantics, seeded
// coin/phase functions, and realization determinism.

#include <cmath>
#include <string>
#include <vector>

#include "cfmargin/counterfactuals.hpp"
#include "cfmargin/random.hpp"
#include "cfmargin/scenario_io.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cfmargin;

namespace {

Episode run_fixture(const ScenarioFile& sc) {
  return simulate(sc, sc.seed, std::llround(sc.duration / sc.dt));
}

CounterfactualSetup setup_for(const Episode& e, CounterfactualKind kind, double gamma,
                              std::uint64_t seed = 99) {
  return build_counterfactual(e, CounterfactualAssignment{kind, gamma, "ego"},
                              PolicySpec{"Replay", IdmParams{}}, seed);
}

double max_state_gap(const Episode& a, const Episode& b) {
  REQUIRE(a.agents.size() == b.agents.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.agents.size(); ++i) {
    REQUIRE(a.agents[i].states.size() == b.agents[i].states.size());
    for (std::size_t k = 0; k < a.agents[i].states.size(); ++k) {
      const AgentState& x = a.agents[i].states[k];
      const AgentState& y = b.agents[i].states[k];
      worst = std::max({worst, std::abs(x.position.x - y.position.x),
                        std::abs(x.position.y - y.position.y),
                        std::abs(x.heading - y.heading), std::abs(x.speed - y.speed),
                        std::abs(x.steer - y.steer)});
    }
  }
  return worst;
}

AgentState box_at(double x, double y, double heading = 0.0) {
  AgentState s;
  s.position = {x, y};
  s.heading = heading;
  s.length = 4.5;
  s.width = 1.8;
  return s;
}

Observation obs_with_marker(double time, int marker_index, LightState light) {
  Observation obs;
  obs.self_index = 0;
  obs.self = box_at(time * 10.0, 0.0);
  obs.time = time;
  obs.nearby.push_back({marker_index, box_at(30.0, 0.0)});
  SignalSighting sig;
  sig.signal_index = 0;
  sig.kind = SignalKind::TrafficLight;
  sig.state = light;
  sig.distance = 40.0;
  obs.signals.push_back(sig);
  return obs;
}

}  // namespace

TEST_CASE("zero intensity reproduces the recorded episode") {
  for (const ScenarioFile& sc :
       {testfix::signal_cross_fixture(), testfix::rear_end_fixture()}) {
    const Episode base = run_fixture(sc);
    for (CounterfactualKind kind : kAllKinds) {
      CAPTURE(sc.id);
      CAPTURE(kind_name(kind));
      const CounterfactualSetup setup = setup_for(base, kind, 0.0);
      CHECK(max_state_gap(realize(setup, 0), base) <= 1e-9);
      CHECK(max_state_gap(realize(setup, 1), base) <= 1e-9);
    }
  }
}

TEST_CASE("distraction filter freezes percepts but never the observer") {
  DistractionFilter f(2.0, 0.0);  // cycle 2.5, attentive in [0, 0.5)

  // Attentive window: everything passes and the snapshot updates.
  Observation out = f.apply(obs_with_marker(0.0, 100, LightState::Red));
  CHECK(out.nearby[0].index == 100);
  out = f.apply(obs_with_marker(0.4, 101, LightState::Red));
  CHECK(out.nearby[0].index == 101);

  // Hold window: stale nearby/signals, current self and clock.
  out = f.apply(obs_with_marker(0.6, 102, LightState::Green));
  CHECK(out.nearby[0].index == 101);
  CHECK(out.signals[0].state == LightState::Red);
  CHECK(out.time == doctest::Approx(0.6));
  CHECK(out.self.position.x == doctest::Approx(6.0));

  out = f.apply(obs_with_marker(2.4, 103, LightState::Green));
  CHECK(out.nearby[0].index == 101);  // still the 0.4 s snapshot

  // Next cycle: refresh resumes.
  out = f.apply(obs_with_marker(2.5, 104, LightState::Green));
  CHECK(out.nearby[0].index == 104);
  CHECK(out.signals[0].state == LightState::Green);
}

TEST_CASE("distraction filter first call seeds the snapshot even mid-hold") {
  DistractionFilter f(2.0, 1.0);  // first observation lands at cycle position 1.0
  Observation out = f.apply(obs_with_marker(0.0, 7, LightState::Red));
  CHECK(out.nearby[0].index == 7);  // passed through, not dropped
  out = f.apply(obs_with_marker(0.1, 8, LightState::Green));
  CHECK(out.nearby[0].index == 7);  // now held
}

TEST_CASE("distraction hold zero is a pass-through") {
  DistractionFilter f(0.0, 0.3);
  for (double t : {0.0, 0.1, 0.7, 3.0}) {
    const Observation out = f.apply(obs_with_marker(t, 40 + static_cast<int>(t * 10), LightState::Green));
    CHECK(out.nearby[0].index == 40 + static_cast<int>(t * 10));
  }
}

TEST_CASE("unseen filter hides the ego by body gap with the boundary hidden") {
  // Threshold 1/0.5 = 2 m. Axis-aligned 4.5 m boxes: center gap 6.5 puts the
  // body gap exactly at the threshold.
  Observation obs;
  obs.self_index = 0;
  obs.self = box_at(0.0, 0.0);
  obs.time = 1.0;
  obs.nearby.push_back({3, box_at(50.0, 0.0)});   // unrelated agent, far away
  obs.nearby.push_back({7, box_at(6.5, 0.0)});    // the ego, gap == 2.0

  UnseenFilter at_threshold(0.5, 7);
  Observation out = at_threshold.apply(obs);
  REQUIRE(out.nearby.size() == 1);
  CHECK(out.nearby[0].index == 3);  // ego hidden at the exact threshold

  obs.nearby[1].state = box_at(6.4, 0.0);  // gap 1.9 < 2.0
  UnseenFilter inside(0.5, 7);
  out = inside.apply(obs);
  REQUIRE(out.nearby.size() == 2);

  obs.nearby[1].state = box_at(400.0, 0.0);
  UnseenFilter off(0.0, 7);
  out = off.apply(obs);
  CHECK(out.nearby.size() == 2);  // zero intensity never hides
}

TEST_CASE("signal blindness removes exactly the flagged signals") {
  Observation obs = obs_with_marker(0.0, 1, LightState::Red);
  SignalSighting second = obs.signals[0];
  second.signal_index = 1;
  obs.signals.push_back(second);

  SignalBlindnessFilter f({true, false});
  const Observation out = f.apply(obs);
  REQUIRE(out.signals.size() == 1);
  CHECK(out.signals[0].signal_index == 1);
  CHECK(out.nearby.size() == obs.nearby.size());
}

TEST_CASE("precedence coin is seeded, bounded and varies across agents and signals") {
  const std::uint64_t seed = 4242;

  int heads = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    CHECK(!precedence_ignored(seed, rep, 1, 0, 0.0));
    CHECK(precedence_ignored(seed, rep, 1, 0, 1.0));
    if (precedence_ignored(seed, rep, 1, 0, 0.5)) ++heads;
  }
  const double freq = heads / 1000.0;
  CHECK(freq > 0.45);
  CHECK(freq < 0.55);

  // Same rep, different agent or signal: the coins must not be locked together.
  bool agent_varies = false, signal_varies = false;
  for (int rep = 0; rep < 64; ++rep) {
    agent_varies |= precedence_ignored(seed, rep, 1, 0, 0.5) !=
                    precedence_ignored(seed, rep, 2, 0, 0.5);
    signal_varies |= precedence_ignored(seed, rep, 1, 0, 0.5) !=
                     precedence_ignored(seed, rep, 1, 1, 0.5);
  }
  CHECK(agent_varies);
  CHECK(signal_varies);

  CHECK(precedence_ignored(seed, 5, 1, 0, 0.5) == precedence_ignored(seed, 5, 1, 0, 0.5));
}

TEST_CASE("distraction phase stays inside one cycle and varies per agent") {
  const double hold = 2.0;
  bool varies = false;
  double first = -1.0;
  for (int rep = 0; rep < 50; ++rep) {
    for (int agent = 0; agent < 4; ++agent) {
      const double p = distraction_phase(911, rep, agent, hold);
      CHECK(p >= 0.0);
      CHECK(p < hold + DistractionFilter::kAttentiveWindow);
      if (first < 0.0) first = p;
      varies |= std::abs(p - first) > 1e-6;
    }
  }
  CHECK(varies);
}

TEST_CASE("build_counterfactual validates the ego and clamps the intensity") {
  const Episode base = run_fixture(testfix::rear_end_fixture());

  CHECK_THROWS_AS(build_counterfactual(
                      base, CounterfactualAssignment{CounterfactualKind::Unseen, 1.0, "nobody"},
                      PolicySpec{"Replay", IdmParams{}}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(setup_for(base, CounterfactualKind::Distraction, -0.5),
                  std::invalid_argument);

  const CounterfactualSetup clipped = setup_for(base, CounterfactualKind::Distraction, 99.0);
  CHECK(clipped.assign.intensity == doctest::Approx(5.0));
  CHECK(clipped.ego_index == base.agent_index("ego"));
}

TEST_CASE("realizations are deterministic and deterministic kinds ignore the rep") {
  const Episode base = run_fixture(testfix::signal_cross_fixture());

  const CounterfactualSetup distracted = setup_for(base, CounterfactualKind::Distraction, 2.0);
  CHECK(write_episode(realize(distracted, 3)) == write_episode(realize(distracted, 3)));

  const CounterfactualSetup aggr = setup_for(base, CounterfactualKind::Aggressiveness, 0.3);
  CHECK(write_episode(realize(aggr, 0)) == write_episode(realize(aggr, 5)));
}

TEST_CASE("sub-step reflex impairment quantizes to the unperturbed episode") {
  // dt = 0.1 s, so a 0.04 s impairment rounds to zero delay steps and the
  // realization must coincide byte for byte with intensity zero.
  const Episode base = run_fixture(testfix::rear_end_fixture());
  const CounterfactualSetup none = setup_for(base, CounterfactualKind::ImpairedReflexes, 0.0);
  const CounterfactualSetup tiny = setup_for(base, CounterfactualKind::ImpairedReflexes, 0.04);
  CHECK(write_episode(realize(tiny, 0)) == write_episode(realize(none, 0)));
}

TEST_CASE("max-intensity unseen makes the tailgater blind to the braking ego") {
  const Episode base = run_fixture(testfix::rear_end_fixture());
  CHECK(check_contacts(base).empty());

  const CounterfactualSetup blind = setup_for(base, CounterfactualKind::Unseen, 20.0);
  const Episode crashed = realize(blind, 0);
  const auto events = check_contacts(crashed);
  REQUIRE(!events.empty());
  CHECK(agent_collided(events, blind.ego_index));
}
