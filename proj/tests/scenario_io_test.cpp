// Scenario model metadata, native and CommonRoad-subset parsing, round-trip
// fixed points, error taxonomy, and a no-crash fuzz pass.

#include <cstdint>
#include <string>
#include <vector>

#include "cfmargin/dynamics.hpp"
#include "cfmargin/random.hpp"
#include "cfmargin/scenario_io.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cfmargin;

TEST_CASE("counterfactual kind metadata") {
  CHECK(intensity_max(CounterfactualKind::Aggressiveness) == doctest::Approx(1.0));
  CHECK(intensity_max(CounterfactualKind::Distraction) == doctest::Approx(5.0));
  CHECK(intensity_max(CounterfactualKind::IllegalPrecedence) == doctest::Approx(1.0));
  CHECK(intensity_max(CounterfactualKind::ImpairedReflexes) == doctest::Approx(1.0));
  CHECK(intensity_max(CounterfactualKind::Unseen) == doctest::Approx(20.0));

  CHECK(kind_is_deterministic(CounterfactualKind::Aggressiveness));
  CHECK(!kind_is_deterministic(CounterfactualKind::Distraction));
  CHECK(!kind_is_deterministic(CounterfactualKind::IllegalPrecedence));
  CHECK(kind_is_deterministic(CounterfactualKind::ImpairedReflexes));
  CHECK(kind_is_deterministic(CounterfactualKind::Unseen));

  for (CounterfactualKind k : kAllKinds) {
    const auto back = kind_from_name(kind_name(k));
    REQUIRE(back.has_value());
    CHECK(*back == k);
  }
  CHECK(!kind_from_name("no_such_kind").has_value());
}

TEST_CASE("clamp_intensity clips above and rejects below") {
  const auto inside = clamp_intensity(CounterfactualKind::Distraction, 2.5);
  CHECK(inside.value == doctest::Approx(2.5));
  CHECK(!inside.clipped);

  const auto above = clamp_intensity(CounterfactualKind::Distraction, 99.0);
  CHECK(above.value == doctest::Approx(5.0));
  CHECK(above.clipped);

  const auto zero = clamp_intensity(CounterfactualKind::Unseen, 0.0);
  CHECK(zero.value == 0.0);
  CHECK(!zero.clipped);

  CHECK_THROWS_AS(clamp_intensity(CounterfactualKind::Unseen, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(clamp_intensity(CounterfactualKind::Unseen, std::nan("")),
                  std::invalid_argument);
}

TEST_CASE("format_double is a bit-exact reparse and rejects non-finite") {
  for (double v : {0.1, 1.0 / 3.0, 3.14159265358979, -0.0, 1e300, 1e-300, 12345.678901,
                   -2.2250738585072014e-308}) {
    const std::string text = format_double(v);
    CHECK(std::stod(text) == v);
  }
  CHECK(format_double(1.0) == "1");
  CHECK_THROWS_AS(format_double(std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(format_double(std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
}

TEST_CASE("native scenario round-trip is a byte-exact fixed point") {
  ScenarioFile sc = testfix::signal_cross_fixture();
  // Awkward values exercise the float formatting.
  sc.agents[0].initial.speed = 13.0 + 1.0 / 3.0;
  sc.agents[0].policy.idm.headway = 0.1 + 0.2;  // 0.30000000000000004
  sc.map.lanelets[0].successors.push_back("ns");

  const std::string once = write_scenario(sc);
  const ScenarioFile back = parse_scenario(once, ScenarioFormat::Native);
  CHECK(write_scenario(back) == once);

  CHECK(back.id == sc.id);
  CHECK(back.seed == sc.seed);
  CHECK(back.duration == sc.duration);
  REQUIRE(back.map.lanelets.size() == 2);
  CHECK(back.map.lanelets[0].successors == std::vector<std::string>{"ns"});
  REQUIRE(back.map.signals.size() == 1);
  CHECK(back.map.signals[0].kind == SignalKind::TrafficLight);
  REQUIRE(back.map.signals[0].phases.size() == 2);
  CHECK(back.map.signals[0].phases[0].state == LightState::Green);
  REQUIRE(back.agents.size() == 2);
  CHECK(back.agents[0].initial.speed == sc.agents[0].initial.speed);  // bit-exact
  CHECK(back.agents[0].policy.idm.headway == sc.agents[0].policy.idm.headway);
  CHECK(back.agents[1].route == sc.agents[1].route);
}

TEST_CASE("episode log round-trip is a byte-exact fixed point") {
  const ScenarioFile sc = testfix::rear_end_fixture();
  const Episode ep = simulate(sc, sc.seed, 60);

  const std::string once = write_episode(ep);
  const Episode back = parse_episode(once);
  CHECK(write_episode(back) == once);

  CHECK(back.id == ep.id);
  CHECK(back.horizon == ep.horizon);
  CHECK(back.seed == ep.seed);
  REQUIRE(back.agents.size() == ep.agents.size());
  for (std::size_t i = 0; i < ep.agents.size(); ++i) {
    REQUIRE(back.agents[i].states.size() == ep.agents[i].states.size());
    for (std::size_t k = 0; k < ep.agents[i].states.size(); ++k) {
      CHECK(back.agents[i].states[k].position.x == ep.agents[i].states[k].position.x);
      CHECK(back.agents[i].states[k].speed == ep.agents[i].states[k].speed);
    }
  }
  CHECK(back.signal_states == ep.signal_states);
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_scenario("bogus_header\n", ScenarioFormat::Native);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
    CHECK(e.offset == 1);
  }

  const std::string bad =
      "cfmargin_scenario_v1\n"
      "scenario id=x duration=ten dt=0.1 seed=0\n";
  CHECK_THROWS_AS(parse_scenario(bad, ScenarioFormat::Native), ParseError);

  const std::string dup =
      "cfmargin_scenario_v1\n"
      "scenario id=x duration=1 dt=0.1 seed=0\n"
      "scenario id=y duration=1 dt=0.1 seed=0\n";
  try {
    parse_scenario(dup, ScenarioFormat::Native);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }
}

TEST_CASE("semantic errors name the offending element") {
  ScenarioFile sc = testfix::lone_car_fixture();
  sc.agents[0].route = {"ghost"};
  try {
    validate_scenario(sc);
    FAIL("expected SemanticError");
  } catch (const SemanticError& e) {
    CHECK(e.element == "agent 'ego'");
    CHECK(std::string(e.what()).find("unresolved lanelet id 'ghost'") != std::string::npos);
  }

  ScenarioFile broken = testfix::lone_car_fixture();
  broken.map.lanelets[0].successors.push_back("nowhere");
  try {
    validate_scenario(broken);
    FAIL("expected SemanticError");
  } catch (const SemanticError& e) {
    CHECK(e.element == "lanelet 'main'");
  }

  ScenarioFile sig = testfix::signal_cross_fixture();
  sig.map.signals[0].lanelet = "ghost";
  CHECK_THROWS_AS(validate_scenario(sig), SemanticError);

  ScenarioFile neg = testfix::lone_car_fixture();
  neg.agents[0].initial.speed = -1.0;
  CHECK_THROWS_AS(validate_scenario(neg), SemanticError);
}

TEST_CASE("commonroad subset fixture parses") {
  const std::string xml = R"(<?xml version="1.0" encoding="UTF-8"?>
<commonRoad benchmarkID="fixture-x" timeStepSize="0.05">
  <lanelet id="l1">
    <leftBound>
      <point><x>0</x><y>2</y></point>
      <point><x>50</x><y>2</y></point>
    </leftBound>
    <rightBound>
      <point><x>0</x><y>-2</y></point>
      <point><x>50</x><y>-2</y></point>
    </rightBound>
    <successor ref="l2"/>
  </lanelet>
  <lanelet id="l2">
    <leftBound>
      <point><x>50</x><y>2</y></point>
      <point><x>90</x><y>2</y></point>
    </leftBound>
    <rightBound>
      <point><x>50</x><y>-2</y></point>
      <point><x>90</x><y>-2</y></point>
    </rightBound>
  </lanelet>
  <dynamicObstacle id="car1">
    <shape><rectangle><length>5.2</length><width>2.1</width></rectangle></shape>
    <initialState>
      <position><point><x>5</x><y>0</y></point></position>
      <orientation><exactValue>0</exactValue></orientation>
      <velocity>8.5</velocity>
    </initialState>
  </dynamicObstacle>
  <obstacle id="rock">
    <role>static</role>
    <shape><rectangle><length>1.5</length><width>1.5</width></rectangle></shape>
    <initialState>
      <position><point><x>80</x><y>0.5</y></point></position>
      <orientation>0</orientation>
    </initialState>
  </obstacle>
  <planningProblem id="p1"/>
</commonRoad>)";

  std::vector<std::string> warnings;
  const ScenarioFile sc = parse_scenario(xml, ScenarioFormat::CommonRoadXmlSubset, &warnings);

  CHECK(sc.id == "fixture-x");
  CHECK(sc.dt == doctest::Approx(0.05));
  REQUIRE(sc.map.lanelets.size() == 2);
  CHECK(sc.map.lanelets[0].id == "l1");
  CHECK(sc.map.lanelets[0].width == doctest::Approx(4.0));
  CHECK(sc.map.lanelets[0].centerline[0].y == doctest::Approx(0.0));
  CHECK(sc.map.lanelets[0].successors == std::vector<std::string>{"l2"});

  REQUIRE(sc.agents.size() == 2);
  const ScenarioAgent& car = sc.agents[0];
  CHECK(car.id == "car1");
  CHECK(car.initial.length == doctest::Approx(5.2));
  CHECK(car.initial.width == doctest::Approx(2.1));
  CHECK(car.initial.speed == doctest::Approx(8.5));
  CHECK(car.route == std::vector<std::string>{"l1", "l2"});  // inferred, follows successors

  const ScenarioAgent& rock = sc.agents[1];
  CHECK(rock.initial.position.x == doctest::Approx(80.0));
  CHECK(rock.policy.idm.v0 == 0.0);  // static: parked desired speed
  CHECK(rock.route == std::vector<std::string>{"l2"});

  // The planning problem is outside the subset and must be reported, not fatal.
  bool flagged = false;
  for (const auto& w : warnings) {
    if (w.find("planningProblem") != std::string::npos) flagged = true;
  }
  CHECK(flagged);

  // The parsed scenario must simulate.
  const Episode ep = simulate(sc, 1, 40);
  CHECK(ep.agents.size() == 2);
}

TEST_CASE("commonroad subset rejects structural gaps as semantic errors") {
  const char* missing_bound = R"(<commonRoad>
  <lanelet id="l1">
    <leftBound><point><x>0</x><y>2</y></point><point><x>9</x><y>2</y></point></leftBound>
  </lanelet>
</commonRoad>)";
  CHECK_THROWS_AS(parse_scenario(missing_bound, ScenarioFormat::CommonRoadXmlSubset),
                  SemanticError);

  const char* no_state = R"(<commonRoad>
  <dynamicObstacle id="o"><shape/></dynamicObstacle>
</commonRoad>)";
  CHECK_THROWS_AS(parse_scenario(no_state, ScenarioFormat::CommonRoadXmlSubset), SemanticError);

  CHECK_THROWS_AS(parse_scenario("<commonRoad><lanelet id='l'>", // unclosed
                                 ScenarioFormat::CommonRoadXmlSubset),
                  ParseError);
}

TEST_CASE("arbitrary bytes never crash the parsers") {
  const std::uint64_t root = seed_chain(77u, std::string_view("fuzz"));
  int parsed = 0, rejected = 0;
  for (int i = 0; i < 400; ++i) {
    const std::uint64_t s = seed_chain(root, static_cast<std::uint64_t>(i));
    const int len = static_cast<int>(uniform01(seed_chain(s, std::string_view("len"))) * 400);
    std::string text;
    text.reserve(static_cast<std::size_t>(len));
    for (int k = 0; k < len; ++k) {
      const auto w = seed_chain(s, static_cast<std::uint64_t>(k));
      // Mix of printable structure-ish bytes and raw noise.
      const char digits[] = "<>=/ \n\"abclmnst015.-#";
      if (uniform01(w) < 0.7) {
        text += digits[static_cast<std::size_t>(uniform01(seed_chain(w, 1u)) *
                                                (sizeof(digits) - 1))];
      } else {
        text += static_cast<char>(splitmix64(w) & 0xff);
      }
    }
    for (ScenarioFormat fmt : {ScenarioFormat::Native, ScenarioFormat::CommonRoadXmlSubset}) {
      try {
        (void)parse_scenario(text, fmt);
        ++parsed;
      } catch (const ParseError&) {
        ++rejected;
      } catch (const SemanticError&) {
        ++rejected;
      }
      // Anything else escapes and fails the test.
    }
    try {
      (void)parse_episode(text);
    } catch (const ParseError&) {
    } catch (const SemanticError&) {
    }
  }
  CHECK(rejected > 0);
  CHECK(parsed + rejected == 800);
}
