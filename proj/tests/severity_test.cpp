// Injury severity model: calibration anchors, nesting, monotonicity, the
// lexicographic order, per-agent attribution and the JSON override loader.

#include <cstdio>
#include <fstream>
#include <string>

#include "cfmargin/severity.hpp"
#include "doctest.h"

using namespace cfmargin;

namespace {

ContactEvent event(double delta_v, ImpactClass ca, ImpactClass cb) {
  ContactEvent ev;
  ev.step = 10;
  ev.agent_a = 0;
  ev.agent_b = 2;
  ev.delta_v = delta_v;
  ev.class_a = ca;
  ev.class_b = cb;
  return ev;
}

std::string temp_json(const char* tag, const std::string& body) {
  std::string path = "severity_test_" + std::string(tag) + ".json";
  std::ofstream out(path, std::ios::binary);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("default model passes its own validation and hits the anchors") {
  SeverityModel m;
  m.validate();

  // mais2plus at 17 m/s frontal: logit is -5.61 + 0.33 * 17 = 0 exactly.
  CHECK(m.evaluate(17.0, ImpactClass::Front).p_mais2plus == doctest::Approx(0.5).epsilon(1e-12));

  for (ImpactClass c : {ImpactClass::Front, ImpactClass::Side, ImpactClass::Rear}) {
    const SeverityProfile at_rest = m.evaluate(0.0, c);
    CHECK(at_rest.p_fatal < 0.01);
    CHECK(at_rest.p_mais3plus < 0.01);
    CHECK(at_rest.p_mais2plus < 0.01);
  }

  CHECK(m.modifier(ImpactClass::Front) == doctest::Approx(0.0));
  CHECK(m.modifier(ImpactClass::Side) == doctest::Approx(0.6));
  CHECK(m.modifier(ImpactClass::Rear) == doctest::Approx(-0.4));

  // The side modifier raises every level relative to frontal at equal delta-v.
  CHECK(m.evaluate(20.0, ImpactClass::Side).p_mais3plus >
        m.evaluate(20.0, ImpactClass::Front).p_mais3plus);
  CHECK(m.evaluate(20.0, ImpactClass::Rear).p_mais3plus <
        m.evaluate(20.0, ImpactClass::Front).p_mais3plus);
}

TEST_CASE("nesting and delta-v monotonicity hold on the audit grid") {
  const SeverityModel m;
  for (ImpactClass c : {ImpactClass::Front, ImpactClass::Side, ImpactClass::Rear}) {
    SeverityProfile prev{-1.0, -1.0, -1.0};
    for (int i = 0; i <= 120; ++i) {
      const double dv = 0.5 * i;
      const SeverityProfile p = m.evaluate(dv, c);
      CHECK(p.p_fatal <= p.p_mais3plus);
      CHECK(p.p_mais3plus <= p.p_mais2plus);
      CHECK(p.p_fatal >= prev.p_fatal);
      CHECK(p.p_mais3plus >= prev.p_mais3plus);
      CHECK(p.p_mais2plus >= prev.p_mais2plus);
      CHECK(p.p_mais2plus <= 1.0);
      prev = p;
    }
  }
}

TEST_CASE("lex_compare orders by level with tolerance ties advancing") {
  const SeverityProfile a{0.10, 0.30, 0.50};
  const SeverityProfile b{0.20, 0.10, 0.10};
  CHECK(lex_compare(a, b) == -1);  // fatal decides first
  CHECK(lex_compare(b, a) == 1);
  CHECK(lex_compare(a, a) == 0);

  // Fatal within tolerance: mais3plus breaks the tie.
  const SeverityProfile c{0.10 + 1e-9, 0.20, 0.50};
  CHECK(lex_compare(a, c) == 1);
  CHECK(lex_compare(c, a) == -1);

  // All three within tolerance: equal.
  const SeverityProfile d{0.10 + 1e-9, 0.30 - 1e-9, 0.50 + 1e-9};
  CHECK(lex_compare(a, d) == 0);

  // Wider tolerance turns a strict difference into a tie.
  CHECK(lex_compare(a, b, 0.5) == 0);
}

TEST_CASE("severity_of uses the participant's own impact side") {
  const SeverityModel m;
  const ContactEvent ev = event(20.0, ImpactClass::Front, ImpactClass::Side);

  const SeverityProfile for_a = severity_of(ev, 0, m);
  const SeverityProfile for_b = severity_of(ev, 2, m);
  CHECK(for_a.p_mais3plus == doctest::Approx(m.evaluate(20.0, ImpactClass::Front).p_mais3plus));
  CHECK(for_b.p_mais3plus == doctest::Approx(m.evaluate(20.0, ImpactClass::Side).p_mais3plus));
  CHECK(for_b.p_mais3plus > for_a.p_mais3plus);

  CHECK_THROWS_AS(severity_of(ev, 1, m), std::invalid_argument);
}

TEST_CASE("agent_severity picks the worst contact and zeroes non-participants") {
  const SeverityModel m;
  std::vector<ContactEvent> events;
  events.push_back(event(8.0, ImpactClass::Rear, ImpactClass::Front));
  events.push_back(event(25.0, ImpactClass::Side, ImpactClass::Front));

  const SeverityProfile worst = agent_severity(events, 0, m);
  CHECK(worst.p_mais3plus ==
        doctest::Approx(m.evaluate(25.0, ImpactClass::Side).p_mais3plus));

  const SeverityProfile none = agent_severity(events, 5, m);
  CHECK(none.p_fatal == 0.0);
  CHECK(none.p_mais3plus == 0.0);
  CHECK(none.p_mais2plus == 0.0);
}

TEST_CASE("json overrides merge onto defaults and are validated") {
  const std::string path = temp_json(
      "ok", R"({"mais2plus": {"alpha": -6.0, "beta": 0.35}, "mod_side": 0.8})");
  const SeverityModel m = severity_model_from_json_file(path);
  CHECK(m.mais2plus.alpha == doctest::Approx(-6.0));
  CHECK(m.mais2plus.beta == doctest::Approx(0.35));
  CHECK(m.mod_side == doctest::Approx(0.8));
  CHECK(m.fatal.alpha == doctest::Approx(-8.0));    // untouched default
  CHECK(m.mais3plus.beta == doctest::Approx(0.19));  // untouched default
  std::remove(path.c_str());

  // Non-positive slope must fail model validation, not load silently.
  const std::string bad = temp_json("bad", R"({"fatal": {"alpha": -8.0, "beta": 0.0}})");
  CHECK_THROWS_AS(severity_model_from_json_file(bad), std::runtime_error);
  std::remove(bad.c_str());

  // A model that breaks nesting on the grid is rejected too.
  const std::string crossed =
      temp_json("crossed", R"({"fatal": {"alpha": -2.0, "beta": 0.5}})");
  CHECK_THROWS_AS(severity_model_from_json_file(crossed), std::runtime_error);
  std::remove(crossed.c_str());

  CHECK_THROWS_AS(severity_model_from_json_file("no_such_file_severity.json"),
                  std::runtime_error);

  const std::string mangled = temp_json("mangled", "{not json");
  CHECK_THROWS_AS(severity_model_from_json_file(mangled), std::runtime_error);
  std::remove(mangled.c_str());
}
