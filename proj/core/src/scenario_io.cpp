#include "cfmargin/scenario_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cfmargin/geometry.hpp"

namespace cfmargin {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("cannot serialize non-finite value");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

ParseError::ParseError(int line_, int offset_, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line_) + ", offset " + std::to_string(offset_) +
                         ": " + msg),
      line(line_),
      offset(offset_) {}

SemanticError::SemanticError(std::string element_, const std::string& msg)
    : std::runtime_error(element_ + ": " + msg), element(std::move(element_)) {}

// ---------------------------------------------------------------------------
// Shared helpers

namespace {

bool valid_token(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '.' || c == '@' || c == '-';
    if (!ok) return false;
  }
  return true;
}

void require_token(const std::string& s, const char* what) {
  if (!valid_token(s))
    throw std::invalid_argument(std::string(what) + " '" + s + "' is not serializable");
}

std::string lower(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

// ---------------------------------------------------------------------------
// Native format: line records of space-separated key=value fields.

struct Field {
  std::string key;
  std::string value;
  int col = 0;  // of the key, 1-based
};

struct Record {
  std::string type;
  int line = 0;
  std::vector<Field> fields;
  std::string rest;  // free-text records (truncation)
};

/// Field accessor that tracks consumption so unknown keys are rejected.
class Kv {
 public:
  explicit Kv(const Record& r) : r_(r), used_(r.fields.size(), false) {}

  const Field& need(const char* key) {
    for (std::size_t i = 0; i < r_.fields.size(); ++i) {
      if (r_.fields[i].key == key) {
        if (used_[i])
          throw ParseError(r_.line, r_.fields[i].col,
                           "duplicate key '" + std::string(key) + "'");
        used_[i] = true;
        return r_.fields[i];
      }
    }
    throw ParseError(r_.line, 1,
                     "missing key '" + std::string(key) + "' in '" + r_.type + "' record");
  }

  std::string str(const char* key) { return need(key).value; }

  double f64(const char* key) {
    const Field& f = need(key);
    double v = 0.0;
    const char* b = f.value.data();
    const char* e = b + f.value.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e || !std::isfinite(v))
      throw ParseError(r_.line, value_col(f), "bad number '" + f.value + "'");
    return v;
  }

  std::uint64_t u64(const char* key) {
    const Field& f = need(key);
    std::uint64_t v = 0;
    const char* b = f.value.data();
    const char* e = b + f.value.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e)
      throw ParseError(r_.line, value_col(f), "bad integer '" + f.value + "'");
    return v;
  }

  int i32(const char* key) {
    const Field& f = need(key);
    int v = 0;
    const char* b = f.value.data();
    const char* e = b + f.value.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e)
      throw ParseError(r_.line, value_col(f), "bad integer '" + f.value + "'");
    return v;
  }

  /// Comma list; "-" encodes empty.
  std::vector<std::string> list(const char* key) {
    const Field& f = need(key);
    std::vector<std::string> out;
    if (f.value == "-") return out;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = f.value.find(',', start);
      const std::string item = f.value.substr(start, comma - start);
      if (item.empty()) throw ParseError(r_.line, value_col(f), "empty list item");
      out.push_back(item);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  /// Pipe list of x:y pairs.
  std::vector<Vec2> points(const char* key) {
    const Field& f = need(key);
    std::vector<Vec2> out;
    if (f.value == "-") return out;
    for (const std::string& item : split_pipe(f)) {
      const std::size_t colon = item.find(':');
      if (colon == std::string::npos)
        throw ParseError(r_.line, value_col(f), "expected x:y pair, got '" + item + "'");
      out.push_back({pair_num(f, item.substr(0, colon)), pair_num(f, item.substr(colon + 1))});
    }
    return out;
  }

  std::vector<SignalPhase> phases(const char* key) {
    const Field& f = need(key);
    std::vector<SignalPhase> out;
    if (f.value == "-") return out;
    for (const std::string& item : split_pipe(f)) {
      const std::size_t colon = item.find(':');
      if (colon == std::string::npos)
        throw ParseError(r_.line, value_col(f), "expected state:duration, got '" + item + "'");
      out.push_back({light_from(f, item.substr(0, colon)), pair_num(f, item.substr(colon + 1))});
    }
    return out;
  }

  std::vector<LightState> lights(const char* key) {
    const Field& f = need(key);
    std::vector<LightState> out;
    if (f.value == "-") return out;
    for (const std::string& item : split_pipe(f)) out.push_back(light_from(f, item));
    return out;
  }

  void done() const {
    for (std::size_t i = 0; i < r_.fields.size(); ++i) {
      if (!used_[i])
        throw ParseError(r_.line, r_.fields[i].col,
                         "unknown key '" + r_.fields[i].key + "' in '" + r_.type + "' record");
    }
  }

 private:
  int value_col(const Field& f) const { return f.col + static_cast<int>(f.key.size()) + 1; }

  std::vector<std::string> split_pipe(const Field& f) const {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const std::size_t bar = f.value.find('|', start);
      const std::string item = f.value.substr(start, bar - start);
      if (item.empty()) throw ParseError(r_.line, value_col(f), "empty list item");
      out.push_back(item);
      if (bar == std::string::npos) break;
      start = bar + 1;
    }
    return out;
  }

  double pair_num(const Field& f, const std::string& s) const {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
      throw ParseError(r_.line, value_col(f), "bad number '" + s + "'");
    return v;
  }

  LightState light_from(const Field& f, const std::string& s) const {
    if (s == "r") return LightState::Red;
    if (s == "g") return LightState::Green;
    throw ParseError(r_.line, value_col(f), "bad light state '" + s + "'");
  }

  const Record& r_;
  std::vector<bool> used_;
};

std::vector<Record> tokenize_native(const std::string& text, const char* version) {
  std::vector<Record> records;
  bool version_seen = false;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t next = eol + 1;
    ++lineno;

    if (line.empty() || line[0] == '#') {
      if (eol == text.size()) break;
      pos = next;
      continue;
    }
    if (!version_seen) {
      if (line != version)
        throw ParseError(lineno, 1, "expected header '" + std::string(version) + "'");
      version_seen = true;
      pos = next;
      if (eol == text.size()) break;
      continue;
    }

    Record rec;
    rec.line = lineno;
    std::size_t i = 0;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    rec.type = line.substr(0, i);

    if (rec.type == "truncation") {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      rec.rest = line.substr(i);
    } else {
      while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        const std::string tok = line.substr(start, i - start);
        const std::size_t eq = tok.find('=');
        if (eq == std::string::npos || eq == 0)
          throw ParseError(lineno, static_cast<int>(start) + 1,
                           "expected key=value, got '" + tok + "'");
        Field f;
        f.key = tok.substr(0, eq);
        f.value = tok.substr(eq + 1);
        f.col = static_cast<int>(start) + 1;
        if (f.value.empty())
          throw ParseError(lineno, f.col, "empty value for key '" + f.key + "'");
        rec.fields.push_back(std::move(f));
      }
    }
    records.push_back(std::move(rec));
    if (eol == text.size()) break;
    pos = next;
  }
  if (!version_seen) throw ParseError(1, 1, "expected header '" + std::string(version) + "'");
  return records;
}

// Record builders shared by the scenario and episode parsers.

Lanelet parse_lanelet_record(const Record& r) {
  Kv kv(r);
  Lanelet l;
  l.id = kv.str("id");
  l.width = kv.f64("width");
  l.successors = kv.list("successors");
  l.centerline = kv.points("points");
  kv.done();
  return l;
}

Signal parse_signal_record(const Record& r) {
  Kv kv(r);
  Signal s;
  s.id = kv.str("id");
  const std::string kind = kv.str("kind");
  if (kind == "stop_sign") {
    s.kind = SignalKind::StopSign;
  } else if (kind == "traffic_light") {
    s.kind = SignalKind::TrafficLight;
  } else {
    throw ParseError(r.line, 1, "unknown signal kind '" + kind + "'");
  }
  s.lanelet = kv.str("lanelet");
  s.stop_arclength = kv.f64("stop");
  s.phases = kv.phases("phases");
  kv.done();
  return s;
}

/// Fields common to scenario and episode agent records.
void parse_agent_common(Kv& kv, PolicySpec* policy, KinematicModel* kin,
                        std::vector<std::string>* route) {
  policy->name = kv.str("policy");
  policy->idm.v0 = kv.f64("v0");
  policy->idm.headway = kv.f64("headway");
  policy->idm.s0 = kv.f64("s0");
  policy->idm.a = kv.f64("accel");
  policy->idm.b = kv.f64("decel");
  policy->idm.exponent = kv.f64("exponent");
  policy->idm.lambda = kv.f64("lambda");
  kin->wheelbase = kv.f64("wheelbase");
  kin->a_min = kv.f64("a_min");
  kin->a_max = kv.f64("a_max");
  kin->omega_min = kv.f64("omega_min");
  kin->omega_max = kv.f64("omega_max");
  kin->delta_max = kv.f64("delta_max");
  kin->v_max = kv.f64("v_max");
  *route = kv.list("route");
}

// Writer pieces. Single-space separators and %.9g floats make the output
// canonical: parse-then-write is a byte-exact fixed point.

void put(std::string& out, const char* key, const std::string& v) {
  out += ' ';
  out += key;
  out += '=';
  out += v;
}

void put_f(std::string& out, const char* key, double v) { put(out, key, format_double(v)); }

std::string join_list(const std::vector<std::string>& xs, const char* what) {
  if (xs.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require_token(xs[i], what);
    if (i) out += ',';
    out += xs[i];
  }
  return out;
}

std::string join_points(const std::vector<Vec2>& pts) {
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += '|';
    out += format_double(pts[i].x);
    out += ':';
    out += format_double(pts[i].y);
  }
  return out.empty() ? "-" : out;
}

std::string join_phases(const std::vector<SignalPhase>& phases) {
  std::string out;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (i) out += '|';
    out += phases[i].state == LightState::Red ? 'r' : 'g';
    out += ':';
    out += format_double(phases[i].duration);
  }
  return out.empty() ? "-" : out;
}

void write_lanelet(std::string& out, const Lanelet& l) {
  require_token(l.id, "lanelet id");
  out += "lanelet";
  put(out, "id", l.id);
  put_f(out, "width", l.width);
  put(out, "successors", join_list(l.successors, "lanelet id"));
  put(out, "points", join_points(l.centerline));
  out += '\n';
}

void write_signal(std::string& out, const Signal& s) {
  require_token(s.id, "signal id");
  require_token(s.lanelet, "lanelet id");
  out += "signal";
  put(out, "id", s.id);
  put(out, "kind", s.kind == SignalKind::StopSign ? "stop_sign" : "traffic_light");
  put(out, "lanelet", s.lanelet);
  put_f(out, "stop", s.stop_arclength);
  put(out, "phases", join_phases(s.phases));
  out += '\n';
}

void write_agent_common(std::string& out, const PolicySpec& policy, const KinematicModel& kin) {
  require_token(policy.name, "policy name");
  put(out, "policy", policy.name);
  put_f(out, "v0", policy.idm.v0);
  put_f(out, "headway", policy.idm.headway);
  put_f(out, "s0", policy.idm.s0);
  put_f(out, "accel", policy.idm.a);
  put_f(out, "decel", policy.idm.b);
  put_f(out, "exponent", policy.idm.exponent);
  put_f(out, "lambda", policy.idm.lambda);
  put_f(out, "wheelbase", kin.wheelbase);
  put_f(out, "a_min", kin.a_min);
  put_f(out, "a_max", kin.a_max);
  put_f(out, "omega_min", kin.omega_min);
  put_f(out, "omega_max", kin.omega_max);
  put_f(out, "delta_max", kin.delta_max);
  put_f(out, "v_max", kin.v_max);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenario: native

namespace {

ScenarioFile parse_native_scenario(const std::string& text) {
  ScenarioFile sc;
  bool scenario_seen = false;
  for (const Record& r : tokenize_native(text, "cfmargin_scenario_v1")) {
    if (r.type == "scenario") {
      if (scenario_seen) throw ParseError(r.line, 1, "duplicate 'scenario' record");
      scenario_seen = true;
      Kv kv(r);
      sc.id = kv.str("id");
      sc.duration = kv.f64("duration");
      sc.dt = kv.f64("dt");
      sc.seed = kv.u64("seed");
      kv.done();
    } else if (r.type == "lanelet") {
      sc.map.lanelets.push_back(parse_lanelet_record(r));
    } else if (r.type == "signal") {
      sc.map.signals.push_back(parse_signal_record(r));
    } else if (r.type == "agent") {
      Kv kv(r);
      ScenarioAgent a;
      a.id = kv.str("id");
      parse_agent_common(kv, &a.policy, &a.kinematics, &a.route);
      a.initial.length = kv.f64("length");
      a.initial.width = kv.f64("width");
      a.initial.position.x = kv.f64("x");
      a.initial.position.y = kv.f64("y");
      a.initial.heading = kv.f64("heading");
      a.initial.speed = kv.f64("speed");
      a.initial.steer = kv.f64("steer");
      kv.done();
      sc.agents.push_back(std::move(a));
    } else {
      throw ParseError(r.line, 1, "unknown record type '" + r.type + "'");
    }
  }
  if (!scenario_seen) throw ParseError(1, 1, "missing 'scenario' record");
  validate_scenario(sc);
  return sc;
}

}  // namespace

std::string write_scenario(const ScenarioFile& sc) {
  require_token(sc.id, "scenario id");
  std::string out = "cfmargin_scenario_v1\n";
  out += "scenario";
  put(out, "id", sc.id);
  put_f(out, "duration", sc.duration);
  put_f(out, "dt", sc.dt);
  put(out, "seed", std::to_string(sc.seed));
  out += '\n';
  for (const auto& l : sc.map.lanelets) write_lanelet(out, l);
  for (const auto& s : sc.map.signals) write_signal(out, s);
  for (const auto& a : sc.agents) {
    require_token(a.id, "agent id");
    out += "agent";
    put(out, "id", a.id);
    write_agent_common(out, a.policy, a.kinematics);
    put_f(out, "length", a.initial.length);
    put_f(out, "width", a.initial.width);
    put_f(out, "x", a.initial.position.x);
    put_f(out, "y", a.initial.position.y);
    put_f(out, "heading", a.initial.heading);
    put_f(out, "speed", a.initial.speed);
    put_f(out, "steer", a.initial.steer);
    put(out, "route", join_list(a.route, "lanelet id"));
    out += '\n';
  }
  return out;
}

void save_scenario(const ScenarioFile& sc, const std::string& path) {
  write_file(path, write_scenario(sc));
}

// ---------------------------------------------------------------------------
// Scenario validation

namespace {

void check_map(const LaneNetwork& map) {
  std::set<std::string> lane_ids, signal_ids;
  for (const auto& l : map.lanelets) {
    const std::string el = "lanelet '" + l.id + "'";
    if (!lane_ids.insert(l.id).second) throw SemanticError(el, "duplicate id");
    if (l.centerline.size() < 2) throw SemanticError(el, "centerline needs at least 2 points");
    if (!(l.width > 0.0)) throw SemanticError(el, "width must be > 0");
    for (const auto& p : l.centerline) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw SemanticError(el, "non-finite centerline point");
    }
    if (!(l.arclength() > 0.0)) throw SemanticError(el, "centerline has zero length");
  }
  for (const auto& l : map.lanelets) {
    for (const auto& succ : l.successors) {
      if (!map.find_lanelet(succ))
        throw SemanticError("lanelet '" + l.id + "'", "unresolved lanelet id '" + succ + "'");
    }
  }
  for (const auto& s : map.signals) {
    const std::string el = "signal '" + s.id + "'";
    if (!signal_ids.insert(s.id).second) throw SemanticError(el, "duplicate id");
    const Lanelet* l = map.find_lanelet(s.lanelet);
    if (!l) throw SemanticError(el, "unresolved lanelet id '" + s.lanelet + "'");
    if (s.stop_arclength < 0.0 || s.stop_arclength > l->arclength() + 1e-9)
      throw SemanticError(el, "stop line outside lanelet arclength");
    for (const auto& p : s.phases) {
      if (!(p.duration > 0.0)) throw SemanticError(el, "phase duration must be > 0");
    }
    if (s.kind == SignalKind::TrafficLight && s.phases.empty())
      throw SemanticError(el, "traffic light needs at least one phase");
  }
}

void check_route(const LaneNetwork& map, const std::string& element,
                 const std::vector<std::string>& route, bool require_connected) {
  for (const auto& id : route) {
    if (!map.find_lanelet(id)) throw SemanticError(element, "unresolved lanelet id '" + id + "'");
  }
  if (!require_connected) return;
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    const Lanelet* l = map.find_lanelet(route[i]);
    if (std::find(l->successors.begin(), l->successors.end(), route[i + 1]) ==
        l->successors.end()) {
      throw SemanticError(element,
                          "route break between '" + route[i] + "' and '" + route[i + 1] + "'");
    }
  }
}

void check_agent_params(const std::string& element, const PolicySpec& policy,
                        const KinematicModel& kin) {
  if (!(kin.wheelbase > 0.0)) throw SemanticError(element, "wheelbase must be > 0");
  if (!(kin.a_min < 0.0 && kin.a_max > 0.0))
    throw SemanticError(element, "acceleration bounds must straddle zero");
  if (!(kin.omega_min < 0.0 && kin.omega_max > 0.0))
    throw SemanticError(element, "steer rate bounds must straddle zero");
  if (!(kin.delta_max > 0.0)) throw SemanticError(element, "delta_max must be > 0");
  if (!(kin.v_max > 0.0)) throw SemanticError(element, "v_max must be > 0");
  const IdmParams& p = policy.idm;
  if (!(p.a > 0.0) || !(p.b > 0.0))
    throw SemanticError(element, "idm accelerations must be > 0");
  if (p.v0 < 0.0 || p.headway < 0.0 || p.s0 < 0.0)
    throw SemanticError(element, "idm parameters must be >= 0");
  if (!(p.exponent > 0.0)) throw SemanticError(element, "idm exponent must be > 0");
  if (p.lambda < 0.0 || p.lambda > 1.0)
    throw SemanticError(element, "lambda must be within [0, 1]");
}

}  // namespace

void validate_scenario(const ScenarioFile& sc) {
  const std::string el_sc = "scenario '" + sc.id + "'";
  if (!(sc.duration > 0.0)) throw SemanticError(el_sc, "duration must be > 0");
  if (!(sc.dt > 0.0)) throw SemanticError(el_sc, "timestep must be > 0");
  check_map(sc.map);
  std::set<std::string> agent_ids;
  for (const auto& a : sc.agents) {
    const std::string el = "agent '" + a.id + "'";
    if (!agent_ids.insert(a.id).second) throw SemanticError(el, "duplicate id");
    check_route(sc.map, el, a.route, true);
    check_agent_params(el, a.policy, a.kinematics);
    const AgentState& s = a.initial;
    if (!std::isfinite(s.position.x) || !std::isfinite(s.position.y) ||
        !std::isfinite(s.heading) || !std::isfinite(s.speed) || !std::isfinite(s.steer))
      throw SemanticError(el, "non-finite initial state");
    if (s.speed < 0.0) throw SemanticError(el, "negative initial speed");
    if (!(s.length > 0.0) || !(s.width > 0.0))
      throw SemanticError(el, "footprint dimensions must be > 0");
    if (std::abs(s.steer) > a.kinematics.delta_max + 1e-9)
      throw SemanticError(el, "initial steering angle exceeds delta_max");
  }
}

// ---------------------------------------------------------------------------
// Episode: native

std::string write_episode(const Episode& e) {
  require_token(e.id, "episode id");
  std::string out = "cfmargin_episode_v1\n";
  out += "episode";
  put(out, "id", e.id);
  put(out, "horizon", std::to_string(e.horizon));
  put_f(out, "dt", e.dt);
  put(out, "seed", std::to_string(e.seed));
  out += '\n';
  if (e.truncation) {
    std::string reason = *e.truncation;
    for (char& c : reason) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    out += "truncation";
    if (!reason.empty()) {
      out += ' ';
      out += reason;
    }
    out += '\n';
  }
  for (const auto& l : e.map.lanelets) write_lanelet(out, l);
  for (const auto& s : e.map.signals) write_signal(out, s);
  for (const auto& a : e.agents) {
    require_token(a.id, "agent id");
    if (a.states.empty()) throw std::invalid_argument("agent '" + a.id + "' has no states");
    out += "agent";
    put(out, "id", a.id);
    write_agent_common(out, a.policy, a.kinematics);
    put_f(out, "length", a.states.front().length);
    put_f(out, "width", a.states.front().width);
    put(out, "route", join_list(a.route, "lanelet id"));
    out += '\n';
  }
  if (!e.map.signals.empty()) {
    for (std::size_t k = 0; k < e.signal_states.size(); ++k) {
      out += "signalstate";
      put(out, "step", std::to_string(k));
      std::string states;
      for (std::size_t j = 0; j < e.signal_states[k].size(); ++j) {
        if (j) states += '|';
        states += e.signal_states[k][j] == LightState::Red ? 'r' : 'g';
      }
      put(out, "states", states.empty() ? "-" : states);
      out += '\n';
    }
  }
  for (int k = 0; k <= e.horizon; ++k) {
    for (const auto& a : e.agents) {
      if (static_cast<std::size_t>(k) >= a.states.size()) continue;
      const AgentState& s = a.states[static_cast<std::size_t>(k)];
      out += "state";
      put(out, "step", std::to_string(k));
      put(out, "agent", a.id);
      put_f(out, "x", s.position.x);
      put_f(out, "y", s.position.y);
      put_f(out, "heading", s.heading);
      put_f(out, "speed", s.speed);
      put_f(out, "steer", s.steer);
      out += '\n';
    }
  }
  return out;
}

Episode parse_episode(const std::string& text) {
  Episode e;
  bool episode_seen = false;
  bool truncation_seen = false;
  std::vector<std::vector<bool>> state_seen;
  std::vector<bool> row_seen;
  std::map<std::string, std::size_t> agent_index;

  auto require_header = [&](const Record& r) {
    if (!episode_seen)
      throw ParseError(r.line, 1, "'" + r.type + "' record before 'episode' record");
  };

  for (const Record& r : tokenize_native(text, "cfmargin_episode_v1")) {
    if (r.type == "episode") {
      if (episode_seen) throw ParseError(r.line, 1, "duplicate 'episode' record");
      episode_seen = true;
      Kv kv(r);
      e.id = kv.str("id");
      e.horizon = kv.i32("horizon");
      e.dt = kv.f64("dt");
      e.seed = kv.u64("seed");
      kv.done();
      if (e.horizon < 1)
        throw SemanticError("episode '" + e.id + "'", "horizon must be >= 1");
      row_seen.assign(static_cast<std::size_t>(e.horizon) + 1, false);
      e.signal_states.assign(static_cast<std::size_t>(e.horizon) + 1, {});
    } else if (r.type == "truncation") {
      if (truncation_seen) throw ParseError(r.line, 1, "duplicate 'truncation' record");
      truncation_seen = true;
      e.truncation = r.rest;
    } else if (r.type == "lanelet") {
      e.map.lanelets.push_back(parse_lanelet_record(r));
    } else if (r.type == "signal") {
      e.map.signals.push_back(parse_signal_record(r));
    } else if (r.type == "agent") {
      require_header(r);
      Kv kv(r);
      AgentRecord a;
      a.id = kv.str("id");
      parse_agent_common(kv, &a.policy, &a.kinematics, &a.route);
      AgentState proto;
      proto.length = kv.f64("length");
      proto.width = kv.f64("width");
      kv.done();
      if (agent_index.count(a.id))
        throw SemanticError("agent '" + a.id + "'", "duplicate id");
      a.states.assign(static_cast<std::size_t>(e.horizon) + 1, proto);
      agent_index[a.id] = e.agents.size();
      e.agents.push_back(std::move(a));
      state_seen.emplace_back(static_cast<std::size_t>(e.horizon) + 1, false);
    } else if (r.type == "signalstate") {
      require_header(r);
      Kv kv(r);
      const int step = kv.i32("step");
      auto states = kv.lights("states");
      kv.done();
      if (step < 0 || step > e.horizon)
        throw SemanticError("episode '" + e.id + "'",
                            "signalstate step " + std::to_string(step) + " out of range");
      if (row_seen[static_cast<std::size_t>(step)])
        throw SemanticError("episode '" + e.id + "'",
                            "duplicate signalstate for step " + std::to_string(step));
      row_seen[static_cast<std::size_t>(step)] = true;
      e.signal_states[static_cast<std::size_t>(step)] = std::move(states);
    } else if (r.type == "state") {
      require_header(r);
      Kv kv(r);
      const int step = kv.i32("step");
      const std::string agent = kv.str("agent");
      const double x = kv.f64("x");
      const double y = kv.f64("y");
      const double heading = kv.f64("heading");
      const double speed = kv.f64("speed");
      const double steer = kv.f64("steer");
      kv.done();
      auto it = agent_index.find(agent);
      if (it == agent_index.end())
        throw SemanticError("agent '" + agent + "'", "state record for unknown agent");
      if (step < 0 || step > e.horizon)
        throw SemanticError("agent '" + agent + "'",
                            "state step " + std::to_string(step) + " out of range");
      const std::size_t k = static_cast<std::size_t>(step);
      if (state_seen[it->second][k])
        throw SemanticError("agent '" + agent + "'",
                            "duplicate state for step " + std::to_string(step));
      state_seen[it->second][k] = true;
      AgentState& s = e.agents[it->second].states[k];
      s.position = {x, y};
      s.heading = heading;
      s.speed = speed;
      s.steer = steer;
    } else {
      throw ParseError(r.line, 1, "unknown record type '" + r.type + "'");
    }
  }
  if (!episode_seen) throw ParseError(1, 1, "missing 'episode' record");

  for (std::size_t i = 0; i < e.agents.size(); ++i) {
    for (std::size_t k = 0; k < state_seen[i].size(); ++k) {
      if (!state_seen[i][k])
        throw SemanticError("agent '" + e.agents[i].id + "'",
                            "missing state for step " + std::to_string(k));
    }
  }
  if (!e.map.signals.empty()) {
    for (std::size_t k = 0; k < row_seen.size(); ++k) {
      if (!row_seen[k])
        throw SemanticError("episode '" + e.id + "'",
                            "missing signalstate for step " + std::to_string(k));
      if (e.signal_states[k].size() != e.map.signals.size())
        throw SemanticError("episode '" + e.id + "'",
                            "signalstate width must equal signal count");
    }
  } else {
    for (bool seen : row_seen) {
      if (seen)
        throw SemanticError("episode '" + e.id + "'", "signalstate without declared signals");
    }
  }

  check_map(e.map);
  for (const auto& a : e.agents) {
    check_route(e.map, "agent '" + a.id + "'", a.route, false);
    check_agent_params("agent '" + a.id + "'", a.policy, a.kinematics);
  }
  const auto violations = validate_episode(e);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    const std::string element =
        v.agent.empty() ? "episode '" + e.id + "'" : "agent '" + v.agent + "'";
    throw SemanticError(element, v.message);
  }
  return e;
}

Episode load_episode(const std::string& path) { return parse_episode(read_file(path)); }

void save_episode(const Episode& e, const std::string& path) {
  write_file(path, write_episode(e));
}

// ---------------------------------------------------------------------------
// Minimal XML reader for the CommonRoad subset. Iterative tokenizer with a
// bounded element stack; every malformed input maps to ParseError.

namespace {

struct XmlNode {
  std::string name;  // local name, namespace prefix stripped
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<XmlNode> children;
  std::string text;
};

class XmlParser {
 public:
  explicit XmlParser(const std::string& s) : s_(s) {}

  XmlNode parse_document() {
    XmlNode root;
    bool have_root = false;
    skip_misc();
    while (pos_ < s_.size()) {
      if (have_root) {
        skip_misc();
        if (pos_ < s_.size()) fail(pos_, "content after document root");
        break;
      }
      root = parse_element(0);
      have_root = true;
      skip_misc();
    }
    if (!have_root) fail(pos_, "no root element");
    return root;
  }

 private:
  static constexpr int kMaxDepth = 64;

  [[noreturn]] void fail(std::size_t at, const std::string& msg) const {
    int line = 1;
    std::size_t bol = 0;
    const std::size_t stop = std::min(at, s_.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (s_[i] == '\n') {
        ++line;
        bol = i + 1;
      }
    }
    throw ParseError(line, static_cast<int>(stop - bol) + 1, msg);
  }

  bool starts_with(const char* prefix) const {
    const std::size_t n = std::string::traits_type::length(prefix);
    return s_.compare(pos_, n, prefix) == 0;
  }

  void skip_ws() {
    while (pos_ < s_.size() &&
           (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
      ++pos_;
  }

  /// Whitespace, comments, processing instructions, DOCTYPE.
  void skip_misc() {
    while (true) {
      skip_ws();
      if (starts_with("<?")) {
        skip_until("?>", "unterminated processing instruction");
      } else if (starts_with("<!--")) {
        skip_until("-->", "unterminated comment");
      } else if (starts_with("<!")) {
        skip_doctype();
      } else {
        return;
      }
    }
  }

  void skip_until(const char* end, const char* err) {
    const std::size_t at = pos_;
    const std::size_t found = s_.find(end, pos_);
    if (found == std::string::npos) fail(at, err);
    pos_ = found + std::string::traits_type::length(end);
  }

  void skip_doctype() {
    const std::size_t at = pos_;
    pos_ += 2;
    int bracket = 0;
    while (pos_ < s_.size()) {
      const char c = s_[pos_++];
      if (c == '[') ++bracket;
      if (c == ']' && bracket > 0) --bracket;
      if (c == '>' && bracket == 0) return;
    }
    fail(at, "unterminated '<!' section");
  }

  static bool name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == ':' || c == '-' || c == '.';
  }

  std::string parse_name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && name_char(s_[pos_])) ++pos_;
    if (pos_ == start) fail(start, "malformed tag name");
    return s_.substr(start, pos_ - start);
  }

  static std::string local_name(const std::string& raw) {
    const std::size_t colon = raw.rfind(':');
    return colon == std::string::npos ? raw : raw.substr(colon + 1);
  }

  std::string decode(const std::string& raw, std::size_t abs_start) {
    if (raw.find('&') == std::string::npos) return raw;
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out += raw[i];
        continue;
      }
      const std::size_t semi = raw.find(';', i);
      if (semi == std::string::npos || semi - i > 12) fail(abs_start + i, "bad entity");
      const std::string ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") {
        out += '&';
      } else if (ent == "lt") {
        out += '<';
      } else if (ent == "gt") {
        out += '>';
      } else if (ent == "quot") {
        out += '"';
      } else if (ent == "apos") {
        out += '\'';
      } else if (!ent.empty() && ent[0] == '#') {
        long code = 0;
        const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
        const std::string digits = ent.substr(hex ? 2 : 1);
        if (digits.empty()) fail(abs_start + i, "bad character reference");
        for (char c : digits) {
          int d = -1;
          if (c >= '0' && c <= '9') d = c - '0';
          else if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
          else if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
          if (d < 0) fail(abs_start + i, "bad character reference");
          code = code * (hex ? 16 : 10) + d;
          if (code > 0x10FFFF) fail(abs_start + i, "character reference out of range");
        }
        append_utf8(out, static_cast<unsigned long>(code));
      } else {
        fail(abs_start + i, "unknown entity '&" + ent + ";'");
      }
      i = semi;
    }
    return out;
  }

  static void append_utf8(std::string& out, unsigned long c) {
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else if (c < 0x800) {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x10000) {
      out += static_cast<char>(0xE0 | (c >> 12));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (c >> 18));
      out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }

  XmlNode parse_element(int depth) {
    if (depth > kMaxDepth) fail(pos_, "nesting too deep");
    const std::size_t open_at = pos_;
    if (pos_ >= s_.size() || s_[pos_] != '<') fail(pos_, "expected '<'");
    ++pos_;
    const std::string raw_name = parse_name();
    XmlNode node;
    node.name = local_name(raw_name);

    // Attributes
    while (true) {
      skip_ws();
      if (pos_ >= s_.size()) fail(open_at, "unexpected end of input inside tag");
      if (s_[pos_] == '>') {
        ++pos_;
        break;
      }
      if (starts_with("/>")) {
        pos_ += 2;
        return node;
      }
      const std::size_t attr_at = pos_;
      const std::string attr_raw = parse_name();
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != '=') fail(attr_at, "expected '=' after attribute name");
      ++pos_;
      skip_ws();
      if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\''))
        fail(pos_, "expected quoted attribute value");
      const char quote = s_[pos_++];
      const std::size_t vstart = pos_;
      const std::size_t vend = s_.find(quote, pos_);
      if (vend == std::string::npos) fail(vstart, "unterminated attribute value");
      std::string value = decode(s_.substr(vstart, vend - vstart), vstart);
      pos_ = vend + 1;
      if (attr_raw == "xmlns" || attr_raw.rfind("xmlns:", 0) == 0) continue;
      node.attrs.emplace_back(local_name(attr_raw), std::move(value));
    }

    // Content
    while (true) {
      if (pos_ >= s_.size()) fail(open_at, "unterminated element '" + node.name + "'");
      if (s_[pos_] != '<') {
        const std::size_t tstart = pos_;
        const std::size_t lt = s_.find('<', pos_);
        if (lt == std::string::npos) fail(open_at, "unterminated element '" + node.name + "'");
        node.text += decode(s_.substr(tstart, lt - tstart), tstart);
        pos_ = lt;
        continue;
      }
      if (starts_with("</")) {
        pos_ += 2;
        const std::size_t close_at = pos_;
        const std::string close = parse_name();
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != '>') fail(close_at, "malformed closing tag");
        ++pos_;
        if (close != raw_name)
          fail(close_at, "mismatched closing tag '" + close + "' for '" + raw_name + "'");
        return node;
      }
      if (starts_with("<!--")) {
        skip_until("-->", "unterminated comment");
      } else if (starts_with("<![CDATA[")) {
        const std::size_t at = pos_;
        pos_ += 9;
        const std::size_t end = s_.find("]]>", pos_);
        if (end == std::string::npos) fail(at, "unterminated CDATA section");
        node.text.append(s_, pos_, end - pos_);
        pos_ = end + 3;
      } else if (starts_with("<?")) {
        skip_until("?>", "unterminated processing instruction");
      } else if (starts_with("<!")) {
        skip_doctype();
      } else {
        node.children.push_back(parse_element(depth + 1));
      }
    }
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// CommonRoad subset reader

namespace {

bool iequals(const std::string& a, const char* b) { return lower(a) == b; }

const XmlNode* find_child(const XmlNode& n, const char* name) {
  for (const auto& c : n.children) {
    if (iequals(c.name, name)) return &c;
  }
  return nullptr;
}

std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

const std::string* find_attr(const XmlNode& n, const char* name) {
  for (const auto& [k, v] : n.attrs) {
    if (iequals(k, name)) return &v;
  }
  return nullptr;
}

std::optional<double> text_number(const XmlNode& n) {
  const std::string t = trimmed(n.text);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

/// Direct text, or an exactValue child (the CommonRoad interval-or-exact
/// pattern). Intervals are out of the subset.
std::optional<double> scalar_value(const XmlNode& n) {
  if (auto v = text_number(n)) return v;
  if (const XmlNode* exact = find_child(n, "exactvalue")) return text_number(*exact);
  return std::nullopt;
}

std::string sanitize_token(const std::string& raw, const char* fallback) {
  std::string out;
  for (char c : raw) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '.' || c == '@' || c == '-';
    out += ok ? c : '_';
  }
  if (out.empty()) out = fallback;
  return out;
}

class Warnings {
 public:
  explicit Warnings(std::vector<std::string>* sink) : sink_(sink) {}
  void add(const std::string& msg) {
    if (sink_ && seen_.insert(msg).second) sink_->push_back(msg);
  }

 private:
  std::vector<std::string>* sink_;
  std::set<std::string> seen_;
};

std::vector<Vec2> bound_points(const XmlNode& bound, const std::string& element) {
  std::vector<Vec2> pts;
  for (const auto& c : bound.children) {
    if (!iequals(c.name, "point")) continue;
    const XmlNode* x = find_child(c, "x");
    const XmlNode* y = find_child(c, "y");
    if (!x || !y) throw SemanticError(element, "bound point missing x or y");
    const auto xv = text_number(*x);
    const auto yv = text_number(*y);
    if (!xv || !yv) throw SemanticError(element, "bad point coordinate");
    pts.push_back({*xv, *yv});
  }
  return pts;
}

Lanelet read_cr_lanelet(const XmlNode& n, Warnings& warn) {
  const std::string* id = find_attr(n, "id");
  if (!id) throw SemanticError("lanelet", "missing id attribute");
  Lanelet l;
  l.id = sanitize_token(*id, "lanelet");
  const std::string element = "lanelet '" + l.id + "'";

  const XmlNode* left = nullptr;
  const XmlNode* right = nullptr;
  for (const auto& c : n.children) {
    if (iequals(c.name, "leftbound")) {
      left = &c;
    } else if (iequals(c.name, "rightbound")) {
      right = &c;
    } else if (iequals(c.name, "successor")) {
      const std::string* ref = find_attr(c, "ref");
      if (!ref) throw SemanticError(element, "successor missing ref attribute");
      l.successors.push_back(sanitize_token(*ref, "lanelet"));
    } else {
      warn.add("lanelet: ignored element '" + c.name + "'");
    }
  }
  if (!left || !right) throw SemanticError(element, "missing leftBound or rightBound");
  const auto lp = bound_points(*left, element);
  const auto rp = bound_points(*right, element);
  if (lp.size() < 2 || rp.size() < 2)
    throw SemanticError(element, "bounds need at least 2 points");
  if (lp.size() != rp.size())
    warn.add(element + ": bound point counts differ, pairing up to the shorter");
  const std::size_t n_pts = std::min(lp.size(), rp.size());
  double width_sum = 0.0;
  for (std::size_t i = 0; i < n_pts; ++i) {
    l.centerline.push_back((lp[i] + rp[i]) * 0.5);
    width_sum += (lp[i] - rp[i]).norm();
  }
  l.width = width_sum / static_cast<double>(n_pts);
  return l;
}

ScenarioAgent read_cr_obstacle(const XmlNode& n, bool is_static, Warnings& warn) {
  const std::string* id = find_attr(n, "id");
  if (!id) throw SemanticError("obstacle", "missing id attribute");
  ScenarioAgent a;
  a.id = sanitize_token(*id, "obstacle");
  const std::string element = "obstacle '" + a.id + "'";

  const XmlNode* initial = nullptr;
  for (const auto& c : n.children) {
    if (iequals(c.name, "initialstate")) {
      initial = &c;
    } else if (iequals(c.name, "shape")) {
      if (const XmlNode* rect = find_child(c, "rectangle")) {
        const XmlNode* len = find_child(*rect, "length");
        const XmlNode* wid = find_child(*rect, "width");
        if (len) {
          const auto v = text_number(*len);
          if (!v) throw SemanticError(element, "bad rectangle length");
          a.initial.length = *v;
        }
        if (wid) {
          const auto v = text_number(*wid);
          if (!v) throw SemanticError(element, "bad rectangle width");
          a.initial.width = *v;
        }
      } else {
        warn.add(element + ": non-rectangle shape, keeping default footprint");
      }
    } else if (iequals(c.name, "type") || iequals(c.name, "role")) {
      // role handled by the caller via element name or this child
    } else {
      warn.add("obstacle: ignored element '" + c.name + "'");
    }
  }
  if (!initial) throw SemanticError(element, "missing initialState");

  const XmlNode* position = find_child(*initial, "position");
  const XmlNode* point = position ? find_child(*position, "point") : nullptr;
  const XmlNode* x = point ? find_child(*point, "x") : nullptr;
  const XmlNode* y = point ? find_child(*point, "y") : nullptr;
  if (!x || !y) throw SemanticError(element, "missing initial position point");
  const auto xv = text_number(*x);
  const auto yv = text_number(*y);
  if (!xv || !yv) throw SemanticError(element, "bad initial position");
  a.initial.position = {*xv, *yv};

  if (const XmlNode* orient = find_child(*initial, "orientation")) {
    if (const auto v = scalar_value(*orient)) {
      a.initial.heading = *v;
    } else {
      throw SemanticError(element, "bad orientation");
    }
  } else {
    warn.add(element + ": missing orientation, assuming 0");
  }
  if (const XmlNode* vel = find_child(*initial, "velocity")) {
    if (const auto v = scalar_value(*vel)) {
      a.initial.speed = std::max(0.0, *v);
    } else {
      throw SemanticError(element, "bad velocity");
    }
  } else if (!is_static) {
    warn.add(element + ": missing velocity, assuming 0");
  }

  a.policy.name = "IDMAgent";
  if (is_static) a.policy.idm.v0 = 0.0;  // parked: no desired speed
  return a;
}

std::vector<std::string> infer_route(const LaneNetwork& map, Vec2 pos) {
  std::vector<std::string> route;
  const Lanelet* best = nullptr;
  double best_d = 0.0;
  for (const auto& l : map.lanelets) {
    const Polyline pl(l.centerline);
    if (pl.empty()) continue;
    const double d = (pos - pl.point_at(pl.project(pos))).norm();
    if (!best || d < best_d) {
      best = &l;
      best_d = d;
    }
  }
  if (!best) return route;
  std::set<std::string> visited;
  const Lanelet* cur = best;
  while (cur && visited.insert(cur->id).second && route.size() < 32) {
    route.push_back(cur->id);
    const Lanelet* next = nullptr;
    for (const auto& succ : cur->successors) {
      if (!visited.count(succ)) {
        next = map.find_lanelet(succ);
        if (next) break;
      }
    }
    cur = next;
  }
  return route;
}

ScenarioFile parse_commonroad(const std::string& text, std::vector<std::string>* warnings) {
  XmlParser parser(text);
  const XmlNode root = parser.parse_document();
  Warnings warn(warnings);

  ScenarioFile sc;
  sc.id = "commonroad";
  if (const std::string* bench = find_attr(root, "benchmarkid"))
    sc.id = sanitize_token(*bench, "commonroad");
  if (const std::string* step = find_attr(root, "timestepsize")) {
    double v = 0.0;
    auto res = std::from_chars(step->data(), step->data() + step->size(), v);
    if (res.ec == std::errc() && res.ptr == step->data() + step->size() && v > 0.0 &&
        std::isfinite(v)) {
      sc.dt = v;
    } else {
      warn.add("unparseable timeStepSize, keeping default");
    }
  }

  for (const auto& c : root.children) {
    if (iequals(c.name, "lanelet")) sc.map.lanelets.push_back(read_cr_lanelet(c, warn));
  }
  for (const auto& c : root.children) {
    if (iequals(c.name, "lanelet")) continue;
    bool is_static = false;
    if (iequals(c.name, "dynamicobstacle")) {
      is_static = false;
    } else if (iequals(c.name, "staticobstacle")) {
      is_static = true;
    } else if (iequals(c.name, "obstacle")) {
      const XmlNode* role = find_child(c, "role");
      if (role) {
        is_static = iequals(trimmed(role->text), "static");
      } else {
        warn.add("obstacle without role, assuming dynamic");
      }
    } else {
      warn.add("ignored element '" + c.name + "'");
      continue;
    }
    ScenarioAgent a = read_cr_obstacle(c, is_static, warn);
    a.route = infer_route(sc.map, a.initial.position);
    sc.agents.push_back(std::move(a));
  }

  validate_scenario(sc);
  return sc;
}

}  // namespace

// ---------------------------------------------------------------------------
// Entry points

ScenarioFile parse_scenario(const std::string& text, ScenarioFormat format,
                            std::vector<std::string>* warnings) {
  switch (format) {
    case ScenarioFormat::Native: return parse_native_scenario(text);
    case ScenarioFormat::CommonRoadXmlSubset: return parse_commonroad(text, warnings);
  }
  throw std::invalid_argument("unknown scenario format");
}

ScenarioFile load_scenario(const std::string& path, std::vector<std::string>* warnings) {
  const std::string text = read_file(path);
  std::size_t i = 0;
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;  // UTF-8 BOM
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i < text.size() && text[i] == '<')
    return parse_scenario(text, ScenarioFormat::CommonRoadXmlSubset, warnings);
  return parse_scenario(text, ScenarioFormat::Native, warnings);
}

}  // namespace cfmargin
