#include "cfmargin/scenario.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace cfmargin {

double Signal::cycle_length() const {
  double total = 0.0;
  for (const auto& p : phases) total += p.duration;
  return total;
}

LightState Signal::state_at(double time) const {
  if (kind == SignalKind::StopSign || phases.empty()) return LightState::Red;
  const double cycle = cycle_length();
  if (cycle <= 0.0) return phases.front().state;
  double t = std::fmod(time, cycle);
  if (t < 0.0) t += cycle;
  for (const auto& p : phases) {
    if (t < p.duration) return p.state;
    t -= p.duration;
  }
  return phases.back().state;
}

double Lanelet::arclength() const {
  double total = 0.0;
  for (std::size_t i = 1; i < centerline.size(); ++i) {
    total += (centerline[i] - centerline[i - 1]).norm();
  }
  return total;
}

const Lanelet* LaneNetwork::find_lanelet(const std::string& id) const {
  for (const auto& l : lanelets) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

const Signal* LaneNetwork::find_signal(const std::string& id) const {
  for (const auto& s : signals) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

int LaneNetwork::signal_index(const std::string& id) const {
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (signals[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

Polyline LaneNetwork::route_polyline(const std::vector<std::string>& route) const {
  std::vector<Vec2> pts;
  for (const auto& id : route) {
    const Lanelet* l = find_lanelet(id);
    if (!l) throw std::invalid_argument("route references unknown lanelet '" + id + "'");
    for (const Vec2& p : l->centerline) {
      if (!pts.empty() && (pts.back() - p).norm() < 1e-9) continue;
      pts.push_back(p);
    }
  }
  return Polyline(std::move(pts));
}

std::optional<double> LaneNetwork::route_offset(const std::vector<std::string>& route,
                                                const std::string& lanelet_id) const {
  double offset = 0.0;
  for (const auto& id : route) {
    const Lanelet* l = find_lanelet(id);
    if (!l) return std::nullopt;
    if (id == lanelet_id) return offset;
    offset += l->arclength();
  }
  return std::nullopt;
}

const AgentRecord* Episode::find_agent(const std::string& id) const {
  for (const auto& a : agents) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

int Episode::agent_index(const std::string& id) const {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

double intensity_max(CounterfactualKind kind) {
  switch (kind) {
    case CounterfactualKind::Aggressiveness: return 1.0;
    case CounterfactualKind::Distraction: return 5.0;      // seconds
    case CounterfactualKind::IllegalPrecedence: return 1.0;
    case CounterfactualKind::ImpairedReflexes: return 1.0; // seconds
    case CounterfactualKind::Unseen: return 20.0;          // 1/m
  }
  return 0.0;
}

const char* kind_name(CounterfactualKind kind) {
  switch (kind) {
    case CounterfactualKind::Aggressiveness: return "aggressiveness";
    case CounterfactualKind::Distraction: return "distraction";
    case CounterfactualKind::IllegalPrecedence: return "illegal_precedence";
    case CounterfactualKind::ImpairedReflexes: return "impaired_reflexes";
    case CounterfactualKind::Unseen: return "unseen";
  }
  return "?";
}

std::optional<CounterfactualKind> kind_from_name(const std::string& name) {
  for (CounterfactualKind k : kAllKinds) {
    if (name == kind_name(k)) return k;
  }
  return std::nullopt;
}

bool kind_is_deterministic(CounterfactualKind kind) {
  switch (kind) {
    case CounterfactualKind::Aggressiveness:
    case CounterfactualKind::ImpairedReflexes:
    case CounterfactualKind::Unseen:
      return true;
    case CounterfactualKind::Distraction:
    case CounterfactualKind::IllegalPrecedence:
      return false;
  }
  return true;
}

ClampedIntensity clamp_intensity(CounterfactualKind kind, double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("counterfactual intensity must be >= 0");
  const double hi = intensity_max(kind);
  if (gamma > hi) return {hi, true};
  return {gamma, false};
}

namespace {

bool finite_state(const AgentState& s) {
  return std::isfinite(s.position.x) && std::isfinite(s.position.y) &&
         std::isfinite(s.heading) && std::isfinite(s.speed) && std::isfinite(s.steer);
}

}  // namespace

std::vector<Violation> validate_episode(const Episode& e) {
  std::vector<Violation> out;
  auto add = [&out](std::string field, std::string agent, int step, std::string msg) {
    out.push_back({std::move(field), std::move(agent), step, std::move(msg)});
  };

  if (e.agents.empty()) add("agents", "", -1, "episode has no agents");
  if (!(e.dt > 0.0)) add("dt", "", -1, "timestep must be > 0");
  if (e.horizon < 1) add("horizon", "", -1, "horizon must be >= 1");

  std::set<std::string> seen;
  for (const auto& a : e.agents) {
    if (!seen.insert(a.id).second) add("ids unique", a.id, -1, "duplicate agent id");
  }

  const std::size_t want = static_cast<std::size_t>(e.horizon) + 1;
  for (const auto& a : e.agents) {
    if (a.states.size() != want) {
      add("trajectory length", a.id, -1,
          "expected " + std::to_string(want) + " states, got " + std::to_string(a.states.size()));
      continue;
    }
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      const AgentState& s = a.states[k];
      if (!finite_state(s)) {
        add("state finite", a.id, static_cast<int>(k), "non-finite state");
        break;
      }
      if (s.speed < 0.0) add("speed", a.id, static_cast<int>(k), "negative speed");
      if (!(s.length > 0.0) || !(s.width > 0.0)) {
        add("footprint", a.id, static_cast<int>(k), "footprint dimensions must be > 0");
        break;
      }
      if (std::abs(s.steer) > a.kinematics.delta_max + 1e-9) {
        add("steering angle", a.id, static_cast<int>(k), "steering angle exceeds delta_max");
        break;
      }
    }
  }

  // Map invariants
  for (const auto& l : e.map.lanelets) {
    if (l.centerline.size() < 2) add("centerline", "", -1, "lanelet '" + l.id + "' has < 2 points");
    if (!(l.width > 0.0)) add("lane width", "", -1, "lanelet '" + l.id + "' has non-positive width");
    for (const auto& succ : l.successors) {
      if (!e.map.find_lanelet(succ)) {
        add("successors", "", -1, "lanelet '" + l.id + "' successor '" + succ + "' unresolved");
      }
    }
  }
  for (const auto& sig : e.map.signals) {
    const Lanelet* l = e.map.find_lanelet(sig.lanelet);
    if (!l) {
      add("signal lanelet", "", -1, "signal '" + sig.id + "' references unknown lanelet");
    } else if (sig.stop_arclength < 0.0 || sig.stop_arclength > l->arclength() + 1e-9) {
      add("stop line", "", -1, "signal '" + sig.id + "' stop line outside lanelet arclength");
    }
  }

  if (!e.signal_states.empty() && e.signal_states.size() != want) {
    add("signal states", "", -1, "signal_states rows must equal horizon+1");
  }
  for (const auto& row : e.signal_states) {
    if (row.size() != e.map.signals.size()) {
      add("signal states", "", -1, "signal_states row width must equal signal count");
      break;
    }
  }
  return out;
}

}  // namespace cfmargin
