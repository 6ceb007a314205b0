#include "cfmargin/severity.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cfmargin {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr ImpactClass kAllClasses[] = {ImpactClass::Front, ImpactClass::Side,
                                       ImpactClass::Rear};

}  // namespace

double SeverityModel::modifier(ImpactClass c) const {
  switch (c) {
    case ImpactClass::Front: return mod_front;
    case ImpactClass::Side: return mod_side;
    case ImpactClass::Rear: return mod_rear;
  }
  return 0.0;
}

SeverityProfile SeverityModel::evaluate(double delta_v, ImpactClass c) const {
  const double mod = modifier(c);
  SeverityProfile p;
  p.p_fatal = logistic(fatal.alpha + fatal.beta * delta_v + mod);
  p.p_mais3plus = logistic(mais3plus.alpha + mais3plus.beta * delta_v + mod);
  p.p_mais2plus = logistic(mais2plus.alpha + mais2plus.beta * delta_v + mod);
  return p;
}

void SeverityModel::validate() const {
  if (fatal.beta <= 0.0 || mais3plus.beta <= 0.0 || mais2plus.beta <= 0.0) {
    throw std::runtime_error("severity model: every beta must be positive");
  }
  for (ImpactClass c : kAllClasses) {
    for (double dv = 0.0; dv <= 60.0 + 1e-12; dv += 0.5) {
      const SeverityProfile p = evaluate(dv, c);
      if (!(p.p_fatal <= p.p_mais3plus && p.p_mais3plus <= p.p_mais2plus)) {
        throw std::runtime_error("severity model: nesting fails at delta_v=" +
                                 std::to_string(dv) + " class " +
                                 impact_class_name(c));
      }
    }
  }
}

SeverityModel severity_model_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open severity model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw std::runtime_error("severity model file " + path + ": " + ex.what());
  }
  SeverityModel m;
  auto level = [&](const char* key, SeverityModel::Level& out) {
    if (!j.contains(key)) return;
    const auto& lj = j.at(key);
    if (lj.contains("alpha")) out.alpha = lj.at("alpha").get<double>();
    if (lj.contains("beta")) out.beta = lj.at("beta").get<double>();
  };
  level("fatal", m.fatal);
  level("mais3plus", m.mais3plus);
  level("mais2plus", m.mais2plus);
  if (j.contains("mod_front")) m.mod_front = j.at("mod_front").get<double>();
  if (j.contains("mod_side")) m.mod_side = j.at("mod_side").get<double>();
  if (j.contains("mod_rear")) m.mod_rear = j.at("mod_rear").get<double>();
  m.validate();
  return m;
}

SeverityProfile severity_of(const ContactEvent& ev, int agent_index,
                            const SeverityModel& model) {
  if (agent_index != ev.agent_a && agent_index != ev.agent_b) {
    throw std::invalid_argument("severity_of: agent is not a participant of the contact");
  }
  const ImpactClass cls = agent_index == ev.agent_a ? ev.class_a : ev.class_b;
  return model.evaluate(ev.delta_v, cls);
}

SeverityProfile agent_severity(const std::vector<ContactEvent>& events, int agent_index,
                               const SeverityModel& model) {
  SeverityProfile worst;  // zero profile: no contact
  for (const auto& ev : events) {
    if (ev.agent_a != agent_index && ev.agent_b != agent_index) continue;
    const SeverityProfile p = severity_of(ev, agent_index, model);
    if (lex_compare(p, worst) > 0) worst = p;
  }
  return worst;
}

int lex_compare(const SeverityProfile& a, const SeverityProfile& b, double tol) {
  const double parts[3][2] = {{a.p_fatal, b.p_fatal},
                              {a.p_mais3plus, b.p_mais3plus},
                              {a.p_mais2plus, b.p_mais2plus}};
  for (const auto& [lhs, rhs] : parts) {
    const double d = lhs - rhs;
    if (d > tol) return 1;
    if (d < -tol) return -1;
  }
  return 0;
}

}  // namespace cfmargin
