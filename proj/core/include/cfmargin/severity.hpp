#pragma once

#include <string>

#include "cfmargin/dynamics.hpp"

namespace cfmargin {

/// Injury outcome probabilities for one collision, from one participant's
/// perspective. Levels are nested: fatal implies MAIS3+, MAIS3+ implies
/// MAIS2+, so p_fatal <= p_mais3plus <= p_mais2plus always.
struct SeverityProfile {
  double p_fatal = 0.0;
  double p_mais3plus = 0.0;
  double p_mais2plus = 0.0;
};

/// Logistic delta-v model, one (alpha, beta) pair per severity level plus
/// impact-class logit modifiers shared across levels:
///   p_level = logistic(alpha_level + beta_level * delta_v + modifier(class)).
///
/// Default calibration: p(0) < 1% for every level and class, and
/// p_mais2plus(17 m/s, frontal) = 0.5. Nesting is guaranteed by construction
/// when the level logits are ordered over the supported delta-v range, which
/// `validate` checks on a 0.5 m/s grid over [0, 60].
struct SeverityModel {
  struct Level {
    double alpha = 0.0;
    double beta = 0.0;  // logit slope per m/s of delta-v, > 0
  };
  Level fatal{-8.0, 0.19};
  Level mais3plus{-6.5, 0.19};
  Level mais2plus{-5.61, 0.33};
  double mod_front = 0.0;
  double mod_side = 0.6;
  double mod_rear = -0.4;

  double modifier(ImpactClass c) const;
  SeverityProfile evaluate(double delta_v, ImpactClass c) const;

  /// Throws std::runtime_error when slopes are non-positive or nesting fails
  /// anywhere on the 0.5 m/s grid over [0, 60] m/s for any impact class.
  void validate() const;
};

/// Loads coefficient overrides from a JSON object file. Any subset of
/// {"fatal","mais3plus","mais2plus"} (each {"alpha","beta"}) and
/// {"mod_front","mod_side","mod_rear"} may be present; absent keys keep
/// defaults. The merged model is validated before it is returned.
SeverityModel severity_model_from_json_file(const std::string& path);

/// Severity of a contact as experienced by agent `agent_index` (one of the
/// two participants; its own impact class side is used).
SeverityProfile severity_of(const ContactEvent& ev, int agent_index,
                            const SeverityModel& model = {});

/// Worst contact severity (lexicographic) experienced by the agent across
/// `events`; the zero profile when it has no contact.
SeverityProfile agent_severity(const std::vector<ContactEvent>& events, int agent_index,
                               const SeverityModel& model = {});

/// Lexicographic order on (p_fatal, p_mais3plus, p_mais2plus): returns -1, 0
/// or +1. Components closer than `tol` tie and advance to the next.
int lex_compare(const SeverityProfile& a, const SeverityProfile& b, double tol = 1e-6);

}  // namespace cfmargin
