#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cfmargin/agents.hpp"
#include "cfmargin/dynamics.hpp"

namespace cfmargin {

/// Which agents a perturbation targets: every agent except the ego, whose
/// behavior is the subject of the analysis, never its cause.
struct CounterfactualAssignment {
  CounterfactualKind kind = CounterfactualKind::Aggressiveness;
  double intensity = 0.0;  // within the kind's range after clamping
  std::string ego_id;
};

/// Immutable recipe for re-simulating one episode under one (kind, intensity)
/// pair. Holds a pointer into the caller's episode; the episode must outlive
/// the setup.
struct CounterfactualSetup {
  const Episode* base = nullptr;
  CounterfactualAssignment assign;
  PolicySpec ego_policy;  // name "Replay" replays the recording; else reactive
  std::uint64_t seed = 0;
  int ego_index = -1;
};

/// Validates the episode/ego pair, clamps the intensity into the kind's range
/// and fixes the seed all realizations will chain from.
CounterfactualSetup build_counterfactual(const Episode& e, CounterfactualAssignment assign,
                                         const PolicySpec& ego_policy, std::uint64_t seed);

/// Freezes the external percepts (nearby agents, signals) for `hold` seconds,
/// then lets them refresh for a fixed 0.5 s window, repeating. The observer's
/// own state and clock stay current: inattention affects what the driver
/// notices, not where its hands keep the vehicle. `phase` shifts the cycle
/// start so agents do not blink in unison. hold = 0 is a pass-through.
class DistractionFilter : public ObservationFilter {
 public:
  static constexpr double kAttentiveWindow = 0.5;  // s

  DistractionFilter(double hold, double phase) : hold_(hold), phase_(phase) {}
  Observation apply(const Observation& obs) override;

 private:
  double hold_;
  double phase_;
  std::optional<Observation> held_;
};

/// Deletes the agent at `ego_index` from the observer's nearby list unless it
/// is closer than 1/intensity meters. intensity = 0 keeps it always visible.
class UnseenFilter : public ObservationFilter {
 public:
  UnseenFilter(double intensity, int ego_index)
      : intensity_(intensity), ego_index_(ego_index) {}
  Observation apply(const Observation& obs) override;

 private:
  double intensity_;
  int ego_index_;
};

/// Removes the signals whose per-(agent, signal) coin came up "ignore" from
/// every observation, so the wrapped driver never knows it had to yield.
class SignalBlindnessFilter : public ObservationFilter {
 public:
  explicit SignalBlindnessFilter(std::vector<bool> ignore) : ignore_(std::move(ignore)) {}
  Observation apply(const Observation& obs) override;

 private:
  std::vector<bool> ignore_;  // indexed by signal index
};

/// The once-per-(agent, signal) precedence coin, a pure function of the seed
/// chain, so its value does not depend on when the agent first approaches.
bool precedence_ignored(std::uint64_t setup_seed, int rep, int agent_index,
                        int signal_index, double intensity);

/// Distraction cycle phase for one agent in one rep, in [0, hold + 0.5).
double distraction_phase(std::uint64_t setup_seed, int rep, int agent_index, double hold);

/// The full agent set for one realization: non-ego agents get their recorded
/// reactive policies wrapped per the setup's kind and intensity; the ego gets
/// `ego_override` when non-null, otherwise the setup's ego policy.
std::vector<SimAgent> assemble_agents(const CounterfactualSetup& setup, int rep,
                                      std::unique_ptr<Policy> ego_override = nullptr);

/// One counterfactual episode. Deterministic given (setup, rep); reps only
/// differ for kinds that consume randomness (distraction phase, precedence
/// coins), so deterministic kinds coincide across reps exactly.
Episode realize(const CounterfactualSetup& setup, int rep);

/// realize() with the ego driven by an injected policy (best-response search
/// rolls candidate programs through here).
Episode realize_with_ego(const CounterfactualSetup& setup, int rep,
                         std::unique_ptr<Policy> ego);

}  // namespace cfmargin
