#include "cfmargin/counterfactuals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cfmargin/random.hpp"

namespace cfmargin {

namespace {

std::uint64_t purpose_seed(std::uint64_t setup_seed, const char* purpose, int rep,
                           int agent_index) {
  std::uint64_t s = seed_chain(setup_seed, std::string_view(purpose));
  s = seed_chain(s, static_cast<std::uint64_t>(rep));
  return seed_chain(s, static_cast<std::uint64_t>(agent_index));
}

}  // namespace

Observation DistractionFilter::apply(const Observation& obs) {
  if (hold_ <= 0.0) return obs;
  const double cycle = hold_ + kAttentiveWindow;
  const double pos = std::fmod(obs.time + phase_, cycle);
  if (pos < kAttentiveWindow || !held_) {
    held_ = obs;
    return obs;
  }
  Observation out = obs;  // own state and clock stay current
  out.nearby = held_->nearby;
  out.signals = held_->signals;
  return out;
}

Observation UnseenFilter::apply(const Observation& obs) {
  if (intensity_ <= 0.0) return obs;
  const double threshold = 1.0 / intensity_;
  // Body-to-body gap: a vehicle is seen at its surface, not its center.
  Observation out = obs;
  std::erase_if(out.nearby, [&](const NearbyAgent& nb) {
    return nb.index == ego_index_ &&
           !(obb_separation(obs.self.footprint(), nb.state.footprint()) < threshold);
  });
  return out;
}

Observation SignalBlindnessFilter::apply(const Observation& obs) {
  Observation out = obs;
  std::erase_if(out.signals, [&](const SignalSighting& s) {
    return s.signal_index >= 0 && s.signal_index < static_cast<int>(ignore_.size()) &&
           ignore_[s.signal_index];
  });
  return out;
}

bool precedence_ignored(std::uint64_t setup_seed, int rep, int agent_index,
                        int signal_index, double intensity) {
  const std::uint64_t s =
      seed_chain(purpose_seed(setup_seed, "precedence", rep, agent_index),
                 static_cast<std::uint64_t>(signal_index));
  return uniform01(s) < intensity;
}

double distraction_phase(std::uint64_t setup_seed, int rep, int agent_index, double hold) {
  const double cycle = hold + DistractionFilter::kAttentiveWindow;
  return uniform01(purpose_seed(setup_seed, "distraction-phase", rep, agent_index)) * cycle;
}

CounterfactualSetup build_counterfactual(const Episode& e, CounterfactualAssignment assign,
                                         const PolicySpec& ego_policy, std::uint64_t seed) {
  CounterfactualSetup setup;
  setup.base = &e;
  const ClampedIntensity ci = clamp_intensity(assign.kind, assign.intensity);
  assign.intensity = ci.value;
  setup.assign = std::move(assign);
  setup.ego_policy = ego_policy;
  setup.seed = seed;
  setup.ego_index = e.agent_index(setup.assign.ego_id);
  if (setup.ego_index < 0) {
    throw std::invalid_argument("counterfactual ego '" + setup.assign.ego_id +
                                "' is not part of the episode");
  }
  if (e.agents[setup.ego_index].states.empty()) {
    throw std::invalid_argument("counterfactual ego has no recorded states");
  }
  return setup;
}

std::vector<SimAgent> assemble_agents(const CounterfactualSetup& setup, int rep,
                                      std::unique_ptr<Policy> ego_override) {
  const Episode& e = *setup.base;
  const double gamma = setup.assign.intensity;
  const CounterfactualKind kind = setup.assign.kind;

  std::vector<SimAgent> agents;
  agents.reserve(e.agents.size());
  for (int i = 0; i < static_cast<int>(e.agents.size()); ++i) {
    const AgentRecord& rec = e.agents[i];
    SimAgent sa;
    sa.id = rec.id;
    sa.initial = rec.states.at(0);
    sa.route = rec.route;
    sa.kinematics = rec.kinematics;

    PolicyBuildContext ctx;
    ctx.map = &e.map;
    ctx.route = rec.route;
    ctx.kinematics = rec.kinematics;
    ctx.dt = e.dt;
    ctx.self_length = sa.initial.length;
    ctx.self_width = sa.initial.width;
    ctx.self_index = i;

    if (i == setup.ego_index) {
      if (ego_override) {
        sa.recorded_policy = PolicySpec{"BestResponse", setup.ego_policy.idm};
        sa.policy = std::move(ego_override);
      } else if (setup.ego_policy.name == "Replay") {
        sa.recorded_policy = PolicySpec{"Replay", rec.policy.idm};
        sa.policy = std::make_unique<ReplayPolicy>(rec.states, e.dt);
      } else {
        sa.recorded_policy = setup.ego_policy;
        sa.policy = make_policy(setup.ego_policy, ctx);
      }
      agents.push_back(std::move(sa));
      continue;
    }

    PolicySpec spec = rec.policy;
    if (kind == CounterfactualKind::Aggressiveness) {
      spec.idm = apply_aggressiveness(spec.idm, gamma);
    }
    sa.recorded_policy = spec;

    std::vector<std::unique_ptr<ObservationFilter>> obs_filters;
    if (gamma > 0.0) {
      switch (kind) {
        case CounterfactualKind::Aggressiveness:
          break;  // parameter edit, no filter
        case CounterfactualKind::Distraction:
          obs_filters.push_back(std::make_unique<DistractionFilter>(
              gamma, distraction_phase(setup.seed, rep, i, gamma)));
          break;
        case CounterfactualKind::IllegalPrecedence: {
          std::vector<bool> ignore(e.map.signals.size(), false);
          bool any = false;
          for (int s = 0; s < static_cast<int>(ignore.size()); ++s) {
            ignore[s] = precedence_ignored(setup.seed, rep, i, s, gamma);
            any = any || ignore[s];
          }
          if (any) {
            obs_filters.push_back(
                std::make_unique<SignalBlindnessFilter>(std::move(ignore)));
          }
          break;
        }
        case CounterfactualKind::ImpairedReflexes: {
          const int steps = latency_steps(gamma, e.dt);
          if (steps > 0) {
            obs_filters.push_back(std::make_unique<LatencyFilter>(steps));
          }
          break;
        }
        case CounterfactualKind::Unseen:
          obs_filters.push_back(
              std::make_unique<UnseenFilter>(gamma, setup.ego_index));
          break;
      }
    }

    auto base_policy = make_policy(spec, ctx);
    if (obs_filters.empty()) {
      sa.policy = std::move(base_policy);
    } else {
      sa.policy = std::make_unique<FilteredPolicy>(
          std::move(base_policy), std::move(obs_filters),
          std::vector<std::unique_ptr<CommandFilter>>{});
    }
    agents.push_back(std::move(sa));
  }
  return agents;
}

Episode realize(const CounterfactualSetup& setup, int rep) {
  return realize_with_ego(setup, rep, nullptr);
}

Episode realize_with_ego(const CounterfactualSetup& setup, int rep,
                         std::unique_ptr<Policy> ego) {
  const Episode& e = *setup.base;
  const std::uint64_t stamp = kind_is_deterministic(setup.assign.kind)
                                  ? setup.seed
                                  : seed_chain(setup.seed, static_cast<std::uint64_t>(rep));
  return run_closed_loop(e.map, assemble_agents(setup, rep, std::move(ego)), e.dt,
                         e.horizon, e.id, stamp, SimConfig{});
}

}  // namespace cfmargin
