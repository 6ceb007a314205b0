#include "cfmargin/margin.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "cfmargin/parallel.hpp"
#include "cfmargin/random.hpp"

namespace cfmargin {

WilsonInterval wilson_interval(int successes, int n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * static_cast<double>(n) * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

const char* margin_mode_name(MarginMode mode) {
  switch (mode) {
    case MarginMode::Reactive: return "reactive";
    case MarginMode::NonReactive: return "non_reactive";
    case MarginMode::BestResponse: return "best_response";
  }
  return "?";
}

namespace {

// Primitive menus for the best-response program tree.
constexpr double kAccelMenu[] = {-8.0, -4.0, 0.0, 2.0};
constexpr double kSteerMenu[] = {-0.4, 0.0, 0.4};
constexpr int kAccelCount = 4;
constexpr int kSteerCount = 3;
constexpr int kPrimitives = kAccelCount * kSteerCount;           // 12
constexpr int kPrograms = kPrimitives * kPrimitives * kPrimitives;  // 1728

// Piecewise-constant three-segment command program; segment boundaries are
// step indices. Past the horizon it keeps the last segment's command.
class ProgramPolicy : public Policy {
 public:
  ProgramPolicy(std::array<Command, 3> segments, int b1, int b2)
      : segments_(segments), b1_(b1), b2_(b2) {}

  Command step(const Observation&) override {
    const int k = step_++;
    if (k < b1_) return segments_[0];
    if (k < b2_) return segments_[1];
    return segments_[2];
  }

 private:
  std::array<Command, 3> segments_;
  int b1_;
  int b2_;
  int step_ = 0;
};

Command primitive(int code) {
  return {kAccelMenu[code / kSteerCount], kSteerMenu[code % kSteerCount]};
}

// Program code: three primitive codes in base 12.
std::array<Command, 3> decode_program(int program) {
  return {primitive(program / (kPrimitives * kPrimitives)),
          primitive((program / kPrimitives) % kPrimitives),
          primitive(program % kPrimitives)};
}

int nearest_primitive(double accel, double steer_rate) {
  int best_a = 0;
  for (int i = 1; i < kAccelCount; ++i) {
    if (std::abs(kAccelMenu[i] - accel) < std::abs(kAccelMenu[best_a] - accel)) best_a = i;
  }
  int best_w = 0;
  for (int i = 1; i < kSteerCount; ++i) {
    if (std::abs(kSteerMenu[i] - steer_rate) < std::abs(kSteerMenu[best_w] - steer_rate)) {
      best_w = i;
    }
  }
  return best_a * kSteerCount + best_w;
}

struct Candidate {
  bool failed = true;
  bool collided = true;
  SeverityProfile severity;
  double mse = 0.0;
  std::vector<AgentState> trajectory;
};

// true when a is a strictly better outcome than b.
bool candidate_better(const Candidate& a, const Candidate& b) {
  if (b.failed) return !a.failed;
  if (a.failed) return false;
  const int sev = lex_compare(a.severity, b.severity);
  if (sev != 0) return sev < 0;
  if (a.collided != b.collided) return !a.collided;
  return a.mse < b.mse;
}

Candidate evaluate_program(const CounterfactualSetup& setup, int rep, int program,
                           int b1, int b2, const std::vector<AgentState>& recorded,
                           const SeverityModel& sev_model) {
  Candidate c;
  Episode rollout;
  try {
    rollout = realize_with_ego(setup, rep,
                               std::make_unique<ProgramPolicy>(decode_program(program), b1, b2));
  } catch (const SimulationError&) {
    return c;  // failed
  }
  c.failed = false;
  const auto events = check_contacts(rollout);
  c.collided = agent_collided(events, setup.ego_index);
  if (c.collided) c.severity = agent_severity(events, setup.ego_index, sev_model);
  c.trajectory = rollout.agents[setup.ego_index].states;

  const std::size_t n = std::min(c.trajectory.size(), recorded.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sum += (c.trajectory[k].position - recorded[k].position).norm_sq();
  }
  c.mse = n > 0 ? sum / static_cast<double>(n) : 0.0;
  return c;
}

}  // namespace

BestResponseOutcome best_response(const CounterfactualSetup& setup, int rep,
                                  const SeverityModel& severity, bool exhaustive) {
  const Episode& e = *setup.base;
  const std::vector<AgentState>& recorded = e.agents[setup.ego_index].states;
  const int horizon = e.horizon;
  const int b1 = horizon / 3;
  const int b2 = 2 * (horizon / 3);
  const double dt = e.dt;

  // The recorded trajectory itself is not representable as a program; its
  // nearest program is evaluated explicitly as an extra candidate.
  int snapped = 0;
  {
    std::array<int, 3> codes{};
    const std::array<std::pair<int, int>, 3> spans{{{0, b1}, {b1, b2}, {b2, horizon}}};
    for (int s = 0; s < 3; ++s) {
      double mean_a = 0.0;
      double mean_w = 0.0;
      int count = 0;
      for (int k = spans[s].first;
           k < spans[s].second && k + 1 < static_cast<int>(recorded.size()); ++k) {
        mean_a += (recorded[k + 1].speed - recorded[k].speed) / dt;
        mean_w += (recorded[k + 1].steer - recorded[k].steer) / dt;
        ++count;
      }
      if (count > 0) {
        mean_a /= count;
        mean_w /= count;
      }
      codes[s] = nearest_primitive(mean_a, mean_w);
    }
    snapped = codes[0] * kPrimitives * kPrimitives + codes[1] * kPrimitives + codes[2];
  }

  // Scan order: the snapped recording, then the 12 uniform programs (hard
  // braking first), then the full tree.
  std::vector<int> order;
  order.reserve(kPrograms + 1);
  order.push_back(snapped);
  for (int c = 0; c < kPrimitives; ++c) {
    order.push_back(c * kPrimitives * kPrimitives + c * kPrimitives + c);
  }
  for (int p = 0; p < kPrograms; ++p) order.push_back(p);

  std::vector<bool> seen(kPrograms, false);
  BestResponseOutcome out;
  Candidate best;
  bool have_any = false;

  for (int program : order) {
    if (seen[program]) continue;
    seen[program] = true;
    Candidate c = evaluate_program(setup, rep, program, b1, b2, recorded, severity);
    ++out.rollouts;
    if (c.failed) {
      ++out.rollout_failures;
      continue;
    }
    if (!have_any || candidate_better(c, best)) {
      best = std::move(c);
      have_any = true;
    }
    if (!exhaustive && !best.collided) break;
  }

  if (!have_any) {
    throw std::runtime_error("best response: every rollout failed (episode '" + e.id +
                             "', rep " + std::to_string(rep) + ")");
  }
  out.trajectory = std::move(best.trajectory);
  out.severity = best.severity;
  out.collided = best.collided;
  return out;
}

namespace {

struct RepEval {
  int status = 2;  // 0 = no collision, 1 = collision, 2 = failure
  SeverityProfile severity;
};

RepEval evaluate_rep(const MarginContext& ctx, const CounterfactualSetup& setup,
                     MarginMode mode, int rep) {
  RepEval out;
  try {
    const Episode r = realize(setup, rep);
    const auto events = check_contacts(r);
    if (!agent_collided(events, setup.ego_index)) {
      out.status = 0;
      return out;
    }
    if (mode != MarginMode::BestResponse) {
      out.status = 1;
      out.severity = agent_severity(events, setup.ego_index, ctx.severity);
      return out;
    }
    // Anchored to the replay collision: the rep stays a collision only if the
    // best found ego program still collides.
    const BestResponseOutcome br = best_response(setup, rep, ctx.severity,
                                                 /*exhaustive=*/false);
    if (br.collided) {
      out.status = 1;
      out.severity = br.severity;
    } else {
      out.status = 0;
    }
    return out;
  } catch (const SimulationError&) {
    return out;  // failure
  }
}

}  // namespace

ProbabilityPoint estimate_collision_prob(const MarginContext& ctx, CounterfactualKind kind,
                                         double gamma, MarginMode mode) {
  if (!ctx.episode) throw std::invalid_argument("margin context has no episode");
  const Episode& e = *ctx.episode;
  const int requested = kind_is_deterministic(kind) ? 1 : std::max(1, ctx.search.reps);

  const PolicySpec ego_policy =
      mode == MarginMode::Reactive ? ctx.ego_policy : PolicySpec{"Replay", {}};

  // Seeds chain over (episode, kind, intensity) but never the mode, so the
  // replay and best-response sweeps face identical realizations rep by rep.
  std::uint64_t point_seed = seed_chain(ctx.seed, std::string_view(e.id));
  point_seed = seed_chain(point_seed, std::string_view(kind_name(kind)));
  point_seed = seed_chain(point_seed, std::bit_cast<std::uint64_t>(gamma));

  const CounterfactualSetup setup =
      build_counterfactual(e, CounterfactualAssignment{kind, gamma, ctx.ego_id},
                           ego_policy, point_seed);

  const std::vector<RepEval> outcomes = parallel_map<RepEval>(
      requested, ctx.search.workers,
      [&](int rep) { return evaluate_rep(ctx, setup, mode, rep); });

  ProbabilityPoint pt;
  pt.intensity = setup.assign.intensity;
  double sum_fatal = 0.0;
  double sum_mais3 = 0.0;
  double sum_mais2 = 0.0;
  for (const RepEval& o : outcomes) {
    if (o.status == 2) {
      ++pt.failures;
      continue;
    }
    ++pt.reps;
    if (o.status == 1) {
      ++pt.collisions;
      sum_fatal += o.severity.p_fatal;
      sum_mais3 += o.severity.p_mais3plus;
      sum_mais2 += o.severity.p_mais2plus;
    }
  }
  pt.p_hat = pt.reps > 0 ? static_cast<double>(pt.collisions) / pt.reps : 0.0;
  const WilsonInterval ci = wilson_interval(pt.collisions, pt.reps);
  pt.ci_low = ci.low;
  pt.ci_high = ci.high;
  pt.usable = pt.failures <= ctx.search.failure_budget * requested;
  if (pt.collisions > 0) {
    pt.mean_collision_severity = {sum_fatal / pt.collisions, sum_mais3 / pt.collisions,
                                  sum_mais2 / pt.collisions};
  }
  return pt;
}

namespace {

[[noreturn]] void throw_unusable(const Episode& e, CounterfactualKind kind,
                                 const ProbabilityPoint& pt) {
  throw std::runtime_error(
      "probability point unusable: episode '" + e.id + "', kind " + kind_name(kind) +
      ", intensity " + std::to_string(pt.intensity) + ": " + std::to_string(pt.failures) +
      " failed reps of " + std::to_string(pt.reps + pt.failures));
}

}  // namespace

MarginResult safety_margin(const MarginContext& ctx, CounterfactualKind kind,
                           MarginMode mode) {
  if (!ctx.episode) throw std::invalid_argument("margin context has no episode");
  const MarginSearchConfig& cfg = ctx.search;
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0,1)");
  }
  if (cfg.grid_points < 2) throw std::invalid_argument("grid needs at least 2 points");
  if (cfg.refine_rounds < 0) throw std::invalid_argument("refine rounds must be >= 0");

  const double gamma_max = intensity_max(kind);
  const int G = cfg.grid_points;
  const double base_cell = gamma_max / (G - 1);

  MarginResult res;
  res.episode_id = ctx.episode->id;
  res.kind = kind;
  res.mode = mode;

  // The whole base grid is evaluated (not just up to the first crossing):
  // cross-episode curve aggregation needs every episode on the common grid.
  std::vector<ProbabilityPoint> curve;
  curve.reserve(G + cfg.refine_rounds);
  int cross = -1;
  for (int i = 0; i < G; ++i) {
    const double gamma = gamma_max * i / (G - 1);
    ProbabilityPoint pt = estimate_collision_prob(ctx, kind, gamma, mode);
    if (!pt.usable) throw_unusable(*ctx.episode, kind, pt);
    curve.push_back(pt);
    if (cross < 0 && pt.p_hat > cfg.epsilon) cross = i;
  }

  if (cross < 0) {
    res.censored = true;
    res.grid_resolution = base_cell;
  } else {
    res.censored = false;
    ProbabilityPoint at_margin = curve[cross];
    double sigma = at_margin.intensity;
    double resolution = base_cell;
    if (cross > 0 && cfg.refine_rounds > 0) {
      double lo = gamma_max * (cross - 1) / (G - 1);
      double hi = sigma;
      for (int r = 0; r < cfg.refine_rounds; ++r) {
        const double mid = 0.5 * (lo + hi);
        ProbabilityPoint pm = estimate_collision_prob(ctx, kind, mid, mode);
        if (!pm.usable) throw_unusable(*ctx.episode, kind, pm);
        pm.on_base_grid = false;
        curve.push_back(pm);
        if (pm.p_hat > cfg.epsilon) {
          hi = mid;
          at_margin = pm;
        } else {
          lo = mid;
        }
      }
      sigma = hi;
      resolution = base_cell / std::pow(2.0, cfg.refine_rounds);
    }
    res.margin = sigma;
    res.grid_resolution = resolution;
    res.severity_at_margin = at_margin.mean_collision_severity;
  }

  std::sort(curve.begin(), curve.end(),
            [](const ProbabilityPoint& a, const ProbabilityPoint& b) {
              return a.intensity < b.intensity;
            });
  res.curve = std::move(curve);
  return res;
}

MarginResult lower_bound_margin(const MarginContext& ctx, CounterfactualKind kind) {
  return safety_margin(ctx, kind, MarginMode::NonReactive);
}

MarginResult upper_bound_margin(const MarginContext& ctx, CounterfactualKind kind) {
  return safety_margin(ctx, kind, MarginMode::BestResponse);
}

}  // namespace cfmargin
