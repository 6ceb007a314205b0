// Threshold search: Wilson intervals, censoring, the margin invariant,
// worker invariance and the non-reactive/best-response ordering.

#include <cmath>

#include "cfmargin/margin.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cfmargin;

namespace {

Episode run_fixture(const ScenarioFile& sc) {
  return simulate(sc, sc.seed, std::llround(sc.duration / sc.dt));
}

MarginContext context_for(const Episode& e, int reps = 50) {
  MarginContext ctx;
  ctx.episode = &e;
  ctx.ego_id = "ego";
  ctx.ego_policy = PolicySpec{"Replay", IdmParams{}};
  ctx.search.reps = reps;
  ctx.search.workers = 1;
  ctx.seed = 2026;
  return ctx;
}

// The search contract: the margin is the smallest tested intensity whose
// estimate exceeds epsilon, every tested intensity strictly below it stays at
// or under epsilon, and the curve is strictly ascending in intensity.
void check_margin_invariant(const MarginResult& r, double epsilon, int grid_points) {
  REQUIRE(!r.curve.empty());
  int on_grid = 0;
  for (std::size_t i = 0; i < r.curve.size(); ++i) {
    if (r.curve[i].on_base_grid) ++on_grid;
    if (i > 0) CHECK(r.curve[i].intensity > r.curve[i - 1].intensity);
    CHECK(r.curve[i].usable);
  }
  CHECK(on_grid == grid_points);

  if (r.censored) {
    for (const ProbabilityPoint& pt : r.curve) CHECK(pt.p_hat <= epsilon);
    return;
  }
  bool margin_seen = false;
  for (const ProbabilityPoint& pt : r.curve) {
    if (pt.intensity == r.margin) {
      margin_seen = true;
      CHECK(pt.p_hat > epsilon);
    } else if (pt.intensity < r.margin) {
      CHECK(pt.p_hat <= epsilon);
    }
  }
  CHECK(margin_seen);
  CHECK(r.grid_resolution > 0.0);
}

}  // namespace

TEST_CASE("wilson_interval brackets the point estimate") {
  const WilsonInterval empty = wilson_interval(0, 0);
  CHECK(empty.low == 0.0);
  CHECK(empty.high == 1.0);

  const WilsonInterval zero = wilson_interval(0, 50);
  CHECK(zero.low == 0.0);
  CHECK(zero.high > 0.0);
  CHECK(zero.high < 0.2);

  const WilsonInterval mid = wilson_interval(25, 50);
  CHECK(mid.low > 0.3);
  CHECK(mid.low < 0.5);
  CHECK(mid.high > 0.5);
  CHECK(mid.high < 0.7);
  // Hand-computed score interval for 25/50 at z = 1.96.
  CHECK(mid.low == doctest::Approx(0.36644285).epsilon(1e-5));
  CHECK(mid.high == doctest::Approx(0.63355715).epsilon(1e-5));
  CHECK(mid.low + mid.high == doctest::Approx(1.0).epsilon(1e-12));

  const WilsonInterval full = wilson_interval(50, 50);
  CHECK(full.high == 1.0);
  CHECK(full.low > 0.9);
}

TEST_CASE("a lone car censors every kind") {
  const Episode e = run_fixture(testfix::lone_car_fixture());
  const MarginContext ctx = context_for(e, 10);

  for (CounterfactualKind kind :
       {CounterfactualKind::Aggressiveness, CounterfactualKind::Unseen}) {
    const MarginResult r = lower_bound_margin(ctx, kind);
    CHECK(r.censored);
    CHECK(r.kind == kind);
    CHECK(r.mode == MarginMode::NonReactive);
    for (const ProbabilityPoint& pt : r.curve) {
      CHECK(pt.p_hat == 0.0);
      CHECK(pt.collisions == 0);
    }
    check_margin_invariant(r, ctx.search.epsilon, ctx.search.grid_points);
    // Deterministic kind: the short-circuit runs one rep per point.
    CHECK(r.curve.front().reps == 1);
  }
}

TEST_CASE("impaired reflexes on the tailgater crosses and obeys the invariant") {
  const Episode e = run_fixture(testfix::rear_end_fixture());
  const MarginContext ctx = context_for(e);

  const MarginResult r = lower_bound_margin(ctx, CounterfactualKind::ImpairedReflexes);
  CHECK(!r.censored);
  CHECK(r.margin > 0.0);
  CHECK(r.margin <= 1.0);
  check_margin_invariant(r, ctx.search.epsilon, ctx.search.grid_points);

  // Deterministic kind, grid cell 0.1, four bisection rounds.
  CHECK(r.grid_resolution == doctest::Approx(0.1 / 16.0));
  // The margin estimate at a deterministic kind is exactly 1.
  bool found = false;
  for (const ProbabilityPoint& pt : r.curve) {
    if (pt.intensity == r.margin) {
      found = true;
      CHECK(pt.p_hat == 1.0);
      CHECK(pt.mean_collision_severity.p_mais2plus > 0.0);
    }
  }
  CHECK(found);
}

TEST_CASE("point estimates are identical across worker counts") {
  const Episode e = run_fixture(testfix::signal_cross_fixture());
  MarginContext one = context_for(e, 24);
  MarginContext four = context_for(e, 24);
  four.search.workers = 4;

  const double gamma = 2.5;
  const ProbabilityPoint a =
      estimate_collision_prob(one, CounterfactualKind::Distraction, gamma, MarginMode::NonReactive);
  const ProbabilityPoint b =
      estimate_collision_prob(four, CounterfactualKind::Distraction, gamma, MarginMode::NonReactive);

  CHECK(a.reps == b.reps);
  CHECK(a.collisions == b.collisions);
  CHECK(a.failures == b.failures);
  CHECK(a.p_hat == b.p_hat);
  CHECK(a.mean_collision_severity.p_mais3plus == b.mean_collision_severity.p_mais3plus);
  CHECK(a.reps == 24);
}

TEST_CASE("best response never collides more than the replayed ego") {
  const Episode e = run_fixture(testfix::rear_end_fixture());
  MarginContext ctx = context_for(e, 8);

  for (double gamma : {0.4, 0.7, 1.0}) {
    const ProbabilityPoint nr = estimate_collision_prob(
        ctx, CounterfactualKind::ImpairedReflexes, gamma, MarginMode::NonReactive);
    const ProbabilityPoint br = estimate_collision_prob(
        ctx, CounterfactualKind::ImpairedReflexes, gamma, MarginMode::BestResponse);
    CHECK(br.collisions <= nr.collisions);
    CHECK(br.reps == nr.reps);
  }
}

TEST_CASE("bound ordering: non-reactive margin at or below best response") {
  const Episode e = run_fixture(testfix::rear_end_fixture());
  const MarginContext ctx = context_for(e, 12);

  const MarginResult nr = lower_bound_margin(ctx, CounterfactualKind::ImpairedReflexes);
  const MarginResult br = upper_bound_margin(ctx, CounterfactualKind::ImpairedReflexes);
  CHECK(nr.mode == MarginMode::NonReactive);
  CHECK(br.mode == MarginMode::BestResponse);

  const double nr_margin = nr.censored ? std::numeric_limits<double>::infinity() : nr.margin;
  const double br_margin = br.censored ? std::numeric_limits<double>::infinity() : br.margin;
  CHECK(nr_margin <= br_margin);
  CHECK(!nr.censored);  // the fixture is built to cross in this kind
}

TEST_CASE("best_response rescues a recoverable rear-end realization") {
  const Episode e = run_fixture(testfix::rear_end_fixture());
  // Past the non-reactive margin the replayed ego collides; check the search
  // machinery reports candidate accounting either way.
  const CounterfactualSetup setup = build_counterfactual(
      e, CounterfactualAssignment{CounterfactualKind::ImpairedReflexes, 1.0, "ego"},
      PolicySpec{"Replay", IdmParams{}}, 2026);
  const Episode worst = realize(setup, 0);
  REQUIRE(agent_collided(check_contacts(worst), setup.ego_index));

  const BestResponseOutcome out = best_response(setup, 0, SeverityModel{}, false);
  CHECK(out.rollouts > 0);
  CHECK(out.trajectory.size() == static_cast<std::size_t>(e.horizon + 1));
  if (!out.collided) {
    CHECK(out.severity.p_mais2plus == 0.0);
  }
}
