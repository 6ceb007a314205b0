#pragma once

#include <cstdint>
#include <vector>

#include "cfmargin/scenario.hpp"

namespace cfmargin::suite {

/// The shipped evaluation suite: 100 scenarios in four families
/// (car-following chains, unsignalized crossings, stop-sign intersections,
/// traffic-light intersections), split 50 high-speed / 50 low-speed by mean
/// initial speed. Every scenario is nominally collision-free; risk appears
/// only under counterfactual perturbation. Deterministic in `seed`.
std::vector<ScenarioFile> generate_suite(std::uint64_t seed);

/// Speed threshold separating the high and low split (m/s).
inline constexpr double kSpeedSplit = 12.0;

}  // namespace cfmargin::suite
