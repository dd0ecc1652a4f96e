#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "phaseplan/planner.hpp"

namespace phaseplan::detail {

/// A fully evaluated composition.
struct Scored {
  std::vector<std::int64_t> counts;
  double t_est = 0;
  std::optional<PhaseBreakdown> breakdown;
  double cost = 0;
  bool feasible = false;
};

enum class RankBy { cost, time };

/// Strict "a ranks before b". Cost- or time-first, then the other metric
/// (time-first only), smaller total node count, then the count vector in type
/// name order with larger counts on earlier names winning.
bool ranks_before(const Scored& a, const Scored& b, RankBy rank);

std::optional<Scored> score(const PlanProblem& problem, std::vector<std::int64_t> counts);

/// Sorted, deduplicated node counts a single type may take (>= 1).
std::vector<std::int64_t> node_candidates(const PlanProblem& problem, std::size_t type_index);

PlanResult to_result(const PlanProblem& problem, const Scored& scored, PlanMethod method);

}  // namespace phaseplan::detail
