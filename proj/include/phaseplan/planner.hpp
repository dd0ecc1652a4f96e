#pragma once

// Cluster-composition planning on top of the closed-form model.
//
// Two problems are solved:
//   * min_cost_under_slo:   minimize usage cost subject to t_est <= slo
//   * min_time_under_budget: minimize t_est subject to usage cost <= budget
//
// Homogeneous plans (one instance type at a time) use the shape of the model
// directly: t_est(n) = k0 + alpha*n + gamma/n is convex in n and the cost
// n * t_est(n) is nondecreasing, so the cheapest SLO-feasible size is the
// smallest one. Heterogeneous plans pool several types using the reference
// type's profile:
//
//   t_est = k0 + iter*c*n_total + (iter*b + a*s_ratio) / n_eff
//   n_total = sum n_t,   n_eff = sum n_t * speed_factor_t
//
// and are solved either by exhaustive enumeration or by a log-barrier
// interior-point solve of the continuous relaxation followed by rounding.
//
// brute_force_plan() is the reference answer for every other entry point.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phaseplan/catalog.hpp"
#include "phaseplan/model.hpp"
#include "phaseplan/profiles.hpp"

namespace phaseplan {

enum class Objective { min_cost_under_slo, min_time_under_budget };
enum class PlanMethod { analytic, relaxation_rounded, brute_force };

std::string_view to_string(Objective objective);
std::string_view to_string(PlanMethod method);
Objective parse_objective(std::string_view name);

/// Closed integer interval [lo, hi]; hi is nullopt when unbounded above.
struct NodeInterval {
  std::int64_t lo = 1;
  std::optional<std::int64_t> hi;

  bool contains(std::int64_t n) const { return n >= lo && (!hi || n <= *hi); }
  bool operator==(const NodeInterval&) const = default;
};

/// The integer node counts n >= 1 with t_est(n) <= slo, or nullopt when there
/// are none.
std::optional<NodeInterval> feasible_interval(const ModelParams& params, std::int64_t iter, double slo);

/// Measured or precomputed completion times for one instance type, keyed by
/// (iterations, nodes). Lets the planner work over a fixed table of estimates
/// instead of the closed form.
class EstimateTable {
 public:
  void add(std::int64_t iter, std::int64_t n, double t_est);
  std::optional<double> lookup(std::int64_t iter, std::int64_t n) const;
  /// Node counts present for `iter`, ascending.
  std::vector<std::int64_t> node_counts(std::int64_t iter) const;
  bool empty() const { return entries_.empty(); }

  /// CSV with at least the columns iter,n,t_est.
  static EstimateTable parse_csv(std::string_view csv_text);

 private:
  std::map<std::pair<std::int64_t, std::int64_t>, double> entries_;
};

/// Planning request in terms of the job and the stores it refers to.
struct PlanRequest {
  WorkloadSpec workload;
  const ProfileRegistry* profiles = nullptr;
  const Catalog* catalog = nullptr;
  Objective objective = Objective::min_cost_under_slo;
  std::optional<double> slo_seconds;
  std::optional<double> budget;
  std::int64_t n_max = 200;
  bool heterogeneous = false;
  Billing billing = Billing::linear;

  /// Restricts the node counts considered per type (empty: 1..n_max).
  std::vector<std::int64_t> candidate_nodes;
  /// Restricts the catalog types considered (empty: all).
  std::vector<std::string> instance_types;
  /// Per-type tabulated estimates replacing the closed form for that type.
  std::map<std::string, EstimateTable> tabulated;
  BuildOptions build;
  std::uint64_t enumeration_cap = 10'000'000;
  int relax_iteration_cap = 500;
  /// Worker threads for brute-force enumeration.
  unsigned workers = 1;
};

/// One candidate instance type with the model used to evaluate it.
struct TypeOption {
  InstanceType type;
  std::optional<ModelParams> params;
  std::optional<EstimateTable> table;
};

/// A request with every store lookup already resolved. Types are ordered by
/// name; this is the form the solvers work on and the one tests build directly.
struct PlanProblem {
  std::vector<TypeOption> types;
  /// Reference-type params used by the pooled (heterogeneous) model.
  std::optional<ModelParams> pooled_params;
  std::int64_t iter = 1;
  Objective objective = Objective::min_cost_under_slo;
  std::optional<double> slo_seconds;
  std::optional<double> budget;
  std::int64_t n_max = 200;
  std::vector<std::int64_t> candidate_nodes;
  bool heterogeneous = false;
  Billing billing = Billing::linear;
  std::uint64_t enumeration_cap = 10'000'000;
  int relax_iteration_cap = 500;
  unsigned workers = 1;

  void validate() const;
};

PlanProblem resolve(const PlanRequest& request);

/// Homogeneous problem over a single type with the given closed-form params.
PlanProblem single_type_problem(const ModelParams& params, std::int64_t iter, InstanceType type = {"node", 1.0, 1.0});

struct PlanResult {
  ClusterComposition composition;
  double t_est = 0;
  /// Absent when the estimate came from a tabulated source.
  std::optional<PhaseBreakdown> breakdown;
  double cost = 0;
  bool feasible = false;
  PlanMethod method = PlanMethod::analytic;
  Objective objective = Objective::min_cost_under_slo;
  /// slo - t_est for min-cost plans, budget - cost for min-time plans.
  double margin = 0;
};

PlanResult plan_min_cost(const PlanProblem& problem);
PlanResult plan_min_cost(const PlanRequest& request);

/// Throws Error{NoAffordableCluster} when nothing fits the budget.
PlanResult plan_min_time(const PlanProblem& problem);
PlanResult plan_min_time(const PlanRequest& request);

/// Exhaustive enumeration. Throws Error{EnumerationCapExceeded} when the grid
/// is larger than problem.enumeration_cap.
PlanResult brute_force_plan(const PlanProblem& problem);
PlanResult brute_force_plan(const PlanRequest& request);

/// Number of compositions brute_force_plan would evaluate.
std::uint64_t enumeration_size(const PlanProblem& problem);

enum class RelaxationStatus { converged, certified_infeasible };

struct RelaxedSolution {
  /// Continuous node counts, aligned with PlanProblem::types.
  std::vector<double> counts;
  double objective = 0;
  int newton_iterations = 0;
  double barrier_gap = 0;
  RelaxationStatus status = RelaxationStatus::converged;
  PlanResult rounded;
};

/// Log-barrier interior-point solve of the continuous relaxation of the
/// pooled model, then the best feasible rounding among {floor-1..ceil+1} per
/// type. Throws Error{DidNotConverge} past problem.relax_iteration_cap Newton
/// steps.
RelaxedSolution relaxed_minimize(const PlanProblem& problem);
RelaxedSolution relaxed_minimize(const PlanRequest& request);

/// Dispatches on objective and mode: analytic fast paths for homogeneous
/// problems; enumeration for pooled ones within the cap, relaxation beyond it.
PlanResult plan(const PlanProblem& problem);

struct CompositionEstimate {
  double t_est = 0;
  std::optional<PhaseBreakdown> breakdown;
};

/// t_est of an explicit composition (counts aligned with PlanProblem::types)
/// under the problem's model: the pooled model when heterogeneous, otherwise
/// the single nonzero type's own model. nullopt when the composition is empty
/// or a tabulated type lacks the entry.
std::optional<CompositionEstimate> evaluate_composition(const PlanProblem& problem,
                                                        const std::vector<std::int64_t>& counts);

/// Usage cost of a composition (counts aligned with PlanProblem::types).
double composition_cost(const PlanProblem& problem, const std::vector<std::int64_t>& counts, double t_est);

ClusterComposition to_composition(const PlanProblem& problem, const std::vector<std::int64_t>& counts);

}  // namespace phaseplan
