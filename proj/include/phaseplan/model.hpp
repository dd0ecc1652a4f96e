#pragma once

// Closed-form completion-time model for phase-decomposed parallel jobs.
//
// A job runs through four phases: initialization, preparation, variable
// sharing (broadcast/accumulate between master and workers) and computation.
// Computation itself splits into a communication part and an execution part,
// and only computation is spread across the n worker nodes:
//
//   t_est = k0 + n * iter * c + (iter * b + a * s_ratio) / n
//
// where k0 = t_init + t_prep, c = coeff * t_vs_baseline,
// a = cf_commn * t_commn_baseline and b is the summed mean cost of the
// n_unit elementary tasks of one iteration.
//
// Everything here is a pure function over immutable values.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace phaseplan {

enum class DeploymentMode { standalone, yarn };
enum class Category { spark_sql, streaming, mllib, graphx };

std::string_view to_string(DeploymentMode mode);
std::string_view to_string(Category category);
/// Throws Error{InvalidInput} on an unknown name.
DeploymentMode parse_mode(std::string_view name);
Category parse_category(std::string_view name);

/// Per-phase durations of one estimate, all in seconds.
struct PhaseBreakdown {
  double t_init = 0;
  double t_prep = 0;
  double t_vs = 0;
  double t_commn = 0;
  double t_exec = 0;
  double t_comp = 0;
  double t_est = 0;
  /// Divisor applied to (t_commn + t_exec) when forming t_comp.
  double comp_divisor = 1;

  bool operator==(const PhaseBreakdown&) const = default;
};

struct TaskMixEntry {
  std::string op;
  std::int64_t count = 1;

  bool operator==(const TaskMixEntry&) const = default;
};

/// Inputs describing the job whose completion time is estimated.
struct WorkloadSpec {
  std::uint64_t dataset_size_bytes = 1;
  std::int64_t iterations = 1;
  DeploymentMode mode = DeploymentMode::standalone;
  Category category = Category::mllib;
  std::vector<TaskMixEntry> task_mix;

  /// Throws Error{InvalidInput} when an invariant is violated.
  void validate() const;
};

/// Constants of the closed form, derived from a job profile and a workload.
struct ModelParams {
  double k0 = 0;
  double a = 0;
  double b = 0;
  double c = 0;
  std::int64_t n_unit = 1;
  double s_ratio = 1;
  // Provenance: k0 == t_init + t_prep.
  double t_init = 0;
  double t_prep = 0;
  std::string source;

  /// Params with no phase provenance; the whole fixed cost lands in t_init.
  static ModelParams from_constants(double k0, double a, double b, double c,
                                    double s_ratio = 1.0, std::int64_t n_unit = 1);

  void validate() const;
};

double variable_sharing_time(double coeff, std::int64_t iter, std::int64_t n, double t_vs_baseline);

double communication_time(double cf_commn, double t_commn_baseline, double s_ratio);

/// Number of elementary tasks the job expands into. With `iter_in_nunit` the
/// iteration count multiplies the task count (the literal form); otherwise only
/// the dataset scale does. Rounds up. Throws Error{ComputationError} on overflow.
std::int64_t unit_task_count(std::int64_t n_unit_baseline, double s_ratio, std::int64_t iter,
                             bool iter_in_nunit);

double execution_time(std::int64_t iter, std::span<const double> unit_task_times);

double computation_time(double t_commn, double t_exec, double n);

PhaseBreakdown estimate_completion(const ModelParams& params, std::int64_t iter, std::int64_t n);

/// Re-estimates with the largest iteration count observed across runs.
PhaseBreakdown update_iteration_bound(const ModelParams& params, std::span<const std::int64_t> observed_iters,
                                      std::int64_t n);

/// Closed form evaluated at a real-valued node count. Used by the continuous
/// relaxation in the planner and by derivative checks.
template <typename Real>
Real completion_time_at(const ModelParams& params, std::int64_t iter, Real n) {
  const Real it = static_cast<Real>(iter);
  const Real linear = it * static_cast<Real>(params.c);
  const Real inverse = it * static_cast<Real>(params.b) +
                       static_cast<Real>(params.a) * static_cast<Real>(params.s_ratio);
  return static_cast<Real>(params.k0) + linear * n + inverse / n;
}

/// Coefficients of t_est(n) = fixed + linear * n + inverse / n for one iteration count.
struct ClosedFormTerms {
  double fixed = 0;
  double linear = 0;
  double inverse = 0;
};

ClosedFormTerms closed_form_terms(const ModelParams& params, std::int64_t iter);

}  // namespace phaseplan
