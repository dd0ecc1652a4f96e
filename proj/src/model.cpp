#include "phaseplan/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "phaseplan/error.hpp"

namespace phaseplan {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::ComputationError: return "ComputationError";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::UnknownRddOp: return "UnknownRddOp";
    case ErrorCode::CategoryMismatch: return "CategoryMismatch";
    case ErrorCode::ProfileNotFound: return "ProfileNotFound";
    case ErrorCode::DuplicateProfile: return "DuplicateProfile";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateInstanceType: return "DuplicateInstanceType";
    case ErrorCode::UnknownInstanceType: return "UnknownInstanceType";
    case ErrorCode::NoProfileForType: return "NoProfileForType";
    case ErrorCode::NoAffordableCluster: return "NoAffordableCluster";
    case ErrorCode::EnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorCode::DidNotConverge: return "DidNotConverge";
    case ErrorCode::ZeroRecorded: return "ZeroRecorded";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingSlo: return "MissingSlo";
  }
  return "Unknown";
}

std::string_view to_string(DeploymentMode mode) {
  return mode == DeploymentMode::yarn ? "yarn" : "standalone";
}

std::string_view to_string(Category category) {
  switch (category) {
    case Category::spark_sql: return "spark_sql";
    case Category::streaming: return "streaming";
    case Category::mllib: return "mllib";
    case Category::graphx: return "graphx";
  }
  return "unknown";
}

DeploymentMode parse_mode(std::string_view name) {
  if (name == "standalone") return DeploymentMode::standalone;
  if (name == "yarn") return DeploymentMode::yarn;
  throw Error(ErrorCode::InvalidInput, "unknown deployment mode '" + std::string(name) + "'");
}

Category parse_category(std::string_view name) {
  for (auto c : {Category::spark_sql, Category::streaming, Category::mllib, Category::graphx}) {
    if (to_string(c) == name) return c;
  }
  throw Error(ErrorCode::InvalidInput, "unknown application category '" + std::string(name) + "'");
}

void WorkloadSpec::validate() const {
  if (iterations < 1) throw Error(ErrorCode::InvalidInput, "iterations must be >= 1");
  if (dataset_size_bytes < 1) throw Error(ErrorCode::InvalidInput, "dataset size must be >= 1 byte");
  if (task_mix.empty()) throw Error(ErrorCode::InvalidInput, "task mix is empty");
  for (const auto& entry : task_mix) {
    if (entry.count < 1) {
      throw Error(ErrorCode::InvalidInput, "task mix count for '" + entry.op + "' must be >= 1");
    }
  }
}

ModelParams ModelParams::from_constants(double k0, double a, double b, double c, double s_ratio,
                                        std::int64_t n_unit) {
  ModelParams p;
  p.k0 = k0;
  p.a = a;
  p.b = b;
  p.c = c;
  p.s_ratio = s_ratio;
  p.n_unit = n_unit;
  p.t_init = k0;
  p.t_prep = 0;
  p.source = "constants";
  return p;
}

void ModelParams::validate() const {
  auto nonneg = [](double v) { return std::isfinite(v) && v >= 0; };
  if (!nonneg(k0) || !nonneg(a) || !nonneg(b) || !nonneg(c)) {
    throw Error(ErrorCode::InvalidInput, "model constants k0, a, b, c must be finite and >= 0");
  }
  if (n_unit < 1) throw Error(ErrorCode::InvalidInput, "n_unit must be >= 1");
  if (!(s_ratio > 0) || !std::isfinite(s_ratio)) throw Error(ErrorCode::InvalidInput, "s_ratio must be > 0");
  if (!nonneg(t_init) || !nonneg(t_prep)) throw Error(ErrorCode::InvalidInput, "t_init, t_prep must be >= 0");
}

double variable_sharing_time(double coeff, std::int64_t iter, std::int64_t n, double t_vs_baseline) {
  return coeff * static_cast<double>(iter) * static_cast<double>(n) * t_vs_baseline;
}

double communication_time(double cf_commn, double t_commn_baseline, double s_ratio) {
  return cf_commn * t_commn_baseline * s_ratio;
}

std::int64_t unit_task_count(std::int64_t n_unit_baseline, double s_ratio, std::int64_t iter,
                             bool iter_in_nunit) {
  if (n_unit_baseline < 1 || !(s_ratio > 0) || iter < 1) {
    throw Error(ErrorCode::InvalidInput, "unit_task_count needs n_unit_baseline >= 1, s_ratio > 0, iter >= 1");
  }
  double tasks = static_cast<double>(n_unit_baseline) * s_ratio;
  if (iter_in_nunit) tasks *= static_cast<double>(iter);
  // Products such as 164 * 0.1 * 10 land one ulp above the integer; do not
  // charge a whole extra task for that.
  const double rounded = std::ceil(tasks * (1.0 - 1e-12));
  if (!std::isfinite(rounded) || rounded >= 9.2e18) {
    throw Error(ErrorCode::ComputationError, "unit task count overflows the integer range");
  }
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(rounded));
}

double execution_time(std::int64_t iter, std::span<const double> unit_task_times) {
  return static_cast<double>(iter) * std::accumulate(unit_task_times.begin(), unit_task_times.end(), 0.0);
}

double computation_time(double t_commn, double t_exec, double n) { return (t_commn + t_exec) / n; }

PhaseBreakdown estimate_completion(const ModelParams& params, std::int64_t iter, std::int64_t n) {
  if (n < 1 || iter < 1) throw Error(ErrorCode::InvalidInput, "estimate needs n >= 1 and iter >= 1");
  PhaseBreakdown out;
  out.t_init = params.t_init;
  out.t_prep = params.t_prep;
  out.t_vs = params.c * static_cast<double>(iter) * static_cast<double>(n);
  out.t_commn = params.a * params.s_ratio;
  out.t_exec = static_cast<double>(iter) * params.b;
  out.comp_divisor = static_cast<double>(n);
  out.t_comp = computation_time(out.t_commn, out.t_exec, out.comp_divisor);
  out.t_est = out.t_init + out.t_prep + out.t_vs + out.t_comp;
  return out;
}

PhaseBreakdown update_iteration_bound(const ModelParams& params, std::span<const std::int64_t> observed_iters,
                                      std::int64_t n) {
  if (observed_iters.empty()) throw Error(ErrorCode::InvalidInput, "no observed iteration counts");
  const auto bound = *std::max_element(observed_iters.begin(), observed_iters.end());
  if (*std::min_element(observed_iters.begin(), observed_iters.end()) < 1) {
    throw Error(ErrorCode::InvalidInput, "observed iteration counts must be >= 1");
  }
  return estimate_completion(params, bound, n);
}

ClosedFormTerms closed_form_terms(const ModelParams& params, std::int64_t iter) {
  const double it = static_cast<double>(iter);
  return {params.k0, it * params.c, it * params.b + params.a * params.s_ratio};
}

}  // namespace phaseplan
