// Continuous relaxation of the pooled planning problem, solved with a
// log-barrier method and rounded back to whole nodes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Dense>

#include "phaseplan/error.hpp"
#include "phaseplan/planner.hpp"
#include "planner_internal.hpp"

namespace phaseplan {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kGapTolerance = 1e-8;
constexpr double kNewtonTolerance = 1e-10;
constexpr double kArmijo = 0.25;
constexpr std::uint64_t kNeighborhoodLimit = 1'000'000;

// T(x) = fixed + linear * sum(x) + inverse / (speed . x)
struct Relaxation {
  double fixed = 0;
  double linear = 0;
  double inverse = 0;
  VectorXd speed;
  VectorXd price;  // currency per node-second
  double n_max = 1;
  Objective objective = Objective::min_cost_under_slo;
  double limit = 0;  // slo or budget
  bool constrained = true;

  int size() const { return static_cast<int>(speed.size()); }
  int barrier_terms() const { return 2 * size() + 1 + (constrained ? 1 : 0); }

  double time(const VectorXd& x) const { return fixed + linear * x.sum() + inverse / speed.dot(x); }

  void time_derivatives(const VectorXd& x, double& t, VectorXd& grad, MatrixXd& hess) const {
    const double e = speed.dot(x);
    t = fixed + linear * x.sum() + inverse / e;
    grad = VectorXd::Constant(size(), linear) - (inverse / (e * e)) * speed;
    hess = (2.0 * inverse / (e * e * e)) * speed * speed.transpose();
  }

  void cost_derivatives(const VectorXd& x, double& c, VectorXd& grad, MatrixXd& hess) const {
    double t;
    VectorXd gt;
    MatrixXd ht;
    time_derivatives(x, t, gt, ht);
    const double rate = price.dot(x);
    c = rate * t;
    grad = price * t + rate * gt;
    hess = price * gt.transpose() + gt * price.transpose() + rate * ht;
  }

  // Objective (f) and the coupling constraint (g <= 0) with derivatives.
  void objective_and_constraint(const VectorXd& x, double& f, VectorXd& gf, MatrixXd& hf, double& g, VectorXd& gg,
                                MatrixXd& hg) const {
    if (objective == Objective::min_cost_under_slo) {
      cost_derivatives(x, f, gf, hf);
      time_derivatives(x, g, gg, hg);
    } else {
      time_derivatives(x, f, gf, hf);
      cost_derivatives(x, g, gg, hg);
    }
    g -= limit;
  }

  double objective_value(const VectorXd& x) const {
    const double t = time(x);
    return objective == Objective::min_cost_under_slo ? price.dot(x) * t : t;
  }

  bool strictly_feasible(const VectorXd& x) const {
    if (!(x.sum() > 1)) return false;
    for (int i = 0; i < size(); ++i) {
      if (!(x[i] > 0 && x[i] < n_max)) return false;
    }
    if (!constrained) return true;
    const double t = time(x);
    const double v = objective == Objective::min_cost_under_slo ? t : price.dot(x) * t;
    return v < limit;
  }

  // Barrier function value; +inf outside the strict interior.
  double barrier(const VectorXd& x) const {
    if (!strictly_feasible(x)) return std::numeric_limits<double>::infinity();
    double b = -std::log(x.sum() - 1);
    for (int i = 0; i < size(); ++i) b -= std::log(x[i]) + std::log(n_max - x[i]);
    if (constrained) {
      const double t = time(x);
      const double v = objective == Objective::min_cost_under_slo ? t : price.dot(x) * t;
      b -= std::log(limit - v);
    }
    return b;
  }
};

Relaxation build_relaxation(const PlanProblem& problem, bool constrained) {
  const auto m = static_cast<int>(problem.types.size());
  Relaxation r;
  const ModelParams* params = nullptr;
  if (problem.heterogeneous) {
    params = &*problem.pooled_params;
  } else {
    if (m != 1) throw Error(ErrorCode::InvalidInput, "relaxation of a homogeneous plan needs exactly one type");
    if (!problem.types[0].params) throw Error(ErrorCode::InvalidInput, "relaxation needs closed-form params");
    params = &*problem.types[0].params;
  }
  const auto terms = closed_form_terms(*params, problem.iter);
  r.fixed = terms.fixed;
  r.linear = terms.linear;
  r.inverse = terms.inverse;
  r.speed.resize(m);
  r.price.resize(m);
  for (int i = 0; i < m; ++i) {
    const auto& t = problem.types[static_cast<std::size_t>(i)];
    r.speed[i] = problem.heterogeneous ? t.type.speed_factor : 1.0;
    r.price[i] = t.type.hourly_cost / 3600.0;
  }
  r.n_max = static_cast<double>(problem.n_max);
  r.objective = problem.objective;
  r.limit = problem.objective == Objective::min_cost_under_slo ? *problem.slo_seconds : *problem.budget;
  r.constrained = constrained;
  return r;
}

// Lower bounds on the constrained quantity over the relaxed domain; when they
// already exceed the limit no composition can be feasible.
bool certified_infeasible(const Relaxation& r) {
  const double s_max = r.speed.maxCoeff();
  const double n_hi = r.n_max * r.size();
  if (r.objective == Objective::min_cost_under_slo) {
    double n = r.linear > 0 ? std::sqrt(r.inverse / (r.linear * s_max)) : n_hi;
    n = std::clamp(n, 1.0, n_hi);
    return r.fixed + r.linear * n + r.inverse / (s_max * n) > r.limit;
  }
  const double p_min = r.price.minCoeff();
  return p_min * (r.fixed + r.linear + r.inverse / s_max) > r.limit;
}

// Strictly feasible start: several directions scaled over a log grid of totals.
std::optional<VectorXd> interior_start(const Relaxation& r) {
  const int m = r.size();
  std::vector<VectorXd> directions;
  directions.push_back(VectorXd::Constant(m, 1.0 / m));
  if (m > 1) {
    for (int i = 0; i < m; ++i) {
      VectorXd d = VectorXd::Constant(m, 0.1 / (m - 1));
      d[i] = 0.9;
      directions.push_back(d);
    }
  }
  std::optional<VectorXd> best;
  double best_value = std::numeric_limits<double>::infinity();
  constexpr int kSteps = 400;
  for (const auto& d : directions) {
    const double reach = 0.999 * r.n_max / d.maxCoeff();
    const double lo = std::log(1.001);
    const double hi = std::log(std::max(reach, 1.002));
    for (int k = 0; k <= kSteps; ++k) {
      const VectorXd x = d * std::exp(lo + (hi - lo) * k / kSteps);
      if (!r.strictly_feasible(x)) continue;
      const double v = r.objective_value(x);
      if (v < best_value) {
        best_value = v;
        best = x;
      }
    }
  }
  return best;
}

struct BarrierOutcome {
  VectorXd x;
  int steps = 0;
  double gap = 0;
};

BarrierOutcome barrier_solve(const Relaxation& r, VectorXd x, int step_cap) {
  const int m = r.size();
  const int p = r.barrier_terms();
  const double f0 = std::max(std::abs(r.objective_value(x)), 1e-300);
  int steps = 0;
  double mu = 1.0;

  auto merit = [&](const VectorXd& y) {
    const double b = r.barrier(y);
    if (!std::isfinite(b)) return std::numeric_limits<double>::infinity();
    return r.objective_value(y) / f0 + mu * b;
  };

  while (true) {
    for (;;) {
      double f, g;
      VectorXd gf, gg;
      MatrixXd hf, hg;
      r.objective_and_constraint(x, f, gf, hf, g, gg, hg);
      VectorXd grad = gf / f0;
      MatrixXd hess = hf / f0;
      auto add_log = [&](double slack, const VectorXd& ds, const MatrixXd* hs) {
        // -log(slack) with slack > 0 and gradient/Hessian of slack given.
        grad -= mu * ds / slack;
        hess += mu * (ds * ds.transpose()) / (slack * slack);
        if (hs) hess -= mu * *hs / slack;
      };
      if (r.constrained) {
        const MatrixXd neg_hg = -hg;
        add_log(-g, -gg, &neg_hg);
      }
      add_log(x.sum() - 1, VectorXd::Ones(m), nullptr);
      for (int i = 0; i < m; ++i) {
        VectorXd e = VectorXd::Zero(m);
        e[i] = 1;
        add_log(x[i], e, nullptr);
        add_log(r.n_max - x[i], -e, nullptr);
      }

      // The pooled cost is not convex in general: clamp the spectrum.
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(hess);
      VectorXd lambda = eig.eigenvalues();
      const double floor = 1e-12 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
      for (int i = 0; i < m; ++i) lambda[i] = std::max(std::abs(lambda[i]), floor);
      const VectorXd dir = -(eig.eigenvectors() * (eig.eigenvectors().transpose() * grad).cwiseQuotient(lambda));
      const double decrement = -grad.dot(dir);
      if (!(decrement > 2 * kNewtonTolerance)) break;

      if (++steps > step_cap) {
        throw Error(ErrorCode::DidNotConverge,
                    "relaxation exceeded " + std::to_string(step_cap) + " Newton steps (gap " + std::to_string(p * mu) + ")");
      }
      const double current = merit(x);
      double step = 1.0;
      bool moved = false;
      while (step > 1e-16) {
        const VectorXd y = x + step * dir;
        if (merit(y) <= current - kArmijo * step * decrement) {
          x = y;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    if (p * mu < kGapTolerance) break;
    mu /= 10.0;
  }
  return {x, steps, p * mu};
}

// Integer values near a relaxed count for one type.
std::vector<std::int64_t> neighborhood(const std::vector<std::int64_t>& candidates, double value, bool allow_zero,
                                       bool wide) {
  const auto lo = static_cast<std::int64_t>(std::floor(value)) - (wide ? 1 : 0);
  const auto hi = static_cast<std::int64_t>(std::ceil(value)) + (wide ? 1 : 0);
  std::set<std::int64_t> out;
  if (allow_zero && lo <= 0) out.insert(0);
  auto first = std::lower_bound(candidates.begin(), candidates.end(), lo);
  auto last = std::upper_bound(candidates.begin(), candidates.end(), hi);
  out.insert(first, last);
  if (first != candidates.begin()) out.insert(*std::prev(first));
  if (last != candidates.end()) out.insert(*last);
  return {out.begin(), out.end()};
}

std::optional<PlanResult> round_solution(const PlanProblem& problem, const std::vector<double>& relaxed) {
  const auto m = problem.types.size();
  std::vector<std::vector<std::int64_t>> axes;
  auto build = [&](bool wide) {
    axes.clear();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < m; ++i) {
      axes.push_back(neighborhood(detail::node_candidates(problem, i), relaxed[i], problem.heterogeneous, wide));
      total = axes.back().empty() ? 0 : std::min<std::uint64_t>(total * axes.back().size(), kNeighborhoodLimit + 1);
    }
    return total;
  };
  auto size = build(true);
  if (size > kNeighborhoodLimit) size = build(false);
  if (size > kNeighborhoodLimit) {
    throw Error(ErrorCode::EnumerationCapExceeded, "rounding neighborhood too large for " + std::to_string(m) + " types");
  }

  const auto rank = problem.objective == Objective::min_cost_under_slo ? detail::RankBy::cost : detail::RankBy::time;
  std::optional<detail::Scored> feasible;
  std::optional<detail::Scored> fastest;
  std::vector<std::size_t> digit(m, 0);
  for (std::uint64_t k = 0; k < size; ++k) {
    std::vector<std::int64_t> counts(m);
    for (std::size_t i = 0; i < m; ++i) counts[i] = axes[i][digit[i]];
    if (auto s = detail::score(problem, counts)) {
      if (!fastest || detail::ranks_before(*s, *fastest, detail::RankBy::time)) fastest = *s;
      if (s->feasible && (!feasible || detail::ranks_before(*s, *feasible, rank))) feasible = std::move(*s);
    }
    for (std::size_t i = m; i-- > 0;) {
      if (++digit[i] < axes[i].size()) break;
      digit[i] = 0;
    }
  }
  if (feasible) return detail::to_result(problem, *feasible, PlanMethod::relaxation_rounded);
  if (fastest && problem.objective == Objective::min_cost_under_slo) {
    return detail::to_result(problem, *fastest, PlanMethod::relaxation_rounded);
  }
  return std::nullopt;
}

}  // namespace

RelaxedSolution relaxed_minimize(const PlanProblem& problem) {
  problem.validate();
  for (const auto& t : problem.types) {
    if (t.table) throw Error(ErrorCode::InvalidInput, "relaxation needs closed-form estimates, not a table");
  }
  auto relax = build_relaxation(problem, true);
  RelaxedSolution out;

  if (certified_infeasible(relax)) {
    if (problem.objective == Objective::min_time_under_budget) {
      throw Error(ErrorCode::NoAffordableCluster, "no composition fits within budget " + std::to_string(*problem.budget));
    }
    // Best effort: the fastest composition, without the deadline.
    out.status = RelaxationStatus::certified_infeasible;
    relax.constrained = false;
    relax.objective = Objective::min_time_under_budget;
  }

  auto start = interior_start(relax);
  if (!start) {
    throw Error(ErrorCode::DidNotConverge, "no strictly feasible starting point found for the relaxation");
  }
  const auto solved = barrier_solve(relax, *start, problem.relax_iteration_cap);
  out.counts.assign(solved.x.data(), solved.x.data() + solved.x.size());
  out.objective = relax.objective_value(solved.x);
  out.newton_iterations = solved.steps;
  out.barrier_gap = solved.gap;

  auto rounded = round_solution(problem, out.counts);
  if (!rounded) {
    if (problem.objective == Objective::min_time_under_budget) {
      throw Error(ErrorCode::NoAffordableCluster, "no rounding of the relaxed plan fits within budget");
    }
    throw Error(ErrorCode::DidNotConverge, "no integer composition near the relaxed plan");
  }
  out.rounded = *rounded;
  return out;
}

RelaxedSolution relaxed_minimize(const PlanRequest& request) { return relaxed_minimize(resolve(request)); }

}  // namespace phaseplan
