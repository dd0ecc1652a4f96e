#include "phaseplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <set>

#include "phaseplan/csv.hpp"
#include "phaseplan/error.hpp"
#include "planner_internal.hpp"

namespace phaseplan {

std::string_view to_string(Objective objective) {
  return objective == Objective::min_cost_under_slo ? "min_cost_under_slo" : "min_time_under_budget";
}

std::string_view to_string(PlanMethod method) {
  switch (method) {
    case PlanMethod::analytic: return "analytic";
    case PlanMethod::relaxation_rounded: return "relaxation_rounded";
    case PlanMethod::brute_force: return "brute_force";
  }
  return "unknown";
}

Objective parse_objective(std::string_view name) {
  if (name == "min_cost_under_slo") return Objective::min_cost_under_slo;
  if (name == "min_time_under_budget") return Objective::min_time_under_budget;
  throw Error(ErrorCode::InvalidInput, "unknown objective '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Feasible node interval

std::optional<NodeInterval> feasible_interval(const ModelParams& params, std::int64_t iter, double slo) {
  params.validate();
  if (iter < 1) throw Error(ErrorCode::InvalidInput, "feasible_interval: iter must be >= 1");
  if (!(slo > 0)) throw Error(ErrorCode::InvalidInput, "feasible_interval: slo must be > 0");

  constexpr double kHugeNodes = 4e18;
  constexpr int kMaxNudges = 64;
  const auto terms = closed_form_terms(params, iter);
  auto ok = [&](std::int64_t n) { return estimate_completion(params, iter, n).t_est <= slo; };

  // Real roots of linear*n^2 + (fixed - slo)*n + inverse <= 0, rounded inward,
  // then nudged so the end points agree with the evaluated model exactly.
  auto settle_lo = [&](std::int64_t lo, std::int64_t hi_limit) -> std::optional<std::int64_t> {
    lo = std::max<std::int64_t>(1, lo);
    for (int i = 0; i < kMaxNudges && lo > 1 && ok(lo - 1); ++i) --lo;
    for (int i = 0; i < kMaxNudges && lo <= hi_limit && !ok(lo); ++i) ++lo;
    if (lo > hi_limit || !ok(lo)) return std::nullopt;
    return lo;
  };

  if (terms.linear == 0) {
    if (terms.inverse == 0) {
      if (!ok(1)) return std::nullopt;
      return NodeInterval{1, std::nullopt};
    }
    if (slo <= terms.fixed) return std::nullopt;
    const double root = terms.inverse / (slo - terms.fixed);
    const auto guess = static_cast<std::int64_t>(std::min(std::ceil(root), kHugeNodes));
    auto lo = settle_lo(guess, std::numeric_limits<std::int64_t>::max() - 1);
    if (!lo) return std::nullopt;
    return NodeInterval{*lo, std::nullopt};
  }

  if (slo <= terms.fixed) return std::nullopt;
  const double gap = slo - terms.fixed;
  const double disc = gap * gap - 4.0 * terms.linear * terms.inverse;
  if (disc < 0) return std::nullopt;
  // Stable pair of roots: q = (gap + sqrt(disc)) / 2, r_hi = q / linear, r_lo = inverse / q.
  const double q = 0.5 * (gap + std::sqrt(disc));
  const double r_hi = std::min(q / terms.linear, kHugeNodes);
  const double r_lo = terms.inverse / q;
  if (r_hi < 1) return std::nullopt;

  auto hi = static_cast<std::int64_t>(std::floor(r_hi));
  for (int i = 0; i < kMaxNudges && hi < static_cast<std::int64_t>(kHugeNodes) && ok(hi + 1); ++i) ++hi;
  for (int i = 0; i < kMaxNudges && hi >= 1 && !ok(hi); ++i) --hi;
  if (hi < 1 || !ok(hi)) return std::nullopt;
  auto lo = settle_lo(static_cast<std::int64_t>(std::ceil(r_lo)), hi);
  if (!lo) return std::nullopt;
  return NodeInterval{*lo, hi};
}

// ---------------------------------------------------------------------------
// Tabulated estimates

void EstimateTable::add(std::int64_t iter, std::int64_t n, double t_est) {
  if (iter < 1 || n < 1 || !(t_est >= 0)) {
    throw Error(ErrorCode::InvalidInput, "estimate table entries need iter >= 1, n >= 1, t_est >= 0");
  }
  if (!entries_.emplace(std::make_pair(iter, n), t_est).second) {
    throw Error(ErrorCode::InvalidInput,
                "duplicate estimate for iter=" + std::to_string(iter) + ", n=" + std::to_string(n));
  }
}

std::optional<double> EstimateTable::lookup(std::int64_t iter, std::int64_t n) const {
  auto it = entries_.find({iter, n});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::int64_t> EstimateTable::node_counts(std::int64_t iter) const {
  std::vector<std::int64_t> out;
  for (auto it = entries_.lower_bound({iter, 0}); it != entries_.end() && it->first.first == iter; ++it) {
    out.push_back(it->first.second);
  }
  return out;
}

EstimateTable EstimateTable::parse_csv(std::string_view csv_text) {
  const auto table = csv::parse(csv_text);
  const auto c_iter = table.require_column("iter");
  const auto c_n = table.require_column("n");
  const auto c_est = table.require_column("t_est");
  EstimateTable out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.lines[r];
    out.add(csv::to_int(row[c_iter], line, "iter"), csv::to_int(row[c_n], line, "n"),
            csv::to_double(row[c_est], line, "t_est"));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Problem resolution

void PlanProblem::validate() const {
  if (types.empty()) throw Error(ErrorCode::InvalidInput, "plan has no candidate instance types");
  if (iter < 1) throw Error(ErrorCode::InvalidInput, "plan iterations must be >= 1");
  if (n_max < 1) throw Error(ErrorCode::InvalidInput, "n_max must be >= 1");
  if (objective == Objective::min_cost_under_slo) {
    if (!slo_seconds) throw Error(ErrorCode::InvalidInput, "min-cost plan needs an SLO");
    if (!(*slo_seconds > 0)) throw Error(ErrorCode::InvalidInput, "SLO must be > 0");
    if (budget) throw Error(ErrorCode::InvalidInput, "min-cost plan takes an SLO, not a budget");
  } else {
    if (!budget) throw Error(ErrorCode::InvalidInput, "min-time plan needs a budget");
    if (!(*budget >= 0)) throw Error(ErrorCode::InvalidInput, "budget must be >= 0");
    if (slo_seconds) throw Error(ErrorCode::InvalidInput, "min-time plan takes a budget, not an SLO");
  }
  for (auto n : candidate_nodes) {
    if (n < 1) throw Error(ErrorCode::InvalidInput, "candidate node counts must be >= 1");
  }
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (i > 0 && !(types[i - 1].type.name < types[i].type.name)) {
      throw Error(ErrorCode::InvalidInput, "plan types must be sorted by unique name");
    }
    const auto& t = types[i];
    if (heterogeneous) {
      if (t.table) throw Error(ErrorCode::InvalidInput, "tabulated estimates cannot be pooled across types");
    } else if (!t.params && !t.table) {
      throw Error(ErrorCode::NoProfileForType, "no profile for instance type '" + t.type.name + "'");
    }
    if (t.params) t.params->validate();
  }
  if (heterogeneous) {
    if (!pooled_params) throw Error(ErrorCode::InvalidInput, "pooled plan needs reference-type params");
    pooled_params->validate();
  }
}

PlanProblem resolve(const PlanRequest& request) {
  if (!request.profiles || !request.catalog) {
    throw Error(ErrorCode::InvalidInput, "plan request needs a profile registry and a catalog");
  }
  request.workload.validate();
  const auto& catalog = *request.catalog;

  std::set<std::string> wanted(request.instance_types.begin(), request.instance_types.end());
  for (const auto& name : wanted) catalog.at(name);

  PlanProblem problem;
  problem.iter = request.workload.iterations;
  problem.objective = request.objective;
  problem.slo_seconds = request.slo_seconds;
  problem.budget = request.budget;
  problem.n_max = request.n_max;
  problem.candidate_nodes = request.candidate_nodes;
  problem.heterogeneous = request.heterogeneous;
  problem.billing = request.billing;
  problem.enumeration_cap = request.enumeration_cap;
  problem.relax_iteration_cap = request.relax_iteration_cap;
  problem.workers = request.workers;

  for (const auto& type : catalog.types()) {
    if (!wanted.empty() && !wanted.count(type.name)) continue;
    TypeOption option;
    option.type = type;
    if (auto tab = request.tabulated.find(type.name); tab != request.tabulated.end()) {
      option.table = tab->second;
    } else if (const auto* profile = request.profiles->find(request.workload.category, type.name)) {
      option.params = build_model_params(*profile, request.workload, request.build);
    } else if (!request.heterogeneous) {
      throw Error(ErrorCode::NoProfileForType, "no " + std::string(to_string(request.workload.category)) +
                                                   " profile for instance type '" + type.name + "'");
    }
    problem.types.push_back(std::move(option));
  }
  for (const auto& [name, _] : request.tabulated) {
    if (!catalog.find(name)) throw Error(ErrorCode::UnknownInstanceType, "tabulated type '" + name + "' is not in the catalog");
  }
  std::sort(problem.types.begin(), problem.types.end(),
            [](const TypeOption& a, const TypeOption& b) { return a.type.name < b.type.name; });

  if (request.heterogeneous) {
    if (catalog.reference_type().empty()) throw Error(ErrorCode::InvalidInput, "catalog has no reference type");
    const auto& ref = request.profiles->lookup(request.workload.category, catalog.reference_type());
    problem.pooled_params = build_model_params(ref, request.workload, request.build);
  }
  problem.validate();
  return problem;
}

PlanProblem single_type_problem(const ModelParams& params, std::int64_t iter, InstanceType type) {
  PlanProblem problem;
  problem.types.push_back(TypeOption{std::move(type), params, std::nullopt});
  problem.iter = iter;
  return problem;
}

// ---------------------------------------------------------------------------
// Evaluation and ranking

std::optional<CompositionEstimate> evaluate_composition(const PlanProblem& problem,
                                                        const std::vector<std::int64_t>& counts) {
  if (counts.size() != problem.types.size()) {
    throw Error(ErrorCode::InvalidInput, "composition does not match the plan's type list");
  }
  std::int64_t total = 0;
  double effective = 0;
  std::size_t used = 0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw Error(ErrorCode::InvalidInput, "negative node count");
    if (counts[i] == 0) continue;
    total += counts[i];
    effective += static_cast<double>(counts[i]) * problem.types[i].type.speed_factor;
    ++used;
    last = i;
  }
  if (total == 0) return std::nullopt;

  if (problem.heterogeneous) {
    const auto& p = *problem.pooled_params;
    PhaseBreakdown out;
    out.t_init = p.t_init;
    out.t_prep = p.t_prep;
    out.t_vs = p.c * static_cast<double>(problem.iter) * static_cast<double>(total);
    out.t_commn = p.a * p.s_ratio;
    out.t_exec = static_cast<double>(problem.iter) * p.b;
    out.comp_divisor = effective;
    out.t_comp = computation_time(out.t_commn, out.t_exec, effective);
    out.t_est = out.t_init + out.t_prep + out.t_vs + out.t_comp;
    return CompositionEstimate{out.t_est, out};
  }

  if (used != 1) throw Error(ErrorCode::InvalidInput, "homogeneous plans use exactly one instance type");
  const auto& option = problem.types[last];
  if (option.table) {
    auto t = option.table->lookup(problem.iter, counts[last]);
    if (!t) return std::nullopt;
    return CompositionEstimate{*t, std::nullopt};
  }
  auto bd = estimate_completion(*option.params, problem.iter, counts[last]);
  return CompositionEstimate{bd.t_est, bd};
}

double composition_cost(const PlanProblem& problem, const std::vector<std::int64_t>& counts, double t_est) {
  const double hours = billed_hours(t_est, problem.billing);
  double rate = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    rate += problem.types[i].type.hourly_cost * static_cast<double>(counts[i]);
  }
  return rate * hours;
}

ClusterComposition to_composition(const PlanProblem& problem, const std::vector<std::int64_t>& counts) {
  ClusterComposition out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) out.counts[problem.types[i].type.name] = counts[i];
  }
  return out;
}

namespace detail {

namespace {

constexpr double kTieTolerance = 1e-12;

// -1: a < b, 1: a > b, 0: equal within tolerance.
int compare(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (std::abs(a - b) <= kTieTolerance * scale) return 0;
  return a < b ? -1 : 1;
}

std::int64_t total_of(const std::vector<std::int64_t>& counts) {
  std::int64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

}  // namespace

bool ranks_before(const Scored& a, const Scored& b, RankBy rank) {
  int c = rank == RankBy::cost ? compare(a.cost, b.cost) : compare(a.t_est, b.t_est);
  if (c != 0) return c < 0;
  if (rank == RankBy::time) {
    c = compare(a.cost, b.cost);
    if (c != 0) return c < 0;
  }
  const auto ta = total_of(a.counts);
  const auto tb = total_of(b.counts);
  if (ta != tb) return ta < tb;
  // Types are sorted by name: the plan leaning on earlier names wins.
  return std::lexicographical_compare(a.counts.begin(), a.counts.end(), b.counts.begin(), b.counts.end(),
                                      [](std::int64_t x, std::int64_t y) { return x > y; });
}

std::optional<Scored> score(const PlanProblem& problem, std::vector<std::int64_t> counts) {
  auto est = evaluate_composition(problem, counts);
  if (!est) return std::nullopt;
  Scored s;
  s.t_est = est->t_est;
  s.breakdown = est->breakdown;
  s.cost = composition_cost(problem, counts, s.t_est);
  s.counts = std::move(counts);
  s.feasible = problem.objective == Objective::min_cost_under_slo ? s.t_est <= *problem.slo_seconds
                                                                   : s.cost <= *problem.budget;
  return s;
}

std::vector<std::int64_t> node_candidates(const PlanProblem& problem, std::size_t type_index) {
  const auto& option = problem.types[type_index];
  std::vector<std::int64_t> out;
  if (!problem.candidate_nodes.empty()) {
    out = problem.candidate_nodes;
  } else if (option.table && !problem.heterogeneous) {
    for (auto n : option.table->node_counts(problem.iter)) {
      if (n <= problem.n_max) out.push_back(n);
    }
  } else {
    out.resize(static_cast<std::size_t>(problem.n_max));
    for (std::int64_t n = 1; n <= problem.n_max; ++n) out[static_cast<std::size_t>(n - 1)] = n;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (option.table && !problem.heterogeneous) {
    std::erase_if(out, [&](std::int64_t n) { return !option.table->lookup(problem.iter, n); });
  }
  return out;
}

PlanResult to_result(const PlanProblem& problem, const Scored& scored, PlanMethod method) {
  PlanResult r;
  r.composition = to_composition(problem, scored.counts);
  r.t_est = scored.t_est;
  r.breakdown = scored.breakdown;
  r.cost = scored.cost;
  r.feasible = scored.feasible;
  r.method = method;
  r.objective = problem.objective;
  r.margin = problem.objective == Objective::min_cost_under_slo ? *problem.slo_seconds - scored.t_est
                                                                 : *problem.budget - scored.cost;
  return r;
}

}  // namespace detail

using detail::RankBy;
using detail::ranks_before;
using detail::Scored;

namespace {

struct Best {
  std::optional<Scored> feasible;
  std::optional<Scored> fallback;  // fastest plan regardless of feasibility

  void offer(Scored s, RankBy rank) {
    if (!fallback || ranks_before(s, *fallback, RankBy::time)) fallback = s;
    if (s.feasible && (!feasible || ranks_before(s, *feasible, rank))) feasible = std::move(s);
  }

  void merge(const Best& other, RankBy rank) {
    if (other.fallback && (!fallback || ranks_before(*other.fallback, *fallback, RankBy::time))) fallback = other.fallback;
    if (other.feasible && (!feasible || ranks_before(*other.feasible, *feasible, rank))) feasible = other.feasible;
  }
};

RankBy rank_for(const PlanProblem& problem) {
  return problem.objective == Objective::min_cost_under_slo ? RankBy::cost : RankBy::time;
}

std::vector<std::int64_t> single(const PlanProblem& problem, std::size_t type_index, std::int64_t n) {
  std::vector<std::int64_t> counts(problem.types.size(), 0);
  counts[type_index] = n;
  return counts;
}

PlanResult finish(const PlanProblem& problem, const Best& best, PlanMethod method) {
  if (best.feasible) return detail::to_result(problem, *best.feasible, method);
  if (problem.objective == Objective::min_time_under_budget) {
    throw Error(ErrorCode::NoAffordableCluster, "no composition fits within budget " + std::to_string(*problem.budget));
  }
  if (!best.fallback) throw Error(ErrorCode::InvalidInput, "plan has no candidate compositions");
  return detail::to_result(problem, *best.fallback, method);
}

// Mixed-radix enumeration of the brute-force grid. Homogeneous grids are the
// concatenation of each type's candidate list; pooled grids are the product of
// {0} + candidates per type.
class Grid {
 public:
  explicit Grid(const PlanProblem& problem) : problem_(problem) {
    for (std::size_t i = 0; i < problem.types.size(); ++i) {
      auto c = detail::node_candidates(problem, i);
      if (problem.heterogeneous) c.insert(c.begin(), 0);
      axes_.push_back(std::move(c));
    }
    if (problem.heterogeneous) {
      size_ = 1;
      for (const auto& axis : axes_) {
        if (axis.empty()) {
          size_ = 0;
          break;
        }
        const auto len = static_cast<std::uint64_t>(axis.size());
        size_ = size_ > std::numeric_limits<std::uint64_t>::max() / len ? std::numeric_limits<std::uint64_t>::max()
                                                                        : size_ * len;
      }
    } else {
      size_ = 0;
      for (const auto& axis : axes_) {
        offsets_.push_back(size_);
        size_ += axis.size();
      }
    }
  }

  std::uint64_t size() const { return size_; }

  std::vector<std::int64_t> at(std::uint64_t index) const {
    std::vector<std::int64_t> counts(axes_.size(), 0);
    if (problem_.heterogeneous) {
      for (std::size_t i = axes_.size(); i-- > 0;) {
        const auto len = axes_[i].size();
        counts[i] = axes_[i][index % len];
        index /= len;
      }
    } else {
      auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
      const auto type = static_cast<std::size_t>(std::distance(offsets_.begin(), it) - 1);
      counts[type] = axes_[type][index - offsets_[type]];
    }
    return counts;
  }

 private:
  const PlanProblem& problem_;
  std::vector<std::vector<std::int64_t>> axes_;
  std::vector<std::uint64_t> offsets_;
  std::uint64_t size_ = 0;
};

Best scan(const PlanProblem& problem, const Grid& grid, std::uint64_t begin, std::uint64_t end) {
  Best best;
  const auto rank = rank_for(problem);
  for (auto i = begin; i < end; ++i) {
    if (auto s = detail::score(problem, grid.at(i))) best.offer(std::move(*s), rank);
  }
  return best;
}

}  // namespace

std::uint64_t enumeration_size(const PlanProblem& problem) { return Grid(problem).size(); }

PlanResult brute_force_plan(const PlanProblem& problem) {
  problem.validate();
  const Grid grid(problem);
  if (grid.size() > problem.enumeration_cap) {
    throw Error(ErrorCode::EnumerationCapExceeded, std::to_string(grid.size()) + " candidates exceed the cap of " +
                                                       std::to_string(problem.enumeration_cap));
  }
  const auto rank = rank_for(problem);
  const unsigned workers = std::max(1u, problem.workers);
  Best best;
  if (workers == 1 || grid.size() < 4096) {
    best = scan(problem, grid, 0, grid.size());
  } else {
    // Contiguous chunks merged in index order give the sequential answer.
    std::vector<std::future<Best>> parts;
    const auto chunk = (grid.size() + workers - 1) / workers;
    for (std::uint64_t begin = 0; begin < grid.size(); begin += chunk) {
      const auto end = std::min(grid.size(), begin + chunk);
      parts.push_back(std::async(std::launch::async, [&, begin, end] { return scan(problem, grid, begin, end); }));
    }
    for (auto& part : parts) best.merge(part.get(), rank);
  }
  return finish(problem, best, PlanMethod::brute_force);
}

PlanResult brute_force_plan(const PlanRequest& request) { return brute_force_plan(resolve(request)); }

// ---------------------------------------------------------------------------
// Homogeneous fast paths

namespace {

// Node counts around the unconstrained minimizer of fixed + linear*n + inverse/n
// among sorted candidates[0, limit).
std::vector<std::int64_t> around_minimizer(const ClosedFormTerms& terms, const std::vector<std::int64_t>& candidates,
                                           std::size_t limit) {
  std::vector<std::int64_t> picks;
  if (limit == 0) return picks;
  picks.push_back(candidates.front());
  double target;
  if (terms.linear > 0) {
    target = std::sqrt(terms.inverse / terms.linear);
  } else {
    target = terms.inverse > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  const auto first = candidates.begin();
  const auto last = candidates.begin() + static_cast<std::ptrdiff_t>(limit);
  auto above = std::find_if(first, last, [&](std::int64_t n) { return static_cast<double>(n) >= target; });
  if (above != last) picks.push_back(*above);
  if (above != first) picks.push_back(*std::prev(above));
  return picks;
}

PlanResult homogeneous_min_cost(const PlanProblem& problem) {
  Best best;
  bool scanned = false;
  for (std::size_t i = 0; i < problem.types.size(); ++i) {
    const auto& option = problem.types[i];
    const auto candidates = detail::node_candidates(problem, i);
    if (candidates.empty()) continue;

    if (option.table) {
      scanned = true;
      for (auto n : candidates) {
        if (auto s = detail::score(problem, single(problem, i, n))) best.offer(std::move(*s), RankBy::cost);
      }
      continue;
    }

    const auto& params = *option.params;
    const auto interval = feasible_interval(params, problem.iter, *problem.slo_seconds);
    if (interval) {
      auto it = std::lower_bound(candidates.begin(), candidates.end(), interval->lo);
      if (problem.billing == Billing::linear) {
        // n * t_est(n) is nondecreasing, so the smallest feasible size is cheapest.
        if (it != candidates.end() && interval->contains(*it)) {
          best.offer(*detail::score(problem, single(problem, i, *it)), RankBy::cost);
        }
      } else {
        // Rounding to whole hours breaks that monotonicity; walk the interval.
        for (; it != candidates.end() && interval->contains(*it); ++it) {
          best.offer(*detail::score(problem, single(problem, i, *it)), RankBy::cost);
        }
      }
    }
    if (!best.feasible) {
      // Keep the fastest plan of this type in case nothing is feasible.
      for (auto n : around_minimizer(closed_form_terms(params, problem.iter), candidates, candidates.size())) {
        best.offer(*detail::score(problem, single(problem, i, n)), RankBy::cost);
      }
    }
  }
  return finish(problem, best, scanned ? PlanMethod::brute_force : PlanMethod::analytic);
}

PlanResult homogeneous_min_time(const PlanProblem& problem) {
  Best best;
  bool scanned = false;
  for (std::size_t i = 0; i < problem.types.size(); ++i) {
    const auto& option = problem.types[i];
    const auto candidates = detail::node_candidates(problem, i);
    if (candidates.empty()) continue;

    if (option.table || problem.billing == Billing::hourly_rounded) {
      scanned = true;
      for (auto n : candidates) {
        if (auto s = detail::score(problem, single(problem, i, n))) best.offer(std::move(*s), RankBy::time);
      }
      continue;
    }

    // Linear billing: cost grows with n, so the affordable sizes form a prefix.
    auto affordable = [&](std::int64_t n) { return detail::score(problem, single(problem, i, n))->feasible; };
    const auto limit = static_cast<std::size_t>(
        std::distance(candidates.begin(), std::partition_point(candidates.begin(), candidates.end(), affordable)));
    for (auto n : around_minimizer(closed_form_terms(*option.params, problem.iter), candidates, limit)) {
      best.offer(*detail::score(problem, single(problem, i, n)), RankBy::time);
    }
  }
  return finish(problem, best, scanned ? PlanMethod::brute_force : PlanMethod::analytic);
}

PlanResult pooled(const PlanProblem& problem) {
  if (enumeration_size(problem) <= problem.enumeration_cap) return brute_force_plan(problem);
  return relaxed_minimize(problem).rounded;
}

}  // namespace

PlanResult plan_min_cost(const PlanProblem& problem) {
  problem.validate();
  if (problem.objective != Objective::min_cost_under_slo) {
    throw Error(ErrorCode::InvalidInput, "plan_min_cost needs objective min_cost_under_slo");
  }
  return problem.heterogeneous ? pooled(problem) : homogeneous_min_cost(problem);
}

PlanResult plan_min_cost(const PlanRequest& request) { return plan_min_cost(resolve(request)); }

PlanResult plan_min_time(const PlanProblem& problem) {
  problem.validate();
  if (problem.objective != Objective::min_time_under_budget) {
    throw Error(ErrorCode::InvalidInput, "plan_min_time needs objective min_time_under_budget");
  }
  return problem.heterogeneous ? pooled(problem) : homogeneous_min_time(problem);
}

PlanResult plan_min_time(const PlanRequest& request) { return plan_min_time(resolve(request)); }

PlanResult plan(const PlanProblem& problem) {
  return problem.objective == Objective::min_cost_under_slo ? plan_min_cost(problem) : plan_min_time(problem);
}

}  // namespace phaseplan
