#include <doctest.h>

#include <random>

#include "phaseplan/error.hpp"
#include "phaseplan/planner.hpp"
#include "support.hpp"

using namespace phaseplan;

namespace {

std::mt19937_64& rng() {
  static std::mt19937_64 gen(99);
  return gen;
}
double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }
std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng());
}

ModelParams quadratic_params() { return ModelParams::from_constants(33, 0, 120, 0.3); }

EstimateTable stepwise_table() {
  return EstimateTable::parse_csv(testing::slurp(testing::data_path("stepwise_accuracy.csv")));
}

PlanProblem grid_problem(double slo) {
  PlanProblem p;
  p.types.push_back(TypeOption{{"m1.large", 0.175, 1.0}, std::nullopt, stepwise_table()});
  p.iter = 5;
  p.slo_seconds = slo;
  p.candidate_nodes = {5, 10, 15, 20};
  return p;
}

ModelParams random_params(std::int64_t& iter) {
  iter = uniform_int(1, 20);
  const double k0 = uniform(10, 100);
  const double c = uniform(0, 0.1);
  const double b = uniform(0, 50);
  const double as = uniform(0, 500);
  return ModelParams::from_constants(k0, as, b, c);
}

PlanProblem random_homogeneous(Objective objective, std::size_t types, Billing billing) {
  PlanProblem p;
  std::int64_t iter = 1;
  for (std::size_t i = 0; i < types; ++i) {
    auto params = random_params(iter);
    p.types.push_back(TypeOption{{"t" + std::to_string(i), uniform(0.05, 2.0), 1.0}, params, std::nullopt});
  }
  p.iter = iter;
  p.objective = objective;
  p.billing = billing;
  p.n_max = uniform_int(1, 120);
  if (objective == Objective::min_cost_under_slo) {
    p.slo_seconds = uniform(20, 1000);
  } else {
    p.budget = uniform(0.0, 3.0);
  }
  if (uniform(0, 1) < 0.2) {
    for (int k = 0; k < 6; ++k) p.candidate_nodes.push_back(uniform_int(1, 150));
  }
  return p;
}

}  // namespace

TEST_CASE("feasible interval") {
  const auto q = quadratic_params();
  const auto interval = feasible_interval(q, 1, 60);
  REQUIRE(interval.has_value());
  CHECK(interval->lo == 5);
  CHECK(interval->hi == 85);
  CHECK_FALSE(feasible_interval(q, 1, 33).has_value());
  CHECK_FALSE(feasible_interval(q, 1, 10).has_value());

  // c = 0: unbounded above, starting at ceil(inverse / (slo - k0)).
  const auto flat = ModelParams::from_constants(33, 0, 120, 0);
  const auto open = feasible_interval(flat, 1, 60);
  REQUIRE(open.has_value());
  CHECK(open->lo == 5);
  CHECK_FALSE(open->hi.has_value());
  CHECK_FALSE(feasible_interval(flat, 1, 33).has_value());
  CHECK(feasible_interval(ModelParams::from_constants(33, 0, 0, 0), 1, 40)->lo == 1);
  CHECK_THROWS_AS(feasible_interval(q, 1, 0), Error);
}

TEST_CASE("feasible interval matches a scan") {
  for (int trial = 0; trial < 500; ++trial) {
    std::int64_t iter = 1;
    const auto p = random_params(iter);
    const double slo = uniform(20, 400);
    const auto interval = feasible_interval(p, iter, slo);
    for (std::int64_t n = 1; n <= 400; ++n) {
      const bool ok = estimate_completion(p, iter, n).t_est <= slo;
      CHECK(ok == (interval && interval->contains(n)));
    }
  }
}

TEST_CASE("min cost over the stepwise grid") {
  auto r = plan_min_cost(grid_problem(75));
  CHECK(r.feasible);
  CHECK(r.composition.counts.at("m1.large") == 5);
  CHECK(r.t_est == 68.52);
  CHECK(r.margin == doctest::Approx(75 - 68.52));
  CHECK_FALSE(r.breakdown.has_value());

  r = plan_min_cost(grid_problem(60));
  CHECK(r.composition.counts.at("m1.large") == 10);
  CHECK(r.t_est == 53.88);

  r = plan_min_cost(grid_problem(200));
  CHECK(r.composition.counts.at("m1.large") == 5);

  r = plan_min_cost(grid_problem(10));
  CHECK_FALSE(r.feasible);
  CHECK(r.composition.counts.at("m1.large") == 20);  // fastest tabulated entry
  CHECK(r.margin < 0);
}

TEST_CASE("min cost on the closed form") {
  auto p = single_type_problem(quadratic_params(), 1);
  p.slo_seconds = 60;
  const auto r = plan_min_cost(p);
  CHECK(r.feasible);
  CHECK(r.method == PlanMethod::analytic);
  CHECK(r.composition.counts.at("node") == 5);
  REQUIRE(r.breakdown.has_value());
  CHECK(r.breakdown->t_est == r.t_est);

  p.slo_seconds = 10;
  const auto none = plan_min_cost(p);
  CHECK_FALSE(none.feasible);
  CHECK(none.composition.counts.at("node") == 20);  // argmin of 33 + 0.3n + 120/n
}

TEST_CASE("min time on the closed form") {
  auto p = single_type_problem(quadratic_params(), 1);
  p.objective = Objective::min_time_under_budget;
  p.budget = 1e9;
  auto r = plan_min_time(p);
  CHECK(r.composition.counts.at("node") == 20);
  CHECK(r.t_est == doctest::Approx(45));

  p.n_max = 20;
  p.budget = 0.065;
  r = plan_min_time(p);
  CHECK(r.composition.counts.at("node") == 3);
  CHECK(r.feasible);

  p.budget = 0.04;
  try {
    plan_min_time(p);
    FAIL("expected NoAffordableCluster");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoAffordableCluster);
  }
}

TEST_CASE("planner agrees with exhaustive enumeration") {
  for (int trial = 0; trial < 400; ++trial) {
    const auto objective = trial % 2 ? Objective::min_time_under_budget : Objective::min_cost_under_slo;
    const auto billing = trial % 5 == 0 ? Billing::hourly_rounded : Billing::linear;
    const auto p = random_homogeneous(objective, static_cast<std::size_t>(uniform_int(1, 3)), billing);
    std::optional<PlanResult> fast, slow;
    std::optional<ErrorCode> fast_err, slow_err;
    try {
      fast = plan(p);
    } catch (const Error& e) {
      fast_err = e.code();
    }
    try {
      slow = brute_force_plan(p);
    } catch (const Error& e) {
      slow_err = e.code();
    }
    REQUIRE(fast_err == slow_err);
    if (!fast) continue;
    CHECK(fast->feasible == slow->feasible);
    if (fast->feasible) {
      if (objective == Objective::min_cost_under_slo) {
        CHECK(testing::close_rel(fast->cost, slow->cost, 1e-9));
        CHECK(fast->t_est <= *p.slo_seconds);
      } else {
        CHECK(testing::close_rel(fast->t_est, slow->t_est, 1e-9));
        CHECK(fast->cost <= *p.budget);
      }
      CHECK(fast->composition == slow->composition);
    }
  }
}

TEST_CASE("relaxing the constraint never hurts") {
  for (int trial = 0; trial < 200; ++trial) {
    auto p = random_homogeneous(Objective::min_cost_under_slo, 2, Billing::linear);
    const auto tight = plan(p);
    *p.slo_seconds *= 1.3;
    const auto loose = plan(p);
    if (tight.feasible) {
      CHECK(loose.feasible);
      CHECK(loose.cost <= tight.cost * (1 + 1e-12));
    }

    auto q = random_homogeneous(Objective::min_time_under_budget, 2, Billing::linear);
    std::optional<PlanResult> before;
    try {
      before = plan(q);
    } catch (const Error&) {
    }
    *q.budget *= 1.5;
    if (before) CHECK(plan(q).t_est <= before->t_est * (1 + 1e-12));
  }
}

TEST_CASE("scaling every price keeps the chosen composition") {
  for (int trial = 0; trial < 200; ++trial) {
    auto p = random_homogeneous(Objective::min_cost_under_slo, 3, Billing::linear);
    const auto base = plan(p);
    const double k = uniform(0.01, 100);
    for (auto& t : p.types) t.type.hourly_cost *= k;
    CHECK(plan(p).composition == base.composition);
  }
}

TEST_CASE("pooled plans") {
  PlanProblem p;
  p.heterogeneous = true;
  p.pooled_params = ModelParams::from_constants(33, 0, 120, 0.3);
  p.types.push_back(TypeOption{{"a", 1.0, 1.0}, std::nullopt, std::nullopt});
  p.types.push_back(TypeOption{{"b", 1.0, 1.0}, std::nullopt, std::nullopt});
  p.n_max = 50;
  p.slo_seconds = 60;
  CHECK(enumeration_size(p) == 2601);
  const auto r = brute_force_plan(p);
  CHECK(r.feasible);
  CHECK(r.composition.total() == 5);
  // Symmetric types: ties go to the earlier name.
  CHECK(r.composition.counts.at("a") == 5);
  CHECK_FALSE(r.composition.counts.count("b"));

  p.enumeration_cap = 1000;
  try {
    brute_force_plan(p);
    FAIL("expected EnumerationCapExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EnumerationCapExceeded);
  }
}

TEST_CASE("pooled evaluation uses total nodes and effective speed") {
  PlanProblem p;
  p.heterogeneous = true;
  p.pooled_params = ModelParams::from_constants(10, 0, 100, 0.5);
  p.types.push_back(TypeOption{{"fast", 2.0, 2.0}, std::nullopt, std::nullopt});
  p.types.push_back(TypeOption{{"slow", 1.0, 1.0}, std::nullopt, std::nullopt});
  p.slo_seconds = 100;
  const auto est = evaluate_composition(p, {3, 4});
  REQUIRE(est.has_value());
  CHECK(est->t_est == doctest::Approx(10 + 0.5 * 7 + 100.0 / 10));
  CHECK(est->breakdown->comp_divisor == 10);
  CHECK(composition_cost(p, {3, 4}, 3600) == doctest::Approx(10));
  CHECK_FALSE(evaluate_composition(p, {0, 0}).has_value());

  // A single type at speed 1 reduces to the plain model.
  const auto one = evaluate_composition(p, {0, 6});
  CHECK(one->t_est == doctest::Approx(estimate_completion(*p.pooled_params, 1, 6).t_est));
}

TEST_CASE("parallel enumeration equals sequential") {
  for (int trial = 0; trial < 20; ++trial) {
    PlanProblem p;
    p.heterogeneous = true;
    std::int64_t iter = 1;
    p.pooled_params = random_params(iter);
    p.iter = iter;
    for (int i = 0; i < 3; ++i) {
      p.types.push_back(TypeOption{{"t" + std::to_string(i), uniform(0.1, 1), uniform(0.5, 2)}, std::nullopt, std::nullopt});
    }
    p.n_max = 25;
    if (trial % 2) {
      p.objective = Objective::min_time_under_budget;
      p.budget = uniform(0.05, 1.0);
    } else {
      p.slo_seconds = uniform(20, 300);
    }
    std::optional<PlanResult> seq, par;
    try {
      seq = brute_force_plan(p);
    } catch (const Error&) {
    }
    p.workers = 4;
    try {
      par = brute_force_plan(p);
    } catch (const Error&) {
    }
    REQUIRE(seq.has_value() == par.has_value());
    if (!seq) continue;
    CHECK(seq->composition == par->composition);
    CHECK(seq->cost == par->cost);
    CHECK(seq->t_est == par->t_est);
  }
}

TEST_CASE("hourly billing and min cost") {
  // With whole-hour billing a larger cluster can finish inside fewer billed hours.
  auto p = single_type_problem(ModelParams::from_constants(0, 0, 7300, 0), 1);
  p.billing = Billing::hourly_rounded;
  p.slo_seconds = 8000;
  p.n_max = 10;
  const auto fast = plan_min_cost(p);
  const auto slow = brute_force_plan(p);
  CHECK(fast.composition == slow.composition);
  CHECK(fast.cost == doctest::Approx(slow.cost));
}

TEST_CASE("request resolution") {
  const auto registry = load_registry_file(testing::data_path("profiles.json"));
  const auto catalog = load_catalog_file(testing::data_path("catalog.json"));
  PlanRequest req;
  req.workload.category = Category::mllib;
  req.workload.dataset_size_bytes = 265000000;
  req.workload.iterations = 5;
  req.workload.task_mix = {{"map", 1}};
  req.profiles = &registry;
  req.catalog = &catalog;
  req.slo_seconds = 100;
  try {
    resolve(req);
    FAIL("expected NoProfileForType");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoProfileForType);
    CHECK(std::string(e.what()).find("m2.xlarge") != std::string::npos);
  }
  req.instance_types = {"m1.large"};
  const auto problem = resolve(req);
  REQUIRE(problem.types.size() == 1);
  CHECK(problem.types[0].params->k0 == 33);

  req.instance_types.clear();
  req.heterogeneous = true;
  const auto pooled = resolve(req);
  CHECK(pooled.types.size() == 2);
  CHECK(pooled.pooled_params->c == doctest::Approx(0.06));

  req.heterogeneous = false;
  req.instance_types = {"nope"};
  CHECK_THROWS_AS(resolve(req), Error);

  req.instance_types = {"m1.large"};
  req.budget = 1;
  CHECK_THROWS_AS(resolve(req), Error);  // both slo and budget
}

TEST_CASE("estimate table parsing") {
  const auto t = stepwise_table();
  CHECK(t.lookup(5, 5) == 68.52);
  CHECK(t.lookup(20, 20) == 68.52);
  CHECK_FALSE(t.lookup(5, 6).has_value());
  CHECK(t.node_counts(10) == std::vector<std::int64_t>{5, 10, 15, 20});
  CHECK_THROWS_AS(EstimateTable::parse_csv("iter,n\n1,2\n"), Error);
  CHECK_THROWS_AS(EstimateTable::parse_csv("iter,n,t_est\n1,2,3\n1,2,4\n"), Error);
}
