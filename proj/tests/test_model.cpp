#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "phaseplan/error.hpp"
#include "phaseplan/model.hpp"
#include "phaseplan/profiles.hpp"
#include "support.hpp"

using namespace phaseplan;
using testing::close_rel;

TEST_CASE("variable sharing time is the product of its inputs") {
  CHECK(variable_sharing_time(0.004, 5, 5, 15) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(variable_sharing_time(0.004, 0, 5, 15) == 0.0);
  CHECK(variable_sharing_time(0.004, 15, 20, 15) == doctest::Approx(18).epsilon(1e-12));
}

TEST_CASE("variable sharing time is linear in iterations") {
  for (std::int64_t k = 0; k <= 6; ++k) {
    CHECK(close_rel(variable_sharing_time(0.004, 3 * k, 7, 15), k * variable_sharing_time(0.004, 3, 7, 15), 1e-12));
  }
}

TEST_CASE("communication time scales with the dataset ratio") {
  CHECK(communication_time(0.07, 11, 1.0) == doctest::Approx(0.77).epsilon(1e-12));
  CHECK(communication_time(0.07, 11, 0.0) == 0.0);
  CHECK(communication_time(0.07, 11, 10.0) == doctest::Approx(7.7).epsilon(1e-12));
}

TEST_CASE("unit task count") {
  CHECK(unit_task_count(164, 1.0, 1, true) == 164);
  CHECK(unit_task_count(164, 2.0, 1, true) == 328);
  CHECK(unit_task_count(164, 1.0, 3, true) == 492);
  CHECK(unit_task_count(164, 1.0, 3, false) == 164);
  CHECK(unit_task_count(8, 0.01, 1, true) == 1);
  CHECK(unit_task_count(10, 0.15, 1, true) == 2);
  CHECK(unit_task_count(164, 0.1, 10, true) == 164);
  CHECK_THROWS_AS(unit_task_count(0, 1.0, 1, true), Error);
  try {
    unit_task_count(1'000'000'000, 1e12, 1000, true);
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ComputationError);
  }
}

TEST_CASE("execution and computation time") {
  const std::vector<double> ms{100, 98, 72};
  CHECK(execution_time(1, ms) == doctest::Approx(270));
  const std::vector<double> two{2.0};
  CHECK(execution_time(5, two) == doctest::Approx(10));
  const std::vector<double> zero{0.0};
  CHECK(execution_time(1, zero) == 0.0);
  CHECK(computation_time(18, 16, 1) == 34);
  CHECK(computation_time(18, 16, 2) == 17);
  CHECK(computation_time(0, 0, 7) == 0);
}

TEST_CASE("estimate completion for a degenerate model") {
  const auto p = ModelParams::from_constants(33, 0, 0, 0);
  const auto bd = estimate_completion(p, 1, 1);
  CHECK(bd.t_est == 33);
  CHECK(bd.t_vs == 0);
  CHECK(bd.t_comp == 0);
}

TEST_CASE("phase composition adds up") {
  PhaseBreakdown bd{20, 13, 6, 0, 0, 19.74, 0, 1};
  CHECK(bd.t_init + bd.t_prep + bd.t_vs + bd.t_comp == doctest::Approx(58.74).epsilon(1e-12));
  PhaseBreakdown other{20, 13, 4.5, 0, 0, 69.9, 0, 1};
  CHECK(other.t_init + other.t_prep + other.t_vs + other.t_comp == doctest::Approx(107.4).epsilon(1e-12));
}

TEST_CASE("update iteration bound re-estimates at the largest iteration") {
  const auto p = ModelParams::from_constants(33, 5, 2, 0.06, 1.5);
  const std::vector<std::int64_t> a{5, 12, 9};
  CHECK(update_iteration_bound(p, a, 7) == estimate_completion(p, 12, 7));
  const std::vector<std::int64_t> b{7};
  CHECK(update_iteration_bound(p, b, 7) == estimate_completion(p, 7, 7));
  const std::vector<std::int64_t> c{3, 3, 3};
  CHECK(update_iteration_bound(p, c, 4) == estimate_completion(p, 3, 4));
  const std::vector<std::int64_t> none;
  CHECK_THROWS_AS(update_iteration_bound(p, none, 4), Error);
  const std::vector<std::int64_t> bad{0, 2};
  CHECK_THROWS_AS(update_iteration_bound(p, bad, 4), Error);
}

TEST_CASE("workload and params validation") {
  WorkloadSpec w;
  CHECK_THROWS_AS(w.validate(), Error);  // empty task mix
  w.task_mix = {{"map", 1}};
  CHECK_NOTHROW(w.validate());
  w.iterations = 0;
  CHECK_THROWS_AS(w.validate(), Error);
  w.iterations = 1;
  w.task_mix = {{"map", 0}};
  CHECK_THROWS_AS(w.validate(), Error);

  auto p = ModelParams::from_constants(1, 0, 0, 0);
  p.c = -1;
  CHECK_THROWS_AS(p.validate(), Error);
  p.c = 0;
  p.s_ratio = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  CHECK_THROWS_AS(estimate_completion(ModelParams::from_constants(1, 0, 0, 0), 1, 0), Error);
  CHECK_THROWS_AS(parse_category("batch"), Error);
  CHECK(parse_mode("yarn") == DeploymentMode::yarn);
  CHECK(to_string(Category::spark_sql) == "spark_sql");
}

namespace {

std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }
std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng());
}

ModelParams random_params() {
  return ModelParams::from_constants(uniform(0, 100), uniform(0, 50), uniform(0, 50), uniform(0, 0.1),
                                     uniform(0.1, 10));
}

}  // namespace

TEST_CASE("additivity, monotonicity in iter and baseline identity") {
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = random_params();
    const auto n = uniform_int(1, 200);
    const auto iter = uniform_int(1, 30);
    const auto bd = estimate_completion(p, iter, n);
    CHECK(bd.t_est == bd.t_init + bd.t_prep + bd.t_vs + bd.t_comp);
    CHECK(bd.t_vs >= 0);
    CHECK(bd.t_comp >= 0);
    CHECK(bd.comp_divisor == static_cast<double>(n));
    CHECK(estimate_completion(p, iter + 1, n).t_est >= bd.t_est);

    auto flat = p;
    flat.a = flat.b = flat.c = 0;
    CHECK(estimate_completion(flat, iter, n).t_est == doctest::Approx(p.k0).epsilon(1e-15));
  }
}

TEST_CASE("convexity in the node count") {
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_params();
    const auto iter = uniform_int(1, 20);
    for (std::int64_t n = 2; n < 200; ++n) {
      const double lo = estimate_completion(p, iter, n - 1).t_est;
      const double mid = estimate_completion(p, iter, n).t_est;
      const double hi = estimate_completion(p, iter, n + 1).t_est;
      const double slack = 8 * std::numeric_limits<double>::epsilon() * (lo + 2 * mid + hi);
      CHECK(lo + hi - 2 * mid >= -slack);
    }
  }
}

TEST_CASE("closed form agrees with a term-by-term phase simulation") {
  // Independent simulation: expand every unit task and sum phase by phase.
  auto simulate = [](const JobProfile& prof, const WorkloadSpec& w, std::int64_t n, bool iter_in_nunit) {
    const double s_ratio = static_cast<double>(w.dataset_size_bytes) / static_cast<double>(prof.s_baseline_bytes);
    long double t_vs = 0;
    for (std::int64_t i = 0; i < w.iterations; ++i) t_vs += prof.coeff * static_cast<long double>(n) * prof.t_vs_baseline;
    const long double t_commn = static_cast<long double>(prof.cf_commn) * prof.t_commn_baseline * s_ratio;
    const auto units = unit_task_count(prof.n_unit_baseline, s_ratio, w.iterations, iter_in_nunit);
    std::vector<std::string> cycle;
    for (const auto& e : w.task_mix) {
      for (std::int64_t k = 0; k < e.count; ++k) cycle.push_back(e.op);
    }
    long double per_task = 0;
    for (const auto& op : cycle) per_task += prof.rdd_op_means.at(op);
    per_task /= static_cast<long double>(cycle.size());
    long double b = 0;
    for (std::int64_t k = 0; k < units; ++k) b += per_task;
    long double t_exec = 0;
    for (std::int64_t i = 0; i < w.iterations; ++i) t_exec += b;
    const long double t_comp = (t_commn + t_exec) / static_cast<long double>(n);
    return static_cast<double>(prof.t_init + static_cast<long double>(prof.t_prep) + t_vs + t_comp);
  };

  const auto prof = testing::mllib_profile();
  for (int trial = 0; trial < 300; ++trial) {
    WorkloadSpec w;
    w.category = Category::mllib;
    w.iterations = uniform_int(1, 20);
    w.dataset_size_bytes = static_cast<std::uint64_t>(uniform(1e6, 2e9));
    w.task_mix = {{"map", uniform_int(1, 4)}, {"count", uniform_int(1, 3)}, {"distinct", 1}};
    const bool literal = trial % 2 == 0;
    const auto params = build_model_params(prof, w, BuildOptions{literal});
    const auto n = uniform_int(1, 200);
    CHECK(close_rel(estimate_completion(params, w.iterations, n).t_est, simulate(prof, w, n, literal), 1e-9));
  }
}

TEST_CASE("real-valued evaluation matches the integer one") {
  const auto p = ModelParams::from_constants(33, 0, 24, 0.06);
  for (std::int64_t n = 1; n <= 50; ++n) {
    CHECK(completion_time_at(p, 5, static_cast<double>(n)) == doctest::Approx(estimate_completion(p, 5, n).t_est));
  }
}
