#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "phaseplan/cli.hpp"
#include "phaseplan/csv.hpp"
#include "phaseplan/profiles.hpp"
#include "support.hpp"

using nlohmann::json;
using testing::data_path;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = phaseplan::cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("phaseplan_test_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path.string();
}

std::vector<std::string> grid_plan(const std::string& slo) {
  return {"plan", "--catalog", data_path("catalog.json"), "--types", "m1.large", "--estimates",
          data_path("stepwise_accuracy.csv"), "--grid", "5,10,15,20", "--iter", "5", "--slo", slo};
}

}  // namespace

TEST_CASE("cli estimate") {
  const auto r = invoke({"estimate", "--profiles", data_path("profiles.json"), "--iter", "10", "--n", "10"});
  REQUIRE(r.status == 0);
  CHECK(r.err.empty());
  const auto j = json::parse(r.out);
  CHECK(j["breakdown"]["t_vs"].get<double>() == doctest::Approx(6).epsilon(1e-12));
  CHECK(j["params"]["k0"].get<double>() == 33);

  const auto t = invoke({"estimate", "--profiles", data_path("profiles.json"), "--iter", "10", "--n", "10", "--format", "csv"});
  const auto table = phaseplan::csv::parse(t.out);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0][*table.column("t_vs")] == "6.0000");
}

TEST_CASE("cli plan over the stepwise grid") {
  auto r = invoke(grid_plan("75"));
  REQUIRE(r.status == 0);
  auto j = json::parse(r.out);
  CHECK(j["composition"]["m1.large"] == 5);
  CHECK(j["t_est"].get<double>() == 68.52);
  CHECK(j["feasible"] == true);
  CHECK(j["margin"].get<double>() == doctest::Approx(6.48));

  r = invoke(grid_plan("200"));
  REQUIRE(r.status == 0);
  CHECK(json::parse(r.out)["composition"]["m1.large"] == 5);

  r = invoke(grid_plan("60"));
  CHECK(json::parse(r.out)["composition"]["m1.large"] == 10);

  r = invoke(grid_plan("10"));
  CHECK(r.status == 1);
  CHECK(r.err.find("infeasible") != std::string::npos);
  j = json::parse(r.out);
  CHECK(j["feasible"] == false);
}

TEST_CASE("cli plan on the closed form") {
  const std::vector<std::string> base{"plan", "--profiles", data_path("profiles.json"), "--catalog",
                                      data_path("catalog.json"), "--types", "m1.large", "--iter", "5"};
  auto args = base;
  args.insert(args.end(), {"--slo", "10"});
  auto r = invoke(args);
  CHECK(r.status == 1);
  CHECK(r.err.find("feasible interval empty") != std::string::npos);

  args = base;
  args.insert(args.end(), {"--slo", "120", "--format", "table"});
  r = invoke(args);
  CHECK(r.status == 0);
  CHECK(r.out.find("analytic") != std::string::npos);

  args = base;
  args.insert(args.end(), {"--budget", "0.000001"});
  r = invoke(args);
  CHECK(r.status == 1);
  CHECK(r.out.empty());
  CHECK(r.err.find("NoAffordableCluster") != std::string::npos);

  args = base;
  args.insert(args.end(), {"--budget", "0.05"});
  r = invoke(args);
  CHECK(r.status == 0);
  CHECK(json::parse(r.out)["objective"] == "min_time_under_budget");

  // Mixed catalog without a second profile needs pooling.
  r = invoke({"plan", "--profiles", data_path("profiles.json"), "--catalog", data_path("catalog.json"), "--slo", "120"});
  CHECK(r.status == 2);
  CHECK(r.err.find("NoProfileForType") != std::string::npos);
  for (const char* method : {"auto", "brute-force", "relaxed"}) {
    r = invoke({"plan", "--profiles", data_path("profiles.json"), "--catalog", data_path("catalog.json"), "--slo",
                "120", "--iter", "5", "--heterogeneous", "--n-max", "40", "--method", method});
    CHECK(r.status == 0);
    CHECK(json::parse(r.out)["feasible"] == true);
  }
}

TEST_CASE("cli plan request documents") {
  const auto request = temp_file("request.json", R"({
    "workload": {"dataset_size_bytes": 265000000, "iterations": 5, "mode": "yarn", "category": "mllib",
                 "task_mix": {"map": 2, "count": 1}},
    "objective": "min_cost_under_slo", "slo_seconds": 90, "n_max": 50, "instance_types": ["m1.large"]
  })");
  auto r = invoke({"plan", "--profiles", data_path("profiles.json"), "--catalog", data_path("catalog.json"),
                   "--request", request});
  REQUIRE(r.status == 0);
  const auto j = json::parse(r.out);
  CHECK(j["t_est"].get<double>() <= 90);

  r = invoke({"plan", "--profiles", data_path("profiles.json"), "--catalog", data_path("catalog.json"),
              "--request", request, "--slo", "10"});
  CHECK(r.status == 1);
}

TEST_CASE("cli input errors") {
  CHECK(invoke({}).status == 2);
  CHECK(invoke({"estimate"}).status == 2);
  CHECK(invoke({"estimate", "--profiles", "/nonexistent.json"}).status == 2);
  CHECK(invoke({"estimate", "--profiles", data_path("profiles.json"), "--n", "0"}).status == 2);
  CHECK(invoke({"estimate", "--profiles", data_path("profiles.json"), "--task-mix", "reduce:1"}).status == 2);
  CHECK(invoke({"plan", "--catalog", data_path("catalog.json")}).status == 2);
  CHECK(invoke({"plan", "--catalog", data_path("catalog.json"), "--slo", "5", "--budget", "1"}).status == 2);
  const auto r = invoke({"sweep", "--profiles", data_path("profiles.json"), "--n", "9:1"});
  CHECK(r.status == 2);
  CHECK(r.out.empty());
  CHECK_FALSE(r.err.empty());
  const auto help = invoke({"--help"});
  CHECK(help.status == 0);
  CHECK(help.out.find("plan") != std::string::npos);
}

TEST_CASE("cli evaluate") {
  auto r = invoke({"evaluate", "--predictions", data_path("slo_schedule.csv")});
  REQUIRE(r.status == 0);
  const auto j = json::parse(r.out);
  CHECK(j["slo_satisfaction_rate"].get<double>() == 92.0);
  CHECK(j["count"] == 50);

  r = invoke({"evaluate", "--predictions", data_path("stepwise_accuracy.csv"), "--format", "csv"});
  REQUIRE(r.status == 0);
  CHECK(phaseplan::csv::parse(r.out).rows.size() == 16);
}

TEST_CASE("cli sweep") {
  const auto r = invoke({"sweep", "--profiles", data_path("profiles.json"), "--n", "1:10", "--iter", "5,10"});
  REQUIRE(r.status == 0);
  const auto t = phaseplan::csv::parse(r.out);
  CHECK(t.rows.size() == 20);
  CHECK(t.header.back() == "t_est");
  const auto j = invoke({"sweep", "--profiles", data_path("profiles.json"), "--n", "2:8:2", "--format", "json"});
  CHECK(json::parse(j.out).size() == 4);
}

TEST_CASE("cli fit") {
  const auto prof = testing::mllib_profile();
  std::string csv = "iter,n,s_bytes,t_vs,t_commn,t_total\n";
  for (int iter : {1, 5, 10}) {
    for (int n : {2, 4, 8}) {
      const double ratio = 1.0 + n / 4.0;
      const auto s = static_cast<std::uint64_t>(prof.s_baseline_bytes * ratio);
      const double real_ratio = static_cast<double>(s) / static_cast<double>(prof.s_baseline_bytes);
      csv += std::to_string(iter) + "," + std::to_string(n) + "," + std::to_string(s) + "," +
             phaseplan::csv::escape(std::to_string(0.004 * iter * n * 15)) + "," +
             std::to_string(0.07 * 11 * real_ratio) + ",100\n";
    }
  }
  const auto measurements = temp_file("runs.csv", csv);
  auto partial = prof;
  partial.coeff = 0;
  partial.cf_commn = 0;
  const auto profile = temp_file("partial.json", phaseplan::serialize_profiles({partial}));
  const auto samples = temp_file("ops.csv", "op,seconds\nmap,0.1\nmap,0.2\nreduce,0.4\n");
  const auto r = invoke({"fit", "--measurements", measurements, "--profile", profile, "--op-samples", samples});
  REQUIRE(r.status == 0);
  const auto fitted = phaseplan::parse_profiles(r.out).at(0);
  CHECK(fitted.coeff == doctest::Approx(0.004).epsilon(1e-5));
  CHECK(fitted.cf_commn == doctest::Approx(0.07).epsilon(1e-5));
  CHECK(fitted.rdd_op_means.at("map") == doctest::Approx(0.15));
  CHECK(fitted.rdd_op_means.at("reduce") == doctest::Approx(0.4));

  const auto out_path = (std::filesystem::temp_directory_path() / "phaseplan_test_fitted.json").string();
  const auto w = invoke({"fit", "--measurements", measurements, "--profile", profile, "-o", out_path});
  CHECK(w.status == 0);
  CHECK(w.out.empty());
  CHECK(testing::slurp(out_path).find("\"coeff\"") != std::string::npos);
}

TEST_CASE("cli output is byte-identical across runs") {
  const std::vector<std::vector<std::string>> commands{
      {"estimate", "--profiles", data_path("profiles.json"), "--iter", "7", "--n", "9"},
      {"estimate", "--profiles", data_path("profiles.json"), "--format", "table"},
      {"sweep", "--profiles", data_path("profiles.json"), "--n", "1:50", "--iter", "1:20:3"},
      grid_plan("75"),
      {"plan", "--profiles", data_path("profiles.json"), "--catalog", data_path("catalog.json"), "--slo", "200",
       "--heterogeneous", "--n-max", "30", "--workers", "3"},
      {"evaluate", "--predictions", data_path("slo_schedule.csv"), "--format", "table"},
  };
  for (const auto& cmd : commands) {
    const auto a = invoke(cmd);
    const auto b = invoke(cmd);
    CHECK(a.status == b.status);
    CHECK(a.out == b.out);
    CHECK_FALSE(a.out.empty());
  }
}
