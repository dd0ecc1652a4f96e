#include "phaseplan/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "phaseplan/catalog.hpp"
#include "phaseplan/csv.hpp"
#include "phaseplan/error.hpp"
#include "phaseplan/evaluation.hpp"
#include "phaseplan/model.hpp"
#include "phaseplan/planner.hpp"
#include "phaseplan/profiles.hpp"

namespace phaseplan::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

enum class Format { json, csv, table };

Format parse_format(const std::string& name) {
  if (name == "json") return Format::json;
  if (name == "csv") return Format::csv;
  return Format::table;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) s += "  ";
      s += cells[c];
      if (c + 1 < cells.size()) s.append(width[c] - cells[c].size(), ' ');
    }
    out += s + "\n";
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out;
}

std::string render_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += ",";
      out += csv::escape(cells[c]);
    }
    out += "\n";
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out;
}

std::string render(Format format, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
  return format == Format::csv ? render_csv(header, rows) : render_table(header, rows);
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::InvalidInput, std::string(what) + ": '" + std::string(text) + "' is not an integer");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

/// "a:b", "a:b:step", "a,b,c" or a single value.
std::vector<std::int64_t> parse_range(std::string_view text, std::string_view what) {
  std::vector<std::int64_t> out;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() > 3) throw Error(ErrorCode::InvalidInput, std::string(what) + ": range is a:b or a:b:step");
    const auto a = parse_int(parts[0], what);
    const auto b = parse_int(parts[1], what);
    const auto step = parts.size() == 3 ? parse_int(parts[2], what) : 1;
    if (step < 1 || b < a) throw Error(ErrorCode::InvalidInput, std::string(what) + ": empty range '" + std::string(text) + "'");
    if ((b - a) / step >= 10'000'000) throw Error(ErrorCode::InvalidInput, std::string(what) + ": range too long");
    for (auto v = a; v <= b; v += step) out.push_back(v);
  } else {
    for (auto part : split(text, ',')) out.push_back(parse_int(part, what));
  }
  return out;
}

std::vector<TaskMixEntry> parse_task_mix(std::string_view text) {
  std::vector<TaskMixEntry> mix;
  for (auto item : split(text, ',')) {
    const auto colon = item.find(':');
    TaskMixEntry e;
    e.op = std::string(item.substr(0, colon));
    if (colon != std::string_view::npos) e.count = parse_int(item.substr(colon + 1), "--task-mix");
    mix.push_back(std::move(e));
  }
  return mix;
}

std::vector<TaskMixEntry> default_task_mix(const JobProfile& profile) {
  std::vector<TaskMixEntry> mix;
  for (const auto& [op, _] : profile.rdd_op_means) mix.push_back({op, 1});
  return mix;
}

ordered_json breakdown_json(const PhaseBreakdown& bd) {
  ordered_json j;
  j["t_init"] = bd.t_init;
  j["t_prep"] = bd.t_prep;
  j["t_vs"] = bd.t_vs;
  j["t_commn"] = bd.t_commn;
  j["t_exec"] = bd.t_exec;
  j["t_comp"] = bd.t_comp;
  j["t_est"] = bd.t_est;
  j["comp_divisor"] = bd.comp_divisor;
  return j;
}

ordered_json params_json(const ModelParams& p) {
  ordered_json j;
  j["k0"] = p.k0;
  j["a"] = p.a;
  j["b"] = p.b;
  j["c"] = p.c;
  j["n_unit"] = p.n_unit;
  j["s_ratio"] = p.s_ratio;
  return j;
}

// Options shared by subcommands that build a workload from a profile.
struct WorkloadFlags {
  std::string category = "mllib";
  std::string mode = "standalone";
  std::string task_mix;
  bool linear_nunit = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--category", category, "Application category")
        ->check(CLI::IsMember({"spark_sql", "streaming", "mllib", "graphx"}));
    cmd->add_option("--mode", mode, "Deployment mode")->check(CLI::IsMember({"standalone", "yarn"}));
    cmd->add_option("--task-mix", task_mix, "Ops per unit task as op:count,... (default: every profiled op once)");
    cmd->add_flag("--linear-nunit", linear_nunit, "Do not multiply the unit task count by the iterations");
  }

  WorkloadSpec workload(std::int64_t iter, std::uint64_t s_bytes, const JobProfile* profile) const {
    WorkloadSpec w;
    w.category = parse_category(category);
    w.mode = parse_mode(mode);
    w.iterations = iter;
    w.dataset_size_bytes = s_bytes;
    if (!task_mix.empty()) {
      w.task_mix = parse_task_mix(task_mix);
    } else if (profile) {
      w.task_mix = default_task_mix(*profile);
    } else {
      w.task_mix = {{"unit", 1}};
    }
    w.validate();
    return w;
  }

  BuildOptions build() const { return BuildOptions{!linear_nunit}; }
};

const JobProfile& pick_profile(const ProfileRegistry& registry, Category category, const std::string& instance_type) {
  if (!instance_type.empty()) return registry_lookup(category, instance_type, registry);
  const JobProfile* found = nullptr;
  for (const auto& p : registry.profiles()) {
    if (p.category != category) continue;
    if (found) {
      throw Error(ErrorCode::InvalidInput, "several " + std::string(to_string(category)) +
                                               " profiles; choose one with --instance-type");
    }
    found = &p;
  }
  if (!found) throw Error(ErrorCode::ProfileNotFound, "no " + std::string(to_string(category)) + " profile");
  return *found;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string measurements;
  std::string profile;
  std::string op_samples;
  std::string category;
  std::string instance_type;
};

int do_fit(const FitArgs& args, Format format, std::string& data, std::ostream&) {
  if (format != Format::json) throw Error(ErrorCode::InvalidInput, "fit writes a profile document; use --format json");
  ProfileParseOptions options;
  options.allow_missing_coefficients = true;
  auto profiles = parse_profiles(read_file(args.profile), options);
  const auto runs = parse_measurements(read_file(args.measurements));

  JobProfile* target = nullptr;
  for (auto& p : profiles) {
    if (!args.category.empty() && p.category != parse_category(args.category)) continue;
    if (!args.instance_type.empty() && p.instance_type != args.instance_type) continue;
    if (target) throw Error(ErrorCode::InvalidInput, "several profiles match; narrow with --category/--instance-type");
    target = &p;
  }
  if (!target) throw Error(ErrorCode::ProfileNotFound, "no profile in '" + args.profile + "' matches");

  if (!args.op_samples.empty()) {
    const auto table = csv::parse(read_file(args.op_samples));
    const auto c_op = table.require_column("op");
    const auto c_sec = table.require_column("seconds");
    std::vector<std::pair<std::string, double>> samples;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      samples.emplace_back(table.rows[r][c_op], csv::to_double(table.rows[r][c_sec], table.lines[r], "seconds"));
    }
    for (const auto& [op, mean] : average_op_samples(samples)) target->rdd_op_means[op] = mean;
  }
  target->coeff = fit_coeff(runs, target->t_vs_baseline);
  target->cf_commn = fit_cf_commn(runs, target->t_commn_baseline, target->s_baseline_bytes);
  target->validate();
  data = serialize_profiles({*target});
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string profiles;
  std::string instance_type;
  std::uint64_t s_bytes = 0;
  std::int64_t iter = 1;
  std::int64_t n = 1;
  WorkloadFlags workload;
};

int do_estimate(const EstimateArgs& args, Format format, std::string& data, std::ostream&) {
  const auto registry = load_registry_file(args.profiles);
  const auto& profile = pick_profile(registry, parse_category(args.workload.category), args.instance_type);
  const auto s_bytes = args.s_bytes ? args.s_bytes : profile.s_baseline_bytes;
  const auto workload = args.workload.workload(args.iter, s_bytes, &profile);
  const auto params = build_model_params(profile, workload, args.workload.build());
  if (args.n < 1) throw Error(ErrorCode::InvalidInput, "--n must be >= 1");
  const auto bd = estimate_completion(params, args.iter, args.n);

  if (format == Format::json) {
    ordered_json j;
    j["category"] = to_string(workload.category);
    j["instance_type"] = profile.instance_type;
    j["mode"] = to_string(workload.mode);
    j["iter"] = args.iter;
    j["n"] = args.n;
    j["s_bytes"] = s_bytes;
    j["breakdown"] = breakdown_json(bd);
    j["params"] = params_json(params);
    data = j.dump(2) + "\n";
  } else {
    const std::vector<std::string> header{"iter", "n", "s_bytes", "t_init", "t_prep", "t_vs", "t_commn", "t_exec", "t_comp", "t_est"};
    const std::vector<std::string> row{std::to_string(args.iter), std::to_string(args.n), std::to_string(s_bytes),
                                       csv::fixed4(bd.t_init), csv::fixed4(bd.t_prep), csv::fixed4(bd.t_vs),
                                       csv::fixed4(bd.t_commn), csv::fixed4(bd.t_exec), csv::fixed4(bd.t_comp),
                                       csv::fixed4(bd.t_est)};
    data = render(format, header, {row});
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string profiles;
  std::string instance_type;
  std::string n = "1:20";
  std::string iter = "1";
  std::string s_bytes;
  WorkloadFlags workload;
};

int do_sweep(const SweepArgs& args, Format format, std::string& data, std::ostream&) {
  const auto registry = load_registry_file(args.profiles);
  const auto& profile = pick_profile(registry, parse_category(args.workload.category), args.instance_type);
  const auto ns = parse_range(args.n, "--n");
  const auto iters = parse_range(args.iter, "--iter");
  std::vector<std::int64_t> sizes;
  if (args.s_bytes.empty()) {
    sizes.push_back(static_cast<std::int64_t>(profile.s_baseline_bytes));
  } else {
    sizes = parse_range(args.s_bytes, "--s-bytes");
  }
  for (auto n : ns) {
    if (n < 1) throw Error(ErrorCode::InvalidInput, "--n values must be >= 1");
  }
  for (auto s : sizes) {
    if (s < 1) throw Error(ErrorCode::InvalidInput, "--s-bytes values must be >= 1");
  }

  const std::vector<std::string> header{"iter", "n", "s_bytes", "t_vs", "t_commn", "t_exec", "t_comp", "t_est"};
  std::vector<std::vector<std::string>> rows;
  ordered_json array = ordered_json::array();
  for (auto s : sizes) {
    for (auto iter : iters) {
      const auto workload = args.workload.workload(iter, static_cast<std::uint64_t>(s), &profile);
      const auto params = build_model_params(profile, workload, args.workload.build());
      for (auto n : ns) {
        const auto bd = estimate_completion(params, iter, n);
        if (format == Format::json) {
          ordered_json j;
          j["iter"] = iter;
          j["n"] = n;
          j["s_bytes"] = s;
          j["t_vs"] = bd.t_vs;
          j["t_commn"] = bd.t_commn;
          j["t_exec"] = bd.t_exec;
          j["t_comp"] = bd.t_comp;
          j["t_est"] = bd.t_est;
          array.push_back(std::move(j));
        } else {
          rows.push_back({std::to_string(iter), std::to_string(n), std::to_string(s), csv::fixed4(bd.t_vs),
                          csv::fixed4(bd.t_commn), csv::fixed4(bd.t_exec), csv::fixed4(bd.t_comp),
                          csv::fixed4(bd.t_est)});
        }
      }
    }
  }
  data = format == Format::json ? array.dump(2) + "\n" : render(format, header, rows);
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct PlanArgs {
  std::string profiles;
  std::string catalog;
  std::string request;
  std::optional<double> slo;
  std::optional<double> budget;
  std::optional<std::int64_t> iter;
  std::optional<std::uint64_t> s_bytes;
  std::string grid;
  std::string types;
  std::vector<std::string> estimates;
  std::optional<std::int64_t> n_max;
  bool heterogeneous = false;
  std::string billing;
  std::string method = "auto";
  unsigned workers = 1;
  std::optional<std::uint64_t> enumeration_cap;
  WorkloadFlags workload;
  CLI::App* cmd = nullptr;
};

template <typename T>
T field(const json& doc, const char* name, const T& fallback) {
  auto it = doc.find(name);
  if (it == doc.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ParseError, std::string("request field '") + name + "' has the wrong type");
  }
}

// Fills `request` from a request document; command-line flags applied later win.
void apply_request_document(const std::string& text, PlanRequest& request, WorkloadFlags& flags) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "request at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "request document must be an object");
  if (auto w = doc.find("workload"); w != doc.end()) {
    if (!w->is_object()) throw Error(ErrorCode::ParseError, "request 'workload' must be an object");
    request.workload.dataset_size_bytes = field<std::uint64_t>(*w, "dataset_size_bytes", request.workload.dataset_size_bytes);
    request.workload.iterations = field<std::int64_t>(*w, "iterations", request.workload.iterations);
    flags.mode = field<std::string>(*w, "mode", flags.mode);
    flags.category = field<std::string>(*w, "category", flags.category);
    if (auto mix = w->find("task_mix"); mix != w->end()) {
      if (!mix->is_object()) throw Error(ErrorCode::ParseError, "request 'task_mix' must map op to count");
      std::string text;
      for (const auto& [op, count] : mix->items()) {
        if (!count.is_number_integer()) throw Error(ErrorCode::ParseError, "task_mix counts must be integers");
        if (!text.empty()) text += ",";
        text += op + ":" + std::to_string(count.get<std::int64_t>());
      }
      flags.task_mix = text;
    }
  }
  if (auto obj = doc.find("objective"); obj != doc.end()) request.objective = parse_objective(obj->get<std::string>());
  if (doc.contains("slo_seconds")) request.slo_seconds = field<double>(doc, "slo_seconds", 0);
  if (doc.contains("budget")) request.budget = field<double>(doc, "budget", 0);
  request.n_max = field<std::int64_t>(doc, "n_max", request.n_max);
  request.heterogeneous = field<bool>(doc, "heterogeneous", request.heterogeneous);
  if (doc.contains("billing")) request.billing = parse_billing(field<std::string>(doc, "billing", "linear"));
  request.candidate_nodes = field<std::vector<std::int64_t>>(doc, "candidate_nodes", request.candidate_nodes);
  request.instance_types = field<std::vector<std::string>>(doc, "instance_types", request.instance_types);
}

ordered_json plan_json(const PlanResult& r, Billing billing) {
  ordered_json j;
  j["objective"] = to_string(r.objective);
  j["method"] = to_string(r.method);
  j["feasible"] = r.feasible;
  j["composition"] = ordered_json::object();
  for (const auto& [name, n] : r.composition.counts) j["composition"][name] = n;
  j["n_total"] = r.composition.total();
  j["t_est"] = r.t_est;
  j["cost"] = r.cost;
  j["billing"] = to_string(billing);
  j["margin"] = r.margin;
  j["breakdown"] = r.breakdown ? breakdown_json(*r.breakdown) : ordered_json(nullptr);
  return j;
}

std::string composition_text(const ClusterComposition& c) {
  std::string s;
  for (const auto& [name, n] : c.counts) {
    if (!s.empty()) s += ";";
    s += name + ":" + std::to_string(n);
  }
  return s;
}

std::string infeasibility_report(const PlanProblem& problem) {
  std::ostringstream msg;
  msg << "infeasible: no composition meets slo " << csv::fixed4(*problem.slo_seconds) << " s";
  if (problem.heterogeneous) {
    const auto interval = feasible_interval(*problem.pooled_params, problem.iter, *problem.slo_seconds);
    msg << "; reference-type feasible interval: ";
    if (interval) {
      msg << "[" << interval->lo << "," << (interval->hi ? std::to_string(*interval->hi) : "inf") << "]";
    } else {
      msg << "empty";
    }
  }
  for (const auto& t : problem.types) {
    msg << "; " << t.type.name << ": ";
    if (t.params) {
      const auto interval = feasible_interval(*t.params, problem.iter, *problem.slo_seconds);
      if (interval) {
        msg << "feasible interval [" << interval->lo << "," << (interval->hi ? std::to_string(*interval->hi) : "inf")
            << "] outside the candidate grid";
      } else {
        msg << "feasible interval empty";
      }
    } else if (t.table) {
      msg << "no tabulated estimate within the slo";
    } else {
      msg << "pooled";
    }
  }
  return msg.str();
}

int do_plan(PlanArgs& args, Format format, std::string& data, std::ostream& err) {
  PlanRequest request;
  if (!args.request.empty()) apply_request_document(read_file(args.request), request, args.workload);

  if (args.slo) {
    request.slo_seconds = args.slo;
    request.budget.reset();
    request.objective = Objective::min_cost_under_slo;
  }
  if (args.budget) {
    request.budget = args.budget;
    request.slo_seconds.reset();
    request.objective = Objective::min_time_under_budget;
  }
  if (args.request.empty() && !args.slo && !args.budget) {
    throw Error(ErrorCode::InvalidInput, "plan needs --slo or --budget");
  }
  if (args.iter) request.workload.iterations = *args.iter;
  if (args.n_max) request.n_max = *args.n_max;
  if (args.heterogeneous) request.heterogeneous = true;
  if (!args.billing.empty()) request.billing = parse_billing(args.billing);
  if (!args.grid.empty()) request.candidate_nodes = parse_range(args.grid, "--grid");
  if (!args.types.empty()) {
    request.instance_types.clear();
    for (auto t : split(args.types, ',')) request.instance_types.emplace_back(t);
  }
  if (args.enumeration_cap) request.enumeration_cap = *args.enumeration_cap;
  request.workers = std::max(1u, args.workers);

  const auto catalog = load_catalog_file(args.catalog);
  const auto registry = args.profiles.empty() ? ProfileRegistry{} : load_registry_file(args.profiles);

  for (const auto& entry : args.estimates) {
    const auto eq = entry.find('=');
    std::string name;
    std::string path = entry;
    if (eq != std::string::npos) {
      name = entry.substr(0, eq);
      path = entry.substr(eq + 1);
    } else if (request.instance_types.size() == 1) {
      name = request.instance_types.front();
    } else if (catalog.types().size() == 1) {
      name = catalog.types().front().name;
    } else {
      throw Error(ErrorCode::InvalidInput, "--estimates needs TYPE=PATH unless exactly one type is selected");
    }
    request.tabulated[name] = EstimateTable::parse_csv(read_file(path));
  }

  // The task mix defaults to the ops profiled for the reference type.
  const auto category = parse_category(args.workload.category);
  const JobProfile* mix_source = registry.find(category, catalog.reference_type());
  if (!mix_source) {
    for (const auto& p : registry.profiles()) {
      if (p.category == category) {
        mix_source = &p;
        break;
      }
    }
  }
  std::uint64_t s_bytes = args.s_bytes ? *args.s_bytes : request.workload.dataset_size_bytes;
  if (!args.s_bytes && args.request.empty() && mix_source) s_bytes = mix_source->s_baseline_bytes;
  request.workload = args.workload.workload(request.workload.iterations, s_bytes, mix_source);
  request.build = args.workload.build();
  request.profiles = &registry;
  request.catalog = &catalog;

  const auto problem = resolve(request);
  PlanResult result;
  std::optional<RelaxedSolution> relaxed;
  try {
    if (args.method == "brute-force") {
      result = brute_force_plan(problem);
    } else if (args.method == "relaxed") {
      relaxed = relaxed_minimize(problem);
      result = relaxed->rounded;
    } else if (args.method == "analytic") {
      if (problem.heterogeneous) throw Error(ErrorCode::InvalidInput, "analytic planning is homogeneous only");
      result = plan(problem);
    } else {
      result = plan(problem);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoAffordableCluster) {
      err << "infeasible: " << e.what() << "\n";
      return kInfeasible;
    }
    throw;
  }

  if (format == Format::json) {
    auto j = plan_json(result, problem.billing);
    if (relaxed) {
      ordered_json r;
      r["counts"] = relaxed->counts;
      r["objective"] = relaxed->objective;
      r["newton_iterations"] = relaxed->newton_iterations;
      r["barrier_gap"] = relaxed->barrier_gap;
      r["status"] = relaxed->status == RelaxationStatus::converged ? "converged" : "certified_infeasible";
      j["relaxation"] = r;
    }
    data = j.dump(2) + "\n";
  } else {
    const std::vector<std::string> header{"objective", "method", "feasible", "composition", "n_total",
                                          "t_est", "cost", "margin"};
    const std::vector<std::string> row{std::string(to_string(result.objective)), std::string(to_string(result.method)),
                                       result.feasible ? "true" : "false", composition_text(result.composition),
                                       std::to_string(result.composition.total()), csv::fixed4(result.t_est),
                                       csv::fixed4(result.cost), csv::fixed4(result.margin)};
    data = render(format, header, {row});
  }
  if (!result.feasible) {
    err << infeasibility_report(problem) << "\n";
    return kInfeasible;
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string predictions;
};

int do_evaluate(const EvaluateArgs& args, Format format, std::string& data, std::ostream&) {
  const auto records = parse_predictions(read_file(args.predictions));
  const double delta = mean_relative_error(records);
  const bool any_slo = std::any_of(records.begin(), records.end(), [](const auto& r) { return r.slo.has_value(); });
  std::optional<double> rate;
  if (any_slo) rate = slo_satisfaction_rate(records);
  std::vector<double> abs_errors;
  for (const auto& r : records) abs_errors.push_back(std::abs(relative_error(r.t_est, r.t_rec)));
  std::optional<std::pair<double, double>> ci;
  if (abs_errors.size() >= 2) ci = confidence_interval(abs_errors);

  if (format == Format::json) {
    ordered_json j;
    j["records"] = ordered_json::array();
    for (const auto& r : records) {
      ordered_json item;
      item["label"] = r.label;
      item["t_est"] = r.t_est;
      item["t_rec"] = r.t_rec;
      item["slo"] = r.slo ? ordered_json(*r.slo) : ordered_json(nullptr);
      item["relative_error"] = relative_error(r.t_est, r.t_rec);
      j["records"].push_back(std::move(item));
    }
    j["count"] = records.size();
    j["mean_relative_error"] = delta;
    j["slo_satisfaction_rate"] = rate ? ordered_json(*rate) : ordered_json(nullptr);
    if (ci) {
      ordered_json c;
      c["low"] = ci->first;
      c["high"] = ci->second;
      c["alpha"] = kNormalQuantile95;
      j["confidence_interval"] = c;
    } else {
      j["confidence_interval"] = nullptr;
    }
    data = j.dump(2) + "\n";
    return kSuccess;
  }

  const std::vector<std::string> header{"label", "t_est", "t_rec", "slo", "relative_error"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : records) {
    rows.push_back({r.label, csv::fixed4(r.t_est), csv::fixed4(r.t_rec), r.slo ? csv::fixed4(*r.slo) : "",
                    csv::fixed4(relative_error(r.t_est, r.t_rec))});
  }
  data = render(format, header, rows);
  if (format == Format::table) {
    data += "\nmean_relative_error  " + csv::fixed4(delta) + "\n";
    data += "slo_satisfaction     " + (rate ? csv::fixed4(*rate) : std::string("n/a")) + "\n";
    data += "abs_re_interval_95   " + (ci ? csv::fixed4(ci->first) + " " + csv::fixed4(ci->second) : std::string("n/a")) + "\n";
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Completion-time estimation and cluster planning for phase-decomposed jobs", "phaseplan"};
  app.require_subcommand(1);

  std::string format_name = "json";
  std::string output;
  auto add_common = [&](CLI::App* cmd, const std::string& default_format) {
    cmd->add_option("--format", format_name, "Output format")
        ->check(CLI::IsMember({"json", "csv", "table"}))
        ->default_str(default_format);
    cmd->add_option("-o,--output", output, "Write data to a file instead of stdout");
  };

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a profile's coefficients from measurement runs");
  fit_cmd->add_option("--measurements", fit.measurements, "Measurement CSV")->required();
  fit_cmd->add_option("--profile", fit.profile, "Profile document (coefficients may be missing)")->required();
  fit_cmd->add_option("--op-samples", fit.op_samples, "CSV op,seconds of per-op timings to average");
  fit_cmd->add_option("--category", fit.category, "Select the profile by category");
  fit_cmd->add_option("--instance-type", fit.instance_type, "Select the profile by instance type");
  add_common(fit_cmd, "json");

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "Estimate the phase breakdown of one configuration");
  est_cmd->add_option("--profiles", est.profiles, "Profile document")->required();
  est_cmd->add_option("--instance-type", est.instance_type, "Instance type of the profile to use");
  est_cmd->add_option("--s-bytes", est.s_bytes, "Dataset size in bytes (default: the profile's baseline)");
  est_cmd->add_option("--iter", est.iter, "Iterations")->check(CLI::PositiveNumber);
  est_cmd->add_option("--n", est.n, "Node count")->check(CLI::PositiveNumber);
  est.workload.add_to(est_cmd);
  add_common(est_cmd, "json");

  PlanArgs pl;
  auto* plan_cmd = app.add_subcommand("plan", "Choose a cluster composition under an SLO or a budget");
  pl.cmd = plan_cmd;
  plan_cmd->add_option("--profiles", pl.profiles, "Profile document");
  plan_cmd->add_option("--catalog", pl.catalog, "Instance catalog")->required();
  plan_cmd->add_option("--request", pl.request, "Plan request document; flags override its fields");
  auto* slo_opt = plan_cmd->add_option("--slo", pl.slo, "Deadline in seconds (minimize cost)");
  auto* budget_opt = plan_cmd->add_option("--budget", pl.budget, "Cost budget (minimize completion time)");
  slo_opt->excludes(budget_opt);
  plan_cmd->add_option("--iter", pl.iter, "Iterations")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--s-bytes", pl.s_bytes, "Dataset size in bytes");
  plan_cmd->add_option("--grid", pl.grid, "Candidate node counts per type (list or a:b[:step])");
  plan_cmd->add_option("--types", pl.types, "Comma-separated instance types to consider");
  plan_cmd->add_option("--estimates", pl.estimates, "[TYPE=]CSV of tabulated iter,n,t_est for a type");
  plan_cmd->add_option("--n-max", pl.n_max, "Largest node count per type")->check(CLI::PositiveNumber);
  plan_cmd->add_flag("--heterogeneous", pl.heterogeneous, "Allow mixing instance types");
  plan_cmd->add_option("--billing", pl.billing, "linear or hourly_rounded")
      ->check(CLI::IsMember({"linear", "hourly_rounded"}));
  plan_cmd->add_option("--method", pl.method, "auto, analytic, brute-force or relaxed")
      ->check(CLI::IsMember({"auto", "analytic", "brute-force", "relaxed"}));
  plan_cmd->add_option("--workers", pl.workers, "Threads for exhaustive enumeration")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--enumeration-cap", pl.enumeration_cap, "Largest grid enumerated exhaustively");
  pl.workload.add_to(plan_cmd);
  add_common(plan_cmd, "json");

  EvaluateArgs ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against recorded completion times");
  eval_cmd->add_option("--predictions", ev.predictions, "CSV label,t_est,t_rec,slo")->required();
  add_common(eval_cmd, "json");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Tabulate estimates over a grid of n, iter and dataset size");
  sweep_cmd->add_option("--profiles", sw.profiles, "Profile document")->required();
  sweep_cmd->add_option("--instance-type", sw.instance_type, "Instance type of the profile to use");
  sweep_cmd->add_option("--n", sw.n, "Node counts (list or a:b[:step])");
  sweep_cmd->add_option("--iter", sw.iter, "Iterations (list or a:b[:step])");
  sweep_cmd->add_option("--s-bytes", sw.s_bytes, "Dataset sizes (list or a:b[:step])");
  sw.workload.add_to(sweep_cmd);
  add_common(sweep_cmd, "csv");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kSuccess;
    }
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  const bool sweep_default = sweep_cmd->parsed() && sweep_cmd->count("--format") == 0;
  const Format format = parse_format(sweep_default ? "csv" : format_name);

  std::string data;
  int status = kSuccess;
  try {
    if (fit_cmd->parsed()) {
      status = do_fit(fit, format, data, err);
    } else if (est_cmd->parsed()) {
      status = do_estimate(est, format, data, err);
    } else if (plan_cmd->parsed()) {
      status = do_plan(pl, format, data, err);
    } else if (eval_cmd->parsed()) {
      status = do_evaluate(ev, format, data, err);
    } else {
      status = do_sweep(sw, format, data, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  if (!output.empty()) {
    std::ofstream file(output, std::ios::binary);
    if (!file || !(file << data)) {
      err << "error: cannot write '" << output << "'\n";
      return kInputError;
    }
  } else {
    out << data;
  }
  return status;
}

}  // namespace phaseplan::cli
