#include "phaseplan/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "phaseplan/csv.hpp"
#include "phaseplan/error.hpp"

namespace phaseplan {

using nlohmann::json;
using nlohmann::ordered_json;

void JobProfile::validate() const {
  auto nonneg = [](double v) { return std::isfinite(v) && v >= 0; };
  const std::string key = std::string(to_string(category)) + "/" + instance_type;
  if (instance_type.empty()) throw Error(ErrorCode::InvalidInput, "profile has an empty instance_type");
  if (!nonneg(t_init) || !nonneg(t_prep) || !nonneg(t_vs_baseline) || !nonneg(t_commn_baseline)) {
    throw Error(ErrorCode::InvalidInput, key + ": phase baselines must be >= 0");
  }
  if (!nonneg(coeff) || !nonneg(cf_commn)) throw Error(ErrorCode::InvalidInput, key + ": coefficients must be >= 0");
  if (rdd_op_means.empty()) throw Error(ErrorCode::InvalidInput, key + ": rdd_op_means is empty");
  for (const auto& [op, mean] : rdd_op_means) {
    if (!nonneg(mean)) throw Error(ErrorCode::InvalidInput, key + ": mean of op '" + op + "' must be >= 0");
  }
  if (n_unit_baseline < 1) throw Error(ErrorCode::InvalidInput, key + ": n_unit_baseline must be >= 1");
  if (s_baseline_bytes < 1) throw Error(ErrorCode::InvalidInput, key + ": s_baseline_bytes must be >= 1");
}

namespace {

// Origin-constrained least squares: slope = sum(x*y) / sum(x*x).
double fit_through_origin(const std::vector<std::pair<double, double>>& points, const char* what) {
  if (points.size() < 2) {
    throw Error(ErrorCode::InsufficientData,
                std::string(what) + ": need at least 2 runs with an observation, got " + std::to_string(points.size()));
  }
  double sxy = 0;
  double sxx = 0;
  for (const auto& [x, y] : points) {
    sxy += x * y;
    sxx += x * x;
  }
  if (sxx == 0) throw Error(ErrorCode::DegenerateDesign, std::string(what) + ": every regressor value is zero");
  return sxy / sxx;
}

}  // namespace

double fit_coeff(const std::vector<MeasurementRun>& runs, double t_vs_baseline) {
  if (!(t_vs_baseline > 0)) throw Error(ErrorCode::InvalidInput, "fit_coeff: t_vs_baseline must be > 0");
  std::vector<std::pair<double, double>> points;
  for (const auto& run : runs) {
    if (!run.observed_t_vs) continue;
    const double x = static_cast<double>(run.iter) * static_cast<double>(run.n) * t_vs_baseline;
    points.emplace_back(x, *run.observed_t_vs);
  }
  return fit_through_origin(points, "fit_coeff");
}

double fit_cf_commn(const std::vector<MeasurementRun>& runs, double t_commn_baseline,
                    std::uint64_t s_baseline_bytes) {
  if (!(t_commn_baseline > 0)) throw Error(ErrorCode::InvalidInput, "fit_cf_commn: t_commn_baseline must be > 0");
  if (s_baseline_bytes < 1) throw Error(ErrorCode::InvalidInput, "fit_cf_commn: s_baseline_bytes must be >= 1");
  std::vector<std::pair<double, double>> points;
  for (const auto& run : runs) {
    if (!run.observed_t_commn) continue;
    const double s_ratio = static_cast<double>(run.s_bytes) / static_cast<double>(s_baseline_bytes);
    points.emplace_back(s_ratio * t_commn_baseline, *run.observed_t_commn);
  }
  return fit_through_origin(points, "fit_cf_commn");
}

ModelParams build_model_params(const JobProfile& profile, const WorkloadSpec& workload, const BuildOptions& options) {
  profile.validate();
  workload.validate();
  if (profile.category != workload.category) {
    throw Error(ErrorCode::CategoryMismatch, "profile category " + std::string(to_string(profile.category)) +
                                                 " does not match workload category " +
                                                 std::string(to_string(workload.category)));
  }

  // Mean cost of one unit task under the declared op mix.
  double weighted = 0;
  double total_count = 0;
  for (const auto& entry : workload.task_mix) {
    auto it = profile.rdd_op_means.find(entry.op);
    if (it == profile.rdd_op_means.end()) {
      throw Error(ErrorCode::UnknownRddOp, "op '" + entry.op + "' is not in the profile for " +
                                               std::string(to_string(profile.category)) + "/" + profile.instance_type);
    }
    weighted += static_cast<double>(entry.count) * it->second;
    total_count += static_cast<double>(entry.count);
  }

  ModelParams p;
  p.s_ratio = static_cast<double>(workload.dataset_size_bytes) / static_cast<double>(profile.s_baseline_bytes);
  p.n_unit = unit_task_count(profile.n_unit_baseline, p.s_ratio, workload.iterations, options.iter_in_nunit);
  p.t_init = profile.t_init;
  p.t_prep = profile.t_prep;
  p.k0 = profile.t_init + profile.t_prep;
  p.c = profile.coeff * profile.t_vs_baseline;
  p.a = profile.cf_commn * profile.t_commn_baseline;
  p.b = static_cast<double>(p.n_unit) * (weighted / total_count);
  p.source = std::string(to_string(profile.category)) + "/" + profile.instance_type;
  return p;
}

bool validate_representative(const std::set<std::string>& rep_ops, bool rep_iterative,
                             const std::set<std::string>& target_ops, bool target_iterative) {
  if (rep_iterative != target_iterative) return false;
  return std::includes(rep_ops.begin(), rep_ops.end(), target_ops.begin(), target_ops.end());
}

std::map<std::string, double> average_op_samples(const std::vector<std::pair<std::string, double>>& samples) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& [op, seconds] : samples) {
    auto& slot = acc[op];
    slot.first += seconds;
    ++slot.second;
  }
  std::map<std::string, double> means;
  for (const auto& [op, slot] : acc) means[op] = slot.first / static_cast<double>(slot.second);
  return means;
}

ProfileRegistry::ProfileRegistry(std::vector<JobProfile> profiles) : profiles_(std::move(profiles)) {
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    const auto& p = profiles_[i];
    auto [_, inserted] = index_.emplace(std::make_pair(p.category, p.instance_type), i);
    if (!inserted) {
      throw Error(ErrorCode::DuplicateProfile,
                  "duplicate profile for " + std::string(to_string(p.category)) + "/" + p.instance_type);
    }
  }
}

const JobProfile* ProfileRegistry::find(Category category, std::string_view instance_type) const {
  auto it = index_.find(std::make_pair(category, std::string(instance_type)));
  return it == index_.end() ? nullptr : &profiles_[it->second];
}

const JobProfile& ProfileRegistry::lookup(Category category, std::string_view instance_type) const {
  if (const auto* p = find(category, instance_type)) return *p;
  throw Error(ErrorCode::ProfileNotFound,
              "no profile for (" + std::string(to_string(category)) + ", " + std::string(instance_type) + ")");
}

const JobProfile& registry_lookup(Category category, std::string_view instance_type, const ProfileRegistry& registry) {
  return registry.lookup(category, instance_type);
}

namespace {

template <typename T>
T required(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::ParseError, ctx + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, ctx + ": field '" + key + "' has the wrong type");
  }
}

double number(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::ParseError, ctx + ": missing field '" + key + "'");
  if (!it->is_number()) throw Error(ErrorCode::ParseError, ctx + ": field '" + key + "' must be a number");
  return it->get<double>();
}

template <typename Int>
Int integer(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::ParseError, ctx + ": missing field '" + key + "'");
  if (!it->is_number_integer()) throw Error(ErrorCode::ParseError, ctx + ": field '" + key + "' must be an integer");
  if (it->is_number_unsigned()) return static_cast<Int>(it->get<std::uint64_t>());
  const auto v = it->get<std::int64_t>();
  if (v < 0) throw Error(ErrorCode::InvalidInput, ctx + ": field '" + key + "' must be >= 0");
  return static_cast<Int>(v);
}

JobProfile profile_from_json(const json& obj, const std::string& ctx, const ProfileParseOptions& options) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, ctx + ": expected an object");
  JobProfile p;
  p.category = parse_category(required<std::string>(obj, "category", ctx));
  p.instance_type = required<std::string>(obj, "instance_type", ctx);
  p.t_init = number(obj, "t_init", ctx);
  p.t_prep = number(obj, "t_prep", ctx);
  p.t_vs_baseline = number(obj, "t_vs_baseline", ctx);
  p.t_commn_baseline = number(obj, "t_commn_baseline", ctx);
  if (options.allow_missing_coefficients) {
    p.coeff = obj.contains("coeff") ? number(obj, "coeff", ctx) : 0.0;
    p.cf_commn = obj.contains("cf_commn") ? number(obj, "cf_commn", ctx) : 0.0;
  } else {
    p.coeff = number(obj, "coeff", ctx);
    p.cf_commn = number(obj, "cf_commn", ctx);
  }
  p.s_baseline_bytes = integer<std::uint64_t>(obj, "s_baseline_bytes", ctx);
  p.n_unit_baseline = integer<std::int64_t>(obj, "n_unit_baseline", ctx);

  double scale = 1.0;
  if (auto unit = obj.find("rdd_op_unit"); unit != obj.end()) {
    if (!unit->is_string()) throw Error(ErrorCode::ParseError, ctx + ": rdd_op_unit must be a string");
    const auto u = unit->get<std::string>();
    if (u == "ms") {
      scale = 1e-3;
    } else if (u != "s") {
      throw Error(ErrorCode::ParseError, ctx + ": rdd_op_unit must be \"s\" or \"ms\"");
    }
  }
  auto means = obj.find("rdd_op_means");
  if (means == obj.end() || !means->is_object()) {
    throw Error(ErrorCode::ParseError, ctx + ": rdd_op_means must be an object");
  }
  for (const auto& [op, value] : means->items()) {
    if (!value.is_number()) throw Error(ErrorCode::ParseError, ctx + ": mean of op '" + op + "' must be a number");
    p.rdd_op_means[op] = value.get<double>() * scale;
  }
  p.representative_job = required<std::string>(obj, "representative_job", ctx);
  p.iterative = required<bool>(obj, "iterative", ctx);
  p.validate();
  return p;
}

ordered_json profile_to_json(const JobProfile& p) {
  ordered_json obj;
  obj["category"] = std::string(to_string(p.category));
  obj["instance_type"] = p.instance_type;
  obj["t_init"] = p.t_init;
  obj["t_prep"] = p.t_prep;
  obj["t_vs_baseline"] = p.t_vs_baseline;
  obj["coeff"] = p.coeff;
  obj["t_commn_baseline"] = p.t_commn_baseline;
  obj["cf_commn"] = p.cf_commn;
  obj["s_baseline_bytes"] = p.s_baseline_bytes;
  obj["n_unit_baseline"] = p.n_unit_baseline;
  obj["rdd_op_unit"] = "s";
  ordered_json means = ordered_json::object();
  for (const auto& [op, mean] : p.rdd_op_means) means[op] = mean;
  obj["rdd_op_means"] = means;
  obj["representative_job"] = p.representative_job;
  obj["iterative"] = p.iterative;
  return obj;
}

}  // namespace

std::vector<JobProfile> parse_profiles(std::string_view json_text, const ProfileParseOptions& options) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "profile document at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "profile document must be an object");
  const auto version = integer<std::int64_t>(doc, "version", "profile document");
  if (version != 1) throw Error(ErrorCode::ParseError, "unsupported profile document version " + std::to_string(version));
  auto list = doc.find("profiles");
  if (list == doc.end() || !list->is_array()) throw Error(ErrorCode::ParseError, "'profiles' must be an array");
  std::vector<JobProfile> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    out.push_back(profile_from_json((*list)[i], "profiles[" + std::to_string(i) + "]", options));
  }
  return out;
}

std::string serialize_profiles(const std::vector<JobProfile>& profiles) {
  ordered_json doc;
  doc["version"] = 1;
  doc["profiles"] = ordered_json::array();
  for (const auto& p : profiles) doc["profiles"].push_back(profile_to_json(p));
  return doc.dump(2) + "\n";
}

ProfileRegistry load_registry(std::string_view json_text) { return ProfileRegistry(parse_profiles(json_text)); }

ProfileRegistry load_registry_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open profile file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_registry(buf.str());
}

std::vector<MeasurementRun> parse_measurements(std::string_view csv_text) {
  const auto table = csv::parse(csv_text);
  const auto c_iter = table.require_column("iter");
  const auto c_n = table.require_column("n");
  const auto c_s = table.require_column("s_bytes");
  const auto c_vs = table.require_column("t_vs");
  const auto c_commn = table.require_column("t_commn");
  const auto c_total = table.require_column("t_total");
  std::vector<MeasurementRun> runs;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.lines[r];
    MeasurementRun run;
    run.iter = csv::to_int(row[c_iter], line, "iter");
    run.n = csv::to_int(row[c_n], line, "n");
    const auto s = csv::to_int(row[c_s], line, "s_bytes");
    run.observed_t_vs = csv::to_optional_double(row[c_vs], line, "t_vs");
    run.observed_t_commn = csv::to_optional_double(row[c_commn], line, "t_commn");
    run.observed_t_total = csv::to_double(row[c_total], line, "t_total");
    if (run.iter < 1 || run.n < 1 || s < 1) {
      throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line) + ": iter, n and s_bytes must be >= 1");
    }
    run.s_bytes = static_cast<std::uint64_t>(s);
    auto negative = [](const std::optional<double>& v) { return v && *v < 0; };
    if (negative(run.observed_t_vs) || negative(run.observed_t_commn) || run.observed_t_total < 0) {
      throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line) + ": observed times must be >= 0");
    }
    runs.push_back(run);
  }
  return runs;
}

std::string serialize_measurements(const std::vector<MeasurementRun>& runs) {
  std::ostringstream out;
  out << "iter,n,s_bytes,t_vs,t_commn,t_total\n";
  auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string();
    std::ostringstream s;
    s.precision(17);
    s << *v;
    return s.str();
  };
  for (const auto& r : runs) {
    std::ostringstream total;
    total.precision(17);
    total << r.observed_t_total;
    out << r.iter << ',' << r.n << ',' << r.s_bytes << ',' << opt(r.observed_t_vs) << ',' << opt(r.observed_t_commn)
        << ',' << total.str() << '\n';
  }
  return out.str();
}

}  // namespace phaseplan
