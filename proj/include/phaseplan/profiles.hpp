#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phaseplan/model.hpp"

namespace phaseplan {

/// Baselines and empirical coefficients measured by running a category's
/// representative job on a single node of one instance type.
struct JobProfile {
  Category category = Category::mllib;
  std::string instance_type;
  double t_init = 0;
  double t_prep = 0;
  double t_vs_baseline = 0;
  double coeff = 0;
  double t_commn_baseline = 0;
  double cf_commn = 0;
  std::uint64_t s_baseline_bytes = 1;
  std::int64_t n_unit_baseline = 1;
  /// Mean duration of each elementary op, in seconds.
  std::map<std::string, double> rdd_op_means;
  std::string representative_job;
  bool iterative = false;

  void validate() const;
  bool operator==(const JobProfile&) const = default;
};

struct MeasurementRun {
  std::int64_t iter = 1;
  std::int64_t n = 1;
  std::uint64_t s_bytes = 1;
  std::optional<double> observed_t_vs;
  std::optional<double> observed_t_commn;
  double observed_t_total = 0;

  bool operator==(const MeasurementRun&) const = default;
};

/// Least-squares slope through the origin of observed_t_vs against
/// iter * n * t_vs_baseline.
double fit_coeff(const std::vector<MeasurementRun>& runs, double t_vs_baseline);

/// Same fit for the communication coefficient, against
/// (s_bytes / s_baseline_bytes) * t_commn_baseline.
double fit_cf_commn(const std::vector<MeasurementRun>& runs, double t_commn_baseline,
                    std::uint64_t s_baseline_bytes);

struct BuildOptions {
  /// Literal task-count form (iterations multiply the task count).
  bool iter_in_nunit = true;
};

ModelParams build_model_params(const JobProfile& profile, const WorkloadSpec& workload,
                               const BuildOptions& options = {});

/// A representative job covers a target when it contains every elementary op
/// the target uses and both agree on being iterative.
bool validate_representative(const std::set<std::string>& rep_ops, bool rep_iterative,
                             const std::set<std::string>& target_ops, bool target_iterative);

/// Averages repeated occurrences of the same op into one mean per op.
std::map<std::string, double> average_op_samples(const std::vector<std::pair<std::string, double>>& samples);

/// Immutable store of profiles keyed by (category, instance type).
class ProfileRegistry {
 public:
  ProfileRegistry() = default;
  /// Rejects duplicate keys with Error{DuplicateProfile}.
  explicit ProfileRegistry(std::vector<JobProfile> profiles);

  const JobProfile& lookup(Category category, std::string_view instance_type) const;
  const JobProfile* find(Category category, std::string_view instance_type) const;
  const std::vector<JobProfile>& profiles() const { return profiles_; }

 private:
  std::vector<JobProfile> profiles_;
  std::map<std::pair<Category, std::string>, std::size_t> index_;
};

const JobProfile& registry_lookup(Category category, std::string_view instance_type,
                                  const ProfileRegistry& registry);

struct ProfileParseOptions {
  /// Accept profiles without "coeff" / "cf_commn" (inputs to `fit`); both default to 0.
  bool allow_missing_coefficients = false;
};

/// Parses a versioned profile document. Op means are read in the unit named by
/// the optional "rdd_op_unit" field ("s" or "ms", default "s") and stored in
/// seconds. Throws Error{ParseError} on malformed input and
/// Error{InvalidInput} on invariant violations.
std::vector<JobProfile> parse_profiles(std::string_view json_text, const ProfileParseOptions& options = {});
std::string serialize_profiles(const std::vector<JobProfile>& profiles);

ProfileRegistry load_registry(std::string_view json_text);
ProfileRegistry load_registry_file(const std::string& path);

/// Measurement CSV with header iter,n,s_bytes,t_vs,t_commn,t_total.
std::vector<MeasurementRun> parse_measurements(std::string_view csv_text);
std::string serialize_measurements(const std::vector<MeasurementRun>& runs);

}  // namespace phaseplan
