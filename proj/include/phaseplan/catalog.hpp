#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace phaseplan {

struct InstanceType {
  std::string name;
  /// Currency per node-hour.
  double hourly_cost = 0;
  /// Throughput relative to the catalog's reference type.
  double speed_factor = 1.0;

  bool operator==(const InstanceType&) const = default;
};

class Catalog {
 public:
  Catalog() = default;
  /// Throws Error{DuplicateInstanceType} or Error{InvalidInput}.
  Catalog(std::vector<InstanceType> types, std::string reference_type = {});

  const std::vector<InstanceType>& types() const { return types_; }
  const std::string& reference_type() const { return reference_type_; }
  bool empty() const { return types_.empty(); }

  /// Throws Error{UnknownInstanceType}.
  const InstanceType& at(std::string_view name) const;
  const InstanceType* find(std::string_view name) const;

 private:
  std::vector<InstanceType> types_;
  std::string reference_type_;
};

/// Node counts per instance-type name.
struct ClusterComposition {
  std::map<std::string, std::int64_t> counts;

  std::int64_t total() const;
  bool operator==(const ClusterComposition&) const = default;
};

enum class Billing { linear, hourly_rounded };

std::string_view to_string(Billing billing);
Billing parse_billing(std::string_view name);

/// Parses {"version":1,"reference_type":...,"types":[...]}. Errors carry the
/// byte offset of malformed JSON.
Catalog load_catalog(std::string_view json_text);
Catalog load_catalog_file(const std::string& path);
std::string serialize_catalog(const Catalog& catalog);

/// Sum over types of hourly_cost * n_t * hours, where hours is t_est / 3600
/// (linear) or its ceiling (hourly_rounded).
double usage_cost(const ClusterComposition& composition, const Catalog& catalog, double t_est_seconds,
                  Billing billing = Billing::linear);

/// Billed hours for one node under the given billing mode.
double billed_hours(double t_est_seconds, Billing billing);

}  // namespace phaseplan
