#include "phaseplan/catalog.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "phaseplan/error.hpp"

namespace phaseplan {

using nlohmann::json;
using nlohmann::ordered_json;

Catalog::Catalog(std::vector<InstanceType> types, std::string reference_type)
    : types_(std::move(types)), reference_type_(std::move(reference_type)) {
  std::set<std::string> seen;
  for (const auto& t : types_) {
    if (t.name.empty()) throw Error(ErrorCode::InvalidInput, "instance type with empty name");
    if (!seen.insert(t.name).second) throw Error(ErrorCode::DuplicateInstanceType, "duplicate instance type '" + t.name + "'");
    if (!(t.hourly_cost >= 0) || !std::isfinite(t.hourly_cost)) {
      throw Error(ErrorCode::InvalidInput, t.name + ": hourly_cost must be >= 0");
    }
    if (!(t.speed_factor > 0) || !std::isfinite(t.speed_factor)) {
      throw Error(ErrorCode::InvalidInput, t.name + ": speed_factor must be > 0");
    }
  }
  if (!reference_type_.empty() && !types_.empty() && !find(reference_type_)) {
    throw Error(ErrorCode::UnknownInstanceType, "reference type '" + reference_type_ + "' is not in the catalog");
  }
}

const InstanceType* Catalog::find(std::string_view name) const {
  for (const auto& t : types_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const InstanceType& Catalog::at(std::string_view name) const {
  if (const auto* t = find(name)) return *t;
  throw Error(ErrorCode::UnknownInstanceType, "instance type '" + std::string(name) + "' is not in the catalog");
}

std::int64_t ClusterComposition::total() const {
  std::int64_t sum = 0;
  for (const auto& [_, n] : counts) sum += n;
  return sum;
}

std::string_view to_string(Billing billing) { return billing == Billing::linear ? "linear" : "hourly_rounded"; }

Billing parse_billing(std::string_view name) {
  if (name == "linear") return Billing::linear;
  if (name == "hourly_rounded") return Billing::hourly_rounded;
  throw Error(ErrorCode::InvalidInput, "unknown billing mode '" + std::string(name) + "'");
}

Catalog load_catalog(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "catalog at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "catalog document must be an object");
  if (auto v = doc.find("version"); v == doc.end() || !v->is_number_integer() || v->get<int>() != 1) {
    throw Error(ErrorCode::ParseError, "catalog: 'version' must be 1");
  }
  std::string reference;
  if (auto ref = doc.find("reference_type"); ref != doc.end()) {
    if (!ref->is_string()) throw Error(ErrorCode::ParseError, "catalog: reference_type must be a string");
    reference = ref->get<std::string>();
  }
  auto list = doc.find("types");
  if (list == doc.end() || !list->is_array()) throw Error(ErrorCode::ParseError, "catalog: 'types' must be an array");
  std::vector<InstanceType> types;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const auto& item = (*list)[i];
    const std::string ctx = "catalog types[" + std::to_string(i) + "]";
    if (!item.is_object()) throw Error(ErrorCode::ParseError, ctx + ": expected an object");
    InstanceType t;
    auto name = item.find("name");
    if (name == item.end() || !name->is_string()) throw Error(ErrorCode::ParseError, ctx + ": 'name' must be a string");
    t.name = name->get<std::string>();
    auto cost = item.find("hourly_cost");
    if (cost == item.end() || !cost->is_number()) throw Error(ErrorCode::ParseError, ctx + ": 'hourly_cost' must be a number");
    t.hourly_cost = cost->get<double>();
    if (auto speed = item.find("speed_factor"); speed != item.end()) {
      if (!speed->is_number()) throw Error(ErrorCode::ParseError, ctx + ": 'speed_factor' must be a number");
      t.speed_factor = speed->get<double>();
    }
    types.push_back(std::move(t));
  }
  if (reference.empty() && !types.empty()) reference = types.front().name;
  return Catalog(std::move(types), std::move(reference));
}

Catalog load_catalog_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open catalog file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_catalog(buf.str());
}

std::string serialize_catalog(const Catalog& catalog) {
  ordered_json doc;
  doc["version"] = 1;
  doc["reference_type"] = catalog.reference_type();
  doc["types"] = ordered_json::array();
  for (const auto& t : catalog.types()) {
    ordered_json item;
    item["name"] = t.name;
    item["hourly_cost"] = t.hourly_cost;
    item["speed_factor"] = t.speed_factor;
    doc["types"].push_back(item);
  }
  return doc.dump(2) + "\n";
}

double billed_hours(double t_est_seconds, Billing billing) {
  const double hours = t_est_seconds / 3600.0;
  return billing == Billing::linear ? hours : std::ceil(hours);
}

double usage_cost(const ClusterComposition& composition, const Catalog& catalog, double t_est_seconds, Billing billing) {
  const double hours = billed_hours(t_est_seconds, billing);
  double rate = 0;
  for (const auto& [name, count] : composition.counts) {
    if (count < 0) throw Error(ErrorCode::InvalidInput, "negative node count for '" + name + "'");
    rate += catalog.at(name).hourly_cost * static_cast<double>(count);
  }
  return rate * hours;
}

}  // namespace phaseplan
