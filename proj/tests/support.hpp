#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "phaseplan/model.hpp"
#include "phaseplan/profiles.hpp"

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(PHASEPLAN_DATA_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// The bundled MLlib profile on m1.large.
inline phaseplan::JobProfile mllib_profile() {
  phaseplan::JobProfile p;
  p.category = phaseplan::Category::mllib;
  p.instance_type = "m1.large";
  p.t_init = 20;
  p.t_prep = 13;
  p.t_vs_baseline = 15;
  p.coeff = 0.004;
  p.t_commn_baseline = 11;
  p.cf_commn = 0.07;
  p.s_baseline_bytes = 265000000;
  p.n_unit_baseline = 8;
  p.rdd_op_means = {{"count", 0.124}, {"distinct", 0.3}, {"first", 0.005},
                    {"flatmap", 0.072}, {"map", 0.098}, {"mean", 0.1}};
  p.representative_job = "MovieLensALS";
  p.iterative = true;
  return p;
}

inline bool close_rel(double a, double b, double rel) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= rel * scale;
}

}  // namespace testing
