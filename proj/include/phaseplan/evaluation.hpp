#pragma once

// Accuracy and confidence metrics for completion-time predictions.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phaseplan/model.hpp"

namespace phaseplan {

struct PredictionRecord {
  std::string label;
  double t_est = 0;
  double t_rec = 0;
  std::optional<double> slo;

  bool operator==(const PredictionRecord&) const = default;
};

/// Signed (t_est - t_rec) / t_rec. Throws Error{ZeroRecorded} when t_rec == 0.
double relative_error(double t_est, double t_rec);

/// Mean of |relative_error| over the records. Throws Error{EmptyInput}.
double mean_relative_error(const std::vector<PredictionRecord>& records);

/// Percentage of records with t_rec <= slo. Throws Error{EmptyInput} or
/// Error{MissingSlo} naming the first record without an slo.
double slo_satisfaction_rate(const std::vector<PredictionRecord>& records);

struct Sensitivity {
  double expected = 0;
  double variance = 0;
  /// First and second derivative of t_est in n at n_mean.
  double d1 = 0;
  double d2 = 0;
};

/// Second-order expectation and first-order (delta method) variance of t_est
/// when the node count varies with mean n_mean and deviation n_sigma.
Sensitivity sensitivity(const ModelParams& params, std::int64_t iter, double n_mean, double n_sigma);

inline constexpr double kNormalQuantile95 = 1.96;

/// mean +- alpha * sample sd (n-1 divisor). Throws Error{InsufficientData}
/// with fewer than two samples.
std::pair<double, double> confidence_interval(const std::vector<double>& samples, double alpha = kNormalQuantile95);

/// CSV with header label,t_est,t_rec,slo (slo may be empty).
std::vector<PredictionRecord> parse_predictions(std::string_view csv_text);

}  // namespace phaseplan
