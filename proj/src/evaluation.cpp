#include "phaseplan/evaluation.hpp"

#include <cmath>

#include "phaseplan/csv.hpp"
#include "phaseplan/error.hpp"

namespace phaseplan {

double relative_error(double t_est, double t_rec) {
  if (t_rec == 0) throw Error(ErrorCode::ZeroRecorded, "recorded time is zero");
  if (!(t_rec > 0) || !(t_est >= 0)) throw Error(ErrorCode::InvalidInput, "need t_rec > 0 and t_est >= 0");
  return (t_est - t_rec) / t_rec;
}

double mean_relative_error(const std::vector<PredictionRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no prediction records");
  double sum = 0;
  for (const auto& r : records) sum += std::abs(relative_error(r.t_est, r.t_rec));
  return sum / static_cast<double>(records.size());
}

double slo_satisfaction_rate(const std::vector<PredictionRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no prediction records");
  std::size_t met = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.slo) {
      const auto name = r.label.empty() ? "#" + std::to_string(i + 1) : "'" + r.label + "'";
      throw Error(ErrorCode::MissingSlo, "record " + name + " has no slo");
    }
    if (r.t_rec <= *r.slo) ++met;
  }
  return 100.0 * static_cast<double>(met) / static_cast<double>(records.size());
}

Sensitivity sensitivity(const ModelParams& params, std::int64_t iter, double n_mean, double n_sigma) {
  params.validate();
  if (iter < 1) throw Error(ErrorCode::InvalidInput, "sensitivity: iter must be >= 1");
  if (!(n_mean >= 1)) throw Error(ErrorCode::InvalidInput, "sensitivity: n_mean must be >= 1");
  if (!(n_sigma >= 0)) throw Error(ErrorCode::InvalidInput, "sensitivity: n_sigma must be >= 0");
  const auto terms = closed_form_terms(params, iter);
  Sensitivity s;
  const double f = completion_time_at(params, iter, n_mean);
  s.d1 = terms.linear - terms.inverse / (n_mean * n_mean);
  s.d2 = 2.0 * terms.inverse / (n_mean * n_mean * n_mean);
  const double var_n = n_sigma * n_sigma;
  s.expected = f + 0.5 * s.d2 * var_n;
  s.variance = s.d1 * s.d1 * var_n;
  return s;
}

std::pair<double, double> confidence_interval(const std::vector<double>& samples, double alpha) {
  if (samples.size() < 2) throw Error(ErrorCode::InsufficientData, "confidence interval needs at least 2 samples");
  const auto k = static_cast<double>(samples.size());
  double mean = 0;
  for (double x : samples) mean += x;
  mean /= k;
  double ss = 0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (k - 1));
  return {mean - alpha * sd, mean + alpha * sd};
}

std::vector<PredictionRecord> parse_predictions(std::string_view csv_text) {
  const auto table = csv::parse(csv_text);
  const auto c_label = table.column("label");
  const auto c_est = table.require_column("t_est");
  const auto c_rec = table.require_column("t_rec");
  const auto c_slo = table.column("slo");
  std::vector<PredictionRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.lines[r];
    PredictionRecord rec;
    if (c_label) rec.label = row[*c_label];
    rec.t_est = csv::to_double(row[c_est], line, "t_est");
    rec.t_rec = csv::to_double(row[c_rec], line, "t_rec");
    if (c_slo) rec.slo = csv::to_optional_double(row[*c_slo], line, "slo");
    if (!(rec.t_est >= 0)) throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": t_est must be >= 0");
    if (!(rec.t_rec >= 0)) throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": t_rec must be >= 0");
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace phaseplan
