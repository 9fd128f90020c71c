// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include "core/smoothing.hpp"

namespace sourcetrace {

LossHistory::LossHistory(RiverParams params, int window) : params_(params), window_(window) {
  if (window_ < 1) throw ConfigError("window size must be >= 1");
  if (!params_.valid()) throw ConfigError("invalid river parameters");
}

void LossHistory::append(const Observation& o) {
  window_terms_.push_back(o);
  if (static_cast<int>(window_terms_.size()) > window_) window_terms_.pop_front();
  seen_.push_back(o);
  ++index_;
}

double LossHistory::window_eval(const SourceEstimate& x) const {
  double sum = 0;
  for (const Observation& o : window_terms_) sum += loss(x, o, params_);
  return sum / static_cast<double>(window_);
}

Vec3 LossHistory::window_gradient(const SourceEstimate& x) const {
  Vec3 sum{0, 0, 0};
  for (const Observation& o : window_terms_) {
    sum = sum + loss_gradient(x, o, params_);
    gradient_calls_.fetch_add(1, std::memory_order_relaxed);
  }
  return (1.0 / static_cast<double>(window_)) * sum;
}

Mat3 LossHistory::window_hessian(const SourceEstimate& x) const {
  Mat3 sum = mat3_zero();
  for (const Observation& o : window_terms_) sum = sum + loss_hessian(x, o, params_);
  return (1.0 / static_cast<double>(window_)) * sum;
}

double LossHistory::selection_score(const SourceEstimate& x, bool mean_of_squares) const {
  if (seen_.empty()) return 0.0;
  if (mean_of_squares) {
    double sum = 0;
    for (const Observation& o : seen_) {
      const double r = residual(x, o, params_);
      sum += r * r;
    }
    return sum / static_cast<double>(seen_.size());
  }
  // Per-sensor mean residual, squared, then averaged across sensors.
  std::map<int, std::pair<double, std::size_t>> by_sensor;
  for (const Observation& o : seen_) {
    auto& [sum, count] = by_sensor[o.sensor_id];
    sum += residual(x, o, params_);
    ++count;
  }
  double score = 0;
  for (const auto& [id, acc] : by_sensor) {
    const double mean = acc.first / static_cast<double>(acc.second);
    score += mean * mean;
  }
  return score / static_cast<double>(by_sensor.size());
}

}  // namespace sourcetrace
