// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "core/types.hpp"

namespace sourcetrace {

/// Two-sided upper t-value for 1-alpha confidence at the given degrees of
/// freedom (the 1 - alpha/2 quantile of Student's t).
double t_quantile(double alpha, int dof);

struct Interval {
  double lo = 0;
  double hi = 0;
  double half_width() const { return 0.5 * (hi - lo); }
  double center() const { return 0.5 * (hi + lo); }
};

/// mean +- t_{alpha/2,|M|-1} * S / sqrt(|M|), S the sample standard deviation.
/// Throws TooFewSamplesError below two samples.
Interval confidence_interval(std::span<const double> samples, double alpha);

struct SensorPlanConfig {
  double alpha = 0.05;
  Vec3 widths{0, 0, 0};   // acceptable confidence-interval lengths d^s, d^l, d^t
  int round_length = 10;  // T
  int initial_sensors = 2;  // A
  int max_sensors = 0;    // available pool

  bool valid() const {
    return alpha > 0 && alpha < 1 && widths[0] > 0 && widths[1] > 0 && widths[2] > 0 &&
           round_length >= 1 && initial_sensors >= 2 && max_sensors >= initial_sensors;
  }
};

struct RoundRecord {
  std::vector<int> record_mass;      // R^s_{i,n}, n = 2..|M_{i-1}|
  std::vector<int> record_location;  // R^l_{i,n}
  std::vector<int> record_time;      // R^t_{i,n}
  int required = 0;                  // |M_i| after clamping
  int required_raw = 0;              // before clamping to the pool
  bool pool_exhausted = false;
};

struct PlanSchedule {
  std::vector<RoundRecord> rounds;
  std::vector<int> counts;  // |M_i| per round
  bool converged = false;   // counts constant over the last three rounds
};

/// Per-round identification callback: sensor index into the stream list plus
/// that sensor's observations for the round. Measurement noise, when
/// simulated, is the runner's business.
using IdentifyRunner =
    std::function<SourceEstimate(int round, int sensor, std::span<const Observation> round_data)>;

/// Sequential sensor-installation design. Streams must share a schedule
/// (equal length per sensor); each round uses only its own slice of data and
/// identification restarts cold. The per-dimension inner loop bisects between
/// the current subset size and the t-interval sample-size target; records are
/// aggregated as max over dimensions of min over subset sizes, clamped to
/// [2, max_sensors].
PlanSchedule plan_sensors(const std::vector<Stream>& sensor_streams, const SensorPlanConfig& cfg,
                          const IdentifyRunner& runner);

}  // namespace sourcetrace
