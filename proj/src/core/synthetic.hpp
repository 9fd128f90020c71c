// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "core/geometry.hpp"
#include "core/types.hpp"

namespace sourcetrace {

struct NoiseModel {
  enum class Kind { none, gaussian, relative_gaussian };
  Kind kind = Kind::none;
  double stddev = 0;  // absolute, or a fraction of the noiseless value
};

struct Schedule {
  double start = 0;  // minutes
  double step = 1;
  int count = 0;

  bool valid() const { return count >= 1 && step > 0 && std::isfinite(start); }
};

struct ScenarioConfig {
  RiverParams river;
  SourceEstimate true_source;
  std::vector<double> sensor_locations;
  Schedule schedule;
  NoiseModel noise;
  std::uint64_t seed = 0;
  FeasibleBox box;

  void validate() const;
};

/// Concentrations from the forward model at every (time, sensor) pair of the
/// schedule, plus seeded noise when configured. Rows are ordered by time,
/// then sensor index; byte-determinism follows from the fixed draw order.
Stream generate_synthetic(const ScenarioConfig& sc);

}  // namespace sourcetrace
