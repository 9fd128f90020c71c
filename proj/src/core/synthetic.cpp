// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include "core/synthetic.hpp"

#include "core/ade_model.hpp"
#include "core/rng.hpp"

namespace sourcetrace {

void ScenarioConfig::validate() const {
  if (!river.valid()) throw ConfigError("invalid river parameters");
  if (!true_source.finite()) throw ConfigError("true source must be finite");
  if (sensor_locations.empty()) throw ConfigError("at least one sensor location is required");
  if (!schedule.valid()) throw ConfigError("invalid sampling schedule");
  if (!box.valid()) throw ConfigError("invalid feasible box");
  // every schedule time must fall after the release (Assumption-style guard)
  if (schedule.start - true_source.release_time < kElapsedTimeGuardMin) {
    throw ConfigError("sampling schedule starts before the true release time");
  }
  if (box.hi[2] > schedule.start - kElapsedTimeGuardMin) {
    throw ConfigError("feasible release-time upper bound must precede the first sample time");
  }
  if (noise.kind != NoiseModel::Kind::none && !(noise.stddev >= 0)) {
    throw ConfigError("noise standard deviation must be nonnegative");
  }
}

Stream generate_synthetic(const ScenarioConfig& sc) {
  sc.validate();
  Rng rng(sc.seed);
  Stream out;
  out.reserve(static_cast<std::size_t>(sc.schedule.count) * sc.sensor_locations.size());
  for (int i = 0; i < sc.schedule.count; ++i) {
    const double t = sc.schedule.start + sc.schedule.step * i;
    for (std::size_t m = 0; m < sc.sensor_locations.size(); ++m) {
      Observation o;
      o.sensor_id = static_cast<int>(m);
      o.sensor_location = sc.sensor_locations[m];
      o.sample_time = t;
      const double clean = ade_concentration(sc.true_source, o.sensor_location, t, sc.river);
      switch (sc.noise.kind) {
        case NoiseModel::Kind::none:
          o.concentration = clean;
          break;
        case NoiseModel::Kind::gaussian:
          o.concentration = clean + sc.noise.stddev * rng.gaussian();
          break;
        case NoiseModel::Kind::relative_gaussian:
          o.concentration = clean * (1.0 + sc.noise.stddev * rng.gaussian());
          break;
      }
      out.push_back(o);
    }
  }
  return out;
}

}  // namespace sourcetrace
