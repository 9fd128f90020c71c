// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include "core/sensor_planning.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/distributions/students_t.hpp>

namespace sourcetrace {

double t_quantile(double alpha, int dof) {
  if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must be in (0, 1)");
  if (dof < 1) throw ConfigError("degrees of freedom must be >= 1");
  const boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 1.0 - alpha / 2.0);
}

namespace {

struct MeanStd {
  double mean = 0;
  double sd = 0;
};

MeanStd mean_std(std::span<const double> xs) {
  MeanStd r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return r;
}

}  // namespace

Interval confidence_interval(std::span<const double> samples, double alpha) {
  if (samples.size() < 2) {
    throw TooFewSamplesError("confidence interval needs at least two samples, got " +
                             std::to_string(samples.size()));
  }
  const MeanStd ms = mean_std(samples);
  const double t = t_quantile(alpha, static_cast<int>(samples.size()) - 1);
  const double half = t * ms.sd / std::sqrt(static_cast<double>(samples.size()));
  return {ms.mean - half, ms.mean + half};
}

namespace {

/// One dimension's bisection for one starting subset size n. `results` holds
/// that round's per-sensor identification values on this dimension, indexed
/// by sensor. Returns the recorded R value (may exceed the installed count
/// when the loop breaks out to install more, or fall below 2 when noise
/// vanishes; the caller clamps the aggregate).
int bisect_dimension(const std::vector<double>& results, int start_size, int installed,
                     double alpha, double width) {
  int size = start_size;
  long long target = size + 1;  // arbitrary, != size
  int tilde = size;
  std::set<int> visited;
  // Integer bisection reaches a fixed point or 2-cycle within the pool size;
  // the iteration bound is a backstop.
  for (int guard = 0; guard < installed + 8; ++guard) {
    if (target == size) break;
    const std::span<const double> used(results.data(), static_cast<std::size_t>(size));
    const MeanStd ms = mean_std(used);
    const double t = t_quantile(alpha, size - 1);
    const double raw = (t * ms.sd) / width;
    target = static_cast<long long>(std::ceil(raw * raw));
    tilde = static_cast<int>((size + target + 1) / 2);  // ceil of the midpoint
    if (installed < tilde) break;                       // jump out; install up to tilde
    if (visited.count(tilde)) {
      tilde = std::min(tilde, size);  // 2-cycle: exit with the smaller of the pair
      break;
    }
    visited.insert(size);
    size = std::max(2, tilde);
  }
  return tilde;
}

}  // namespace

PlanSchedule plan_sensors(const std::vector<Stream>& sensor_streams, const SensorPlanConfig& cfg,
                          const IdentifyRunner& runner) {
  if (!cfg.valid()) throw ConfigError("invalid sensor-plan config");
  if (static_cast<int>(sensor_streams.size()) < cfg.initial_sensors) {
    throw ConfigError("need at least as many sensor streams as initial sensors");
  }
  if (static_cast<int>(sensor_streams.size()) < cfg.max_sensors) {
    throw ConfigError("sensor pool larger than the provided streams");
  }
  std::size_t n_iterations = sensor_streams.front().size();
  for (const Stream& s : sensor_streams) n_iterations = std::min(n_iterations, s.size());
  if (n_iterations == 0) throw ConfigError("sensor streams are empty");

  const int t_len = cfg.round_length;
  const std::size_t full_rounds = n_iterations / static_cast<std::size_t>(t_len);
  const std::size_t remainder = n_iterations % static_cast<std::size_t>(t_len);
  const std::size_t n_rounds = full_rounds + (remainder ? 1 : 0);

  PlanSchedule plan;
  int installed = std::min(cfg.initial_sensors, cfg.max_sensors);

  for (std::size_t round = 0; round < n_rounds; ++round) {
    const std::size_t begin = round * static_cast<std::size_t>(t_len);
    const std::size_t end = std::min(begin + static_cast<std::size_t>(t_len), n_iterations);

    // Cold-start identification on this round's slice, one result per
    // installed sensor.
    std::vector<Vec3> results(static_cast<std::size_t>(installed));
    for (int m = 0; m < installed; ++m) {
      const Stream& s = sensor_streams[static_cast<std::size_t>(m)];
      const std::span<const Observation> slice(s.data() + begin, end - begin);
      results[static_cast<std::size_t>(m)] =
          runner(static_cast<int>(round), m, slice).vec();
    }

    RoundRecord rec;
    Vec3 dim_min{0, 0, 0};
    for (int dim = 0; dim < 3; ++dim) {
      std::vector<double> values(results.size());
      for (std::size_t m = 0; m < results.size(); ++m) values[m] = results[m][dim];
      std::vector<int>& record = dim == 0   ? rec.record_mass
                                 : dim == 1 ? rec.record_location
                                            : rec.record_time;
      int best = 0;
      for (int n = 2; n <= installed; ++n) {
        const int r = bisect_dimension(values, n, installed, cfg.alpha, cfg.widths[dim]);
        record.push_back(r);
        best = record.size() == 1 ? r : std::min(best, r);
      }
      dim_min[dim] = best;
    }

    const int raw = static_cast<int>(std::max({dim_min[0], dim_min[1], dim_min[2]}));
    rec.required_raw = raw;
    int clamped = std::clamp(raw, 2, cfg.max_sensors);
    rec.pool_exhausted = raw > cfg.max_sensors;
    rec.required = clamped;
    plan.rounds.push_back(std::move(rec));
    plan.counts.push_back(clamped);
    installed = clamped;
  }

  if (plan.counts.size() >= 3) {
    const std::size_t n = plan.counts.size();
    plan.converged =
        plan.counts[n - 1] == plan.counts[n - 2] && plan.counts[n - 2] == plan.counts[n - 3];
  }
  return plan;
}

}  // namespace sourcetrace
