// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include "core/ade_model.hpp"

#include <cmath>

namespace sourcetrace {

namespace {

constexpr double kFourPi = 12.566370614359172953850573533118;

double elapsed_or_throw(double sample_time, double release_time) {
  const double dt = sample_time - release_time;
  if (!(dt >= kElapsedTimeGuardMin)) {
    throw ElapsedTimeError("elapsed time " + std::to_string(dt) +
                           " min is below the evaluation guard");
  }
  return dt;
}

}  // namespace

double ade_concentration(const SourceEstimate& x, double sensor_location, double sample_time,
                         const RiverParams& p) {
  const double dt = elapsed_or_throw(sample_time, x.release_time);
  const double u = sensor_location - x.location - p.velocity * dt;
  const double four_d_dt = 4.0 * p.dispersion * dt;
  const double expo = -(u * u) / four_d_dt - p.decay * dt;
  return x.mass / (p.cross_section_area * std::sqrt(kFourPi * p.dispersion * dt)) *
         std::exp(expo);
}

double residual(const SourceEstimate& x, const Observation& o, const RiverParams& p) {
  return ade_concentration(x, o.sensor_location, o.sample_time, p) - o.concentration;
}

double loss(const SourceEstimate& x, const Observation& o, const RiverParams& p) {
  const double r = residual(x, o, p);
  return r * r;
}

Vec3 ade_gradient(const SourceEstimate& x, double sensor_location, double sample_time,
                  const RiverParams& p) {
  const double dt = elapsed_or_throw(sample_time, x.release_time);
  const double u = sensor_location - x.location - p.velocity * dt;
  const double four_d_dt = 4.0 * p.dispersion * dt;
  const double expo = -(u * u) / four_d_dt - p.decay * dt;
  const double unit_mass = std::exp(expo) / (p.cross_section_area *
                                             std::sqrt(kFourPi * p.dispersion * dt));
  const double c = x.mass * unit_mass;

  // d/dl of the exponent is u/(2 D dt); d/dt collects the prefactor, the
  // moving-peak and the decay contributions.
  const double dl = c * u / (2.0 * p.dispersion * dt);
  const double dist = sensor_location - x.location;
  const double dtq = c * (0.5 / dt - dist * dist / (four_d_dt * dt) +
                          p.velocity * p.velocity / (4.0 * p.dispersion) + p.decay);
  return {unit_mass, dl, dtq};
}

Vec3 loss_gradient(const SourceEstimate& x, const Observation& o, const RiverParams& p) {
  const Vec3 g = ade_gradient(x, o.sensor_location, o.sample_time, p);
  const double r = x.mass * g[0] - o.concentration;  // model value reuses d/ds = C/s
  return 2.0 * r * g;
}

Mat3 central_difference_hessian(const std::function<Vec3(const Vec3&)>& grad, const Vec3& x) {
  Mat3 m = mat3_zero();
  for (int i = 0; i < 3; ++i) {
    const double h = 1e-4 * (1.0 + std::abs(x[i]));
    Vec3 fwd = x;
    Vec3 bwd = x;
    fwd[i] += h;
    bwd[i] -= h;
    const Vec3 gf = grad(fwd);
    const Vec3 gb = grad(bwd);
    for (int j = 0; j < 3; ++j) m[i][j] = (gf[j] - gb[j]) / (2.0 * h);
  }
  return m;
}

Mat3 loss_hessian(const SourceEstimate& x, const Observation& o, const RiverParams& p) {
  // the differencing points on the release-time axis must respect the guard
  const double h_t = 1e-4 * (1.0 + std::abs(x.release_time));
  if (o.sample_time - (x.release_time + h_t) < kElapsedTimeGuardMin) {
    throw ElapsedTimeError("release time too close to the sample time for Hessian differencing");
  }
  const Mat3 raw = central_difference_hessian(
      [&](const Vec3& y) { return loss_gradient(SourceEstimate::from_vec(y), o, p); }, x.vec());
  return symmetrize(raw);
}

}  // namespace sourcetrace
