// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "core/types.hpp"

namespace sourcetrace {

// Closed-form advection-dispersion forward model for an instantaneous release,
// the squared-residual loss against one observation, and its analytic first
// derivatives. Second derivatives come from central differences of the
// analytic gradient.

/// Evaluations closer to the observation time than this are rejected: the
/// prefactor and exponent are singular at zero elapsed time.
inline constexpr double kElapsedTimeGuardMin = 1e-6;  // minutes

/// Predicted concentration at a sensor location/time for a candidate source.
/// Throws ElapsedTimeError when sample_time - release_time < guard.
double ade_concentration(const SourceEstimate& x, double sensor_location, double sample_time,
                         const RiverParams& p);

/// Predicted minus observed concentration. Positive means overestimated.
double residual(const SourceEstimate& x, const Observation& o, const RiverParams& p);

/// Squared residual.
double loss(const SourceEstimate& x, const Observation& o, const RiverParams& p);

/// Analytic gradient of the forward model in (mass, location, release_time).
Vec3 ade_gradient(const SourceEstimate& x, double sensor_location, double sample_time,
                  const RiverParams& p);

/// Analytic gradient of the loss: 2 * residual * grad(model).
Vec3 loss_gradient(const SourceEstimate& x, const Observation& o, const RiverParams& p);

/// Central differences of a gradient field with per-dimension steps
/// h_i = 1e-4 * (1 + |x_i|). Not symmetrized.
Mat3 central_difference_hessian(const std::function<Vec3(const Vec3&)>& grad, const Vec3& x);

/// Hessian of the loss by central differences of the analytic gradient,
/// symmetrized. The release-time axis must leave the elapsed-time guard
/// intact at t +- h_t.
Mat3 loss_hessian(const SourceEstimate& x, const Observation& o, const RiverParams& p);

}  // namespace sourcetrace
