// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "core/types.hpp"

namespace sourcetrace {

/// Axis-aligned feasible box S x L x T for the decision vector.
struct FeasibleBox {
  Vec3 lo{0, 0, 0};
  Vec3 hi{0, 0, 0};

  bool valid() const {
    for (int i = 0; i < 3; ++i) {
      if (!(lo[i] <= hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i])) return false;
    }
    return true;
  }
  bool contains(const Vec3& x, double tol = 0.0) const {
    for (int i = 0; i < 3; ++i) {
      if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    }
    return true;
  }
  Vec3 center() const { return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])}; }
  Vec3 widths() const { return hi - lo; }
};

/// Positive per-dimension step sizes.
struct StepVector {
  Vec3 eta{0, 0, 0};

  bool valid() const { return eta[0] > 0 && eta[1] > 0 && eta[2] > 0 && all_finite(eta); }
  bool componentwise_leq(const StepVector& other) const {
    return eta[0] <= other.eta[0] && eta[1] <= other.eta[1] && eta[2] <= other.eta[2];
  }
};

/// Euclidean projection onto the box (componentwise clamp).
Vec3 project(const FeasibleBox& box, const Vec3& x);

/// Vector-step projected gradient:
///   (x - project(x - eta (*) grad)) (/) eta
/// with (*) the Hadamard product and (/) elementwise division. Equals grad
/// whenever the stepped point stays inside the box.
Vec3 projected_gradient(const Vec3& grad, const Vec3& x, const StepVector& eta,
                        const FeasibleBox& box);

}  // namespace sourcetrace
