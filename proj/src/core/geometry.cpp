// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include "core/geometry.hpp"

#include <algorithm>

namespace sourcetrace {

Vec3 project(const FeasibleBox& box, const Vec3& x) {
  Vec3 r;
  for (int i = 0; i < 3; ++i) r[i] = std::clamp(x[i], box.lo[i], box.hi[i]);
  return r;
}

Vec3 projected_gradient(const Vec3& grad, const Vec3& x, const StepVector& eta,
                        const FeasibleBox& box) {
  const Vec3 stepped = project(box, x - hadamard(eta.eta, grad));
  return ediv(x - stepped, eta.eta);
}

}  // namespace sourcetrace
