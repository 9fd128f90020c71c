// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>

#include "core/types.hpp"

namespace sourcetrace {

/// A scalar objective over the decision vector. The optimizer family, step
/// construction, regret evaluation and certification all operate against this
/// surface, so surrogate objectives can stand in for the windowed loss in
/// tests and calibration hooks.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual double value(const Vec3& x) const = 0;
  virtual Vec3 gradient(const Vec3& x) const = 0;
  virtual Mat3 hessian(const Vec3& x) const = 0;
};

/// value() with domain violations (elapsed-time guard) mapped to +inf, for
/// line-search trial points that may step outside the evaluable region.
inline double value_or_inf(const Objective& f, const Vec3& x) {
  try {
    return f.value(x);
  } catch (const ElapsedTimeError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace sourcetrace
