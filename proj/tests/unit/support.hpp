// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles and surrogate objectives. These stay independent of the
// implementation paths they check: finite differences against analytic
// gradients, characteristic-polynomial roots against the closed-form
// eigenvalue solve, and hand-rolled descent against the optimizer epochs.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "core/objective.hpp"
#include "core/types.hpp"

namespace sourcetrace::testing {

/// Central finite differences of a scalar function, step tuned per dimension.
inline Vec3 fd_gradient(const std::function<double(const Vec3&)>& f, const Vec3& x,
                        double rel_step = 1e-6) {
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    const double h = rel_step * (1.0 + std::abs(x[i]));
    Vec3 a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

/// Directional second difference (f(x+hd) - 2f(x) + f(x-hd)) / h^2.
inline double fd_second_directional(const std::function<double(const Vec3&)>& f, const Vec3& x,
                                    const Vec3& dir, double h) {
  const Vec3 a = x + h * dir;
  const Vec3 b = x - h * dir;
  return (f(a) - 2.0 * f(x) + f(b)) / (h * h);
}

/// All real roots of det(A - lambda I) = 0 for symmetric 3x3 A, found by
/// Newton iteration with deflation on the characteristic cubic. Returns the
/// roots sorted ascending.
inline std::vector<double> charpoly_eigenvalues(const Mat3& a) {
  // characteristic polynomial lambda^3 - c2 lambda^2 + c1 lambda - c0
  const double c2 = a[0][0] + a[1][1] + a[2][2];
  const double c1 = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] -
                    a[0][2] * a[2][0] + a[1][1] * a[2][2] - a[1][2] * a[2][1];
  const double c0 = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                    a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                    a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  auto p = [&](double x) { return ((x - c2) * x + c1) * x - c0; };
  auto dp = [&](double x) { return (3.0 * x - 2.0 * c2) * x + c1; };

  // scale-aware bracketing: eigenvalues lie within the Gershgorin bound
  double bound = 0;
  for (int i = 0; i < 3; ++i) {
    double row = 0;
    for (int j = 0; j < 3; ++j) row += std::abs(a[i][j]);
    bound = std::max(bound, row);
  }
  bound = std::max(bound, 1e-300);

  // first root by bisection on [-bound, bound]
  auto bisect = [&](double lo, double hi, const std::function<double(double)>& fn) {
    double flo = fn(lo);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = fn(mid);
      if ((flo <= 0 && fm <= 0) || (flo >= 0 && fm >= 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  (void)dp;
  const double r1 = bisect(-bound, bound, p);
  // deflate: lambda^2 + b lambda + c
  const double b = r1 - c2;
  const double c = r1 * b + c1;
  const double disc = std::max(0.0, b * b - 4.0 * c);
  const double s = std::sqrt(disc);
  std::vector<double> roots{r1, (-b - s) / 2.0, (-b + s) / 2.0};
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// Quadratic bowl 0.5 (x-c)' Q (x-c) with diagonal Q.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Vec3 center, Vec3 diag) : c_(center), q_(diag) {}
  double value(const Vec3& x) const override {
    double v = 0;
    for (int i = 0; i < 3; ++i) v += 0.5 * q_[i] * (x[i] - c_[i]) * (x[i] - c_[i]);
    return v;
  }
  Vec3 gradient(const Vec3& x) const override {
    return {q_[0] * (x[0] - c_[0]), q_[1] * (x[1] - c_[1]), q_[2] * (x[2] - c_[2])};
  }
  Mat3 hessian(const Vec3&) const override {
    return {{{q_[0], 0, 0}, {0, q_[1], 0}, {0, 0, q_[2]}}};
  }

 private:
  Vec3 c_, q_;
};

/// Planted strict saddle at the origin: x0^2 - x1^2 + x2^2 + a*(x0^4+x1^4+x2^4).
class SaddleObjective final : public Objective {
 public:
  explicit SaddleObjective(double quartic = 0.1) : a_(quartic) {}
  double value(const Vec3& x) const override {
    return x[0] * x[0] - x[1] * x[1] + x[2] * x[2] +
           a_ * (std::pow(x[0], 4) + std::pow(x[1], 4) + std::pow(x[2], 4));
  }
  Vec3 gradient(const Vec3& x) const override {
    return {2 * x[0] + 4 * a_ * std::pow(x[0], 3), -2 * x[1] + 4 * a_ * std::pow(x[1], 3),
            2 * x[2] + 4 * a_ * std::pow(x[2], 3)};
  }
  Mat3 hessian(const Vec3& x) const override {
    return {{{2 + 12 * a_ * x[0] * x[0], 0, 0},
             {0, -2 + 12 * a_ * x[1] * x[1], 0},
             {0, 0, 2 + 12 * a_ * x[2] * x[2]}}};
  }

 private:
  double a_;
};

/// Linear objective g'x (flat curvature, exact unit slopes for grid tests).
class LinearObjective final : public Objective {
 public:
  explicit LinearObjective(Vec3 g) : g_(g) {}
  double value(const Vec3& x) const override { return dot(g_, x); }
  Vec3 gradient(const Vec3&) const override { return g_; }
  Mat3 hessian(const Vec3&) const override { return mat3_zero(); }

 private:
  Vec3 g_;
};

/// Wraps lambdas as an Objective.
class FunctionObjective final : public Objective {
 public:
  FunctionObjective(std::function<double(const Vec3&)> v, std::function<Vec3(const Vec3&)> g,
                    std::function<Mat3(const Vec3&)> h = nullptr)
      : v_(std::move(v)), g_(std::move(g)), h_(std::move(h)) {}
  double value(const Vec3& x) const override { return v_(x); }
  Vec3 gradient(const Vec3& x) const override { return g_(x); }
  Mat3 hessian(const Vec3& x) const override {
    if (h_) return h_(x);
    return mat3_zero();
  }

 private:
  std::function<double(const Vec3&)> v_;
  std::function<Vec3(const Vec3&)> g_;
  std::function<Mat3(const Vec3&)> h_;
};

}  // namespace sourcetrace::testing
