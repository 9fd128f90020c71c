// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "core/geometry.hpp"
#include "core/rng.hpp"

using namespace sourcetrace;

namespace {

FeasibleBox unit_box() { return {{0, 0, 0}, {1, 1, 1}}; }

Vec3 random_in(const FeasibleBox& b, Rng& rng) {
  return {rng.uniform(b.lo[0], b.hi[0]), rng.uniform(b.lo[1], b.hi[1]),
          rng.uniform(b.lo[2], b.hi[2])};
}

}  // namespace

TEST_CASE("project clamps componentwise and is idempotent") {
  const FeasibleBox box = unit_box();
  const Vec3 interior{0.25, 0.5, 0.75};
  CHECK(project(box, interior) == interior);

  const Vec3 outside{2.0, -1.0, 0.5};
  CHECK(project(box, outside) == Vec3{1.0, 0.0, 0.5});

  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Vec3 once = project(box, x);
    CHECK(project(box, once) == once);
    CHECK(box.contains(once));
  }
}

TEST_CASE("projected gradient equals the raw gradient when the step stays inside") {
  // dyadic values keep the arithmetic exact
  const FeasibleBox box = unit_box();
  const Vec3 x{0.5, 0.25, 0.5};
  const Vec3 g{0.25, -0.5, 0.125};
  const StepVector eta{{0.5, 0.25, 0.25}};
  CHECK(projected_gradient(g, x, eta, box) == g);
}

TEST_CASE("a binding bound annihilates outward motion") {
  const FeasibleBox box = unit_box();
  const Vec3 x{1.0, 0.5, 0.5};      // on the upper mass bound
  const Vec3 g{-2.0, 0.0, 0.0};     // pushes further out
  const StepVector eta{{0.5, 0.5, 0.5}};
  const Vec3 pg = projected_gradient(g, x, eta, box);
  CHECK(pg[0] == 0.0);
  CHECK(pg[1] == 0.0);
  CHECK(pg[2] == 0.0);
}

TEST_CASE("projection inequality <grad, eta^2 pg> >= ||eta pg||^2 on random instances") {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    FeasibleBox box;
    for (int d = 0; d < 3; ++d) {
      const double a = rng.uniform(-2, 2);
      const double b = rng.uniform(-2, 2);
      box.lo[d] = std::min(a, b);
      box.hi[d] = std::max(a, b);
    }
    const Vec3 x = random_in(box, rng);
    const Vec3 g{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    const StepVector eta{{rng.uniform(0.01, 2), rng.uniform(0.01, 2), rng.uniform(0.01, 2)}};
    const Vec3 pg = projected_gradient(g, x, eta, box);
    const Vec3 eta2_pg = hadamard(hadamard(eta.eta, eta.eta), pg);
    const Vec3 eta_pg = hadamard(eta.eta, pg);
    const double lhs = dot(g, eta2_pg);
    const double rhs = dot(eta_pg, eta_pg);
    CHECK(lhs >= rhs - 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("projected gradient of a sum obeys the triangle robustness bound") {
  Rng rng(43);
  for (int i = 0; i < 1000; ++i) {
    const FeasibleBox box = unit_box();
    const Vec3 x = random_in(box, rng);
    const Vec3 g1{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    const Vec3 g2{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    const StepVector eta{{rng.uniform(0.01, 1), rng.uniform(0.01, 1), rng.uniform(0.01, 1)}};
    const double sum_norm = norm2(projected_gradient(g1 + g2, x, eta, box));
    const double part = norm2(projected_gradient(g1, x, eta, box)) + norm2(g2);
    CHECK(sum_norm <= part + 1e-12);
  }
}

TEST_CASE("componentwise-smaller steps never shrink the projected-gradient norm") {
  Rng rng(44);
  for (int i = 0; i < 1000; ++i) {
    const FeasibleBox box = unit_box();
    const Vec3 x = random_in(box, rng);
    const Vec3 g{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    const StepVector eta0{{rng.uniform(0.05, 2), rng.uniform(0.05, 2), rng.uniform(0.05, 2)}};
    StepVector smaller = eta0;
    for (int d = 0; d < 3; ++d) smaller.eta[d] *= rng.uniform(0.05, 1.0);
    const double big = norm2(projected_gradient(g, x, eta0, box));
    const double small = norm2(projected_gradient(g, x, smaller, box));
    CHECK(big <= small + 1e-12 * std::max(1.0, small));
  }
}
