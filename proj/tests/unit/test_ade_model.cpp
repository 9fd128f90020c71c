// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "core/ade_model.hpp"
#include "core/geometry.hpp"
#include "core/rng.hpp"
#include "core/step_control.hpp"
#include "support.hpp"

using namespace sourcetrace;

namespace {

const RiverParams kTruckee{60.0, 2430.0, 80.0, 1e-8};
const SourceEstimate kTruth{1300.0, -22106.0, -215.0};
const FeasibleBox kBox{{1.0, -40000.0, -500.0}, {3000.0, -1000.0, 0.0}};

Vec3 random_interior(Rng& rng) {
  Vec3 x;
  for (int i = 0; i < 3; ++i) {
    const double w = kBox.hi[i] - kBox.lo[i];
    x[i] = rng.uniform(kBox.lo[i] + 0.05 * w, kBox.hi[i] - 0.05 * w);
  }
  return x;
}

Observation truckee_obs(double loc, double t, double c) { return {0, loc, t, c}; }

}  // namespace

TEST_CASE("ade_concentration matches closed-form special cases") {
  // unit prefactor: sqrt(4 pi D dt) = 1 and zero mismatch in the exponent
  const RiverParams p{1.0, 1.0 / (4.0 * 3.14159265358979323846), 80.0, 0.0};
  const SourceEstimate x{2.0, 0.0, 0.0};
  CHECK(ade_concentration(x, 80.0, 1.0, p) == doctest::Approx(2.0).epsilon(1e-12));

  RiverParams decayed = p;
  decayed.decay = std::log(2.0);
  CHECK(ade_concentration(x, 80.0, 1.0, decayed) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ade_concentration reproduces the Truckee reference point") {
  const double c = ade_concentration(kTruth, 0.0, 100.0, kTruckee);
  CHECK(c == doctest::Approx(3.064706648630677e-4).epsilon(1e-12));
}

TEST_CASE("ade_concentration rejects evaluations at or before the release") {
  const SourceEstimate x{1.0, 0.0, 10.0};
  CHECK_THROWS_AS(ade_concentration(x, 0.0, 10.0, kTruckee), ElapsedTimeError);
  CHECK_THROWS_AS(ade_concentration(x, 0.0, 9.0, kTruckee), ElapsedTimeError);
  CHECK_THROWS_AS(ade_concentration(x, 0.0, 10.0 + 0.5e-6, kTruckee), ElapsedTimeError);
  CHECK_NOTHROW(ade_concentration(x, 0.0, 10.0 + 2e-6, kTruckee));
}

TEST_CASE("residual is zero on model-consistent data and signed as documented") {
  const double c = ade_concentration(kTruth, 0.0, 100.0, kTruckee);
  CHECK(residual(kTruth, truckee_obs(0.0, 100.0, c), kTruckee) == doctest::Approx(0.0));

  // zero-mass source predicts zero
  const SourceEstimate zero{0.0, -5000.0, -100.0};
  CHECK(residual(zero, truckee_obs(0.0, 100.0, 0.0), kTruckee) == 0.0);

  // frozen oracle value
  const double r = residual(kTruth, truckee_obs(0.0, 100.0, 5e-4), kTruckee);
  CHECK(r == doctest::Approx(-1.9352933513693232e-4).epsilon(1e-12));
}

TEST_CASE("loss is the squared residual") {
  CHECK(loss(kTruth, truckee_obs(0.0, 100.0, ade_concentration(kTruth, 0.0, 100.0, kTruckee)),
             kTruckee) == doctest::Approx(0.0));
  const double l = loss(kTruth, truckee_obs(0.0, 100.0, 5e-4), kTruckee);
  CHECK(l == doctest::Approx(3.745360355854307e-8).epsilon(1e-12));
  CHECK(l >= 0.0);

  // even in the residual: observations symmetric around the prediction
  const double c = ade_concentration(kTruth, 0.0, 100.0, kTruckee);
  const double r = 7.5e-5;
  CHECK(loss(kTruth, truckee_obs(0.0, 100.0, c - r), kTruckee) ==
        doctest::Approx(loss(kTruth, truckee_obs(0.0, 100.0, c + r), kTruckee)).epsilon(1e-12));
}

TEST_CASE("loss_gradient vanishes with the residual and carries the mass sign") {
  const double c = ade_concentration(kTruth, 0.0, 100.0, kTruckee);
  const Vec3 g = loss_gradient(kTruth, truckee_obs(0.0, 100.0, c), kTruckee);
  CHECK(norm2(g) == doctest::Approx(0.0));

  // at s = 0 with observed c > 0 the model underestimates; more mass helps
  const SourceEstimate s0{0.0, -22106.0, -215.0};
  const Vec3 g0 = loss_gradient(s0, truckee_obs(0.0, 100.0, 5e-4), kTruckee);
  CHECK(g0[0] < 0.0);
}

TEST_CASE("loss_gradient matches central finite differences at random interior points") {
  Rng rng(20260810);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 x = random_interior(rng);
    const Observation o = truckee_obs(0.0, 100.0, 5e-4);
    const SourceEstimate e = SourceEstimate::from_vec(x);
    const Vec3 analytic = loss_gradient(e, o, kTruckee);
    const Vec3 fd = testing::fd_gradient(
        [&](const Vec3& y) { return loss(SourceEstimate::from_vec(y), o, kTruckee); }, x);
    // deep in the plume tail both gradients underflow past what central
    // differences can resolve; the floor keeps the comparison meaningful
    const double err = norm2(analytic - fd) / std::max(1e-12, norm2(fd));
    worst = std::max(worst, err);
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("central-difference Hessian is exact for a quadratic surrogate") {
  // residual replaced by a linear map: loss (2x0 - x1 + 3)^2 has constant
  // Hessian 2 J'J
  auto grad = [](const Vec3& x) -> Vec3 {
    const double r = 2.0 * x[0] - x[1] + 3.0;
    return {2.0 * r * 2.0, 2.0 * r * -1.0, 0.0};
  };
  const Mat3 h = central_difference_hessian(grad, Vec3{0.3, -0.7, 0.1});
  CHECK(h[0][0] == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(h[0][1] == doctest::Approx(-4.0).epsilon(1e-9));
  CHECK(h[1][1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(h[2][2] == doctest::Approx(0.0));
  CHECK(h[0][2] == doctest::Approx(0.0));
}

TEST_CASE("loss_hessian agrees with directional second differences") {
  Rng rng(7);
  const Observation o = truckee_obs(0.0, 100.0, 5e-4);
  double worst = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const Vec3 x = random_interior(rng);
    const Mat3 h = loss_hessian(SourceEstimate::from_vec(x), o, kTruckee);
    Vec3 d{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    // direction scaled per-axis so the probe respects the box anisotropy
    for (int i = 0; i < 3; ++i) d[i] *= 1.0 + std::abs(x[i]);
    d = (1.0 / norm2(d)) * d;
    double quad = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) quad += d[i] * h[i][j] * d[j];
    const double h_step = 1e-3 * (1.0 + norm_inf(x));
    const double fd = testing::fd_second_directional(
        [&](const Vec3& y) { return loss(SourceEstimate::from_vec(y), o, kTruckee); }, x, d,
        h_step);
    // relative to the Hessian scale: near-cancelling directions leave both
    // difference schemes with only truncation noise
    const double denom = std::max(std::abs(fd), frobenius_norm(h));
    worst = std::max(worst, std::abs(quad - fd) / std::max(1e-16, denom));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("pre-symmetrization Hessian defect stays small") {
  Rng rng(99);
  const Observation o = truckee_obs(0.0, 100.0, 5e-4);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 x = random_interior(rng);
    auto grad = [&](const Vec3& y) {
      return loss_gradient(SourceEstimate::from_vec(y), o, kTruckee);
    };
    const Mat3 raw = central_difference_hessian(grad, x);
    Mat3 defect = mat3_zero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) defect[i][j] = 0.5 * (raw[i][j] - raw[j][i]);
    worst = std::max(worst, frobenius_norm(defect));
  }
  // absolute Frobenius defect; the loss scale keeps this far below the bound
  CHECK(worst <= 1e-6);
}

TEST_CASE("loss_hessian guards the release-time differencing margin") {
  // release time within the differencing step of the sample time
  const SourceEstimate x{10.0, 0.0, 99.999999};
  CHECK_THROWS_AS(loss_hessian(x, truckee_obs(0.0, 100.0, 0.0), kTruckee), ElapsedTimeError);
}

TEST_CASE("sampled Lipschitz and smoothness bounds hold against the grid estimate") {
  const Observation o = truckee_obs(0.0, 100.0, 5e-4);
  const Stream obs{o};
  SmoothnessEstimationConfig cfg;
  cfg.points_per_axis = 17;
  const SmoothnessConstants sm = estimate_smoothness_constants(obs, kTruckee, kBox, cfg);
  CHECK(sm.valid());

  Rng rng(123);
  const double kappa_hat = 1.01 * sm.lipschitz_loss;
  const double beta_hat = 1.01 * sm.lipschitz_grad;
  double max_loss = 0;
  int value_violations = 0;
  int grad_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec3 a = random_interior(rng);
    const Vec3 b = random_interior(rng);
    const double dist = norm2(a - b);
    if (dist == 0) continue;
    const SourceEstimate ea = SourceEstimate::from_vec(a);
    const SourceEstimate eb = SourceEstimate::from_vec(b);
    const double dv = std::abs(loss(ea, o, kTruckee) - loss(eb, o, kTruckee));
    if (dv > kappa_hat * dist) ++value_violations;
    const double dg = norm2(loss_gradient(ea, o, kTruckee) - loss_gradient(eb, o, kTruckee));
    if (dg > beta_hat * dist) ++grad_violations;
    max_loss = std::max({max_loss, loss(ea, o, kTruckee), loss(eb, o, kTruckee)});
  }
  CHECK(value_violations == 0);
  CHECK(grad_violations == 0);
  // boundedness: the sampled maximum is finite and reported
  CHECK(std::isfinite(max_loss));
  MESSAGE("sampled max loss over the box: ", max_loss, ", grid bound: ", sm.loss_bound);
}
