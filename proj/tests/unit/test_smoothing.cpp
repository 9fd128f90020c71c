// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "core/evaluation.hpp"
#include "core/smoothing.hpp"
#include "core/synthetic.hpp"
#include "support.hpp"

using namespace sourcetrace;

namespace {

const RiverParams kTruckee{60.0, 2430.0, 80.0, 1e-8};
const SourceEstimate kTruth{1300.0, -22106.0, -215.0};

ScenarioConfig small_scenario() {
  ScenarioConfig sc;
  sc.river = kTruckee;
  sc.true_source = kTruth;
  sc.sensor_locations = {0.0, 3000.0};
  sc.schedule = {60.0, 5.0, 10};
  sc.seed = 11;
  sc.box = {{1.0, -40000.0, -500.0}, {3000.0, -1000.0, 0.0}};
  return sc;
}

}  // namespace

TEST_CASE("window evaluation averages the most recent w losses over w") {
  const Stream obs = generate_synthetic(small_scenario());
  const SourceEstimate x{700.0, -15000.0, -100.0};

  LossHistory w1(kTruckee, 1);
  w1.append(obs[0]);
  CHECK(w1.window_eval(x) == doctest::Approx(loss(x, obs[0], kTruckee)).epsilon(1e-15));

  // n = 1, w = 2: the missing term contributes zero but the divisor stays w
  LossHistory w2(kTruckee, 2);
  w2.append(obs[0]);
  CHECK(w2.window_eval(x) == doctest::Approx(0.5 * loss(x, obs[0], kTruckee)).epsilon(1e-15));

  w2.append(obs[1]);
  CHECK(w2.window_eval(x) ==
        doctest::Approx(0.5 * (loss(x, obs[0], kTruckee) + loss(x, obs[1], kTruckee)))
            .epsilon(1e-15));

  // the window drops the oldest term
  w2.append(obs[2]);
  CHECK(w2.window_eval(x) ==
        doctest::Approx(0.5 * (loss(x, obs[1], kTruckee) + loss(x, obs[2], kTruckee)))
            .epsilon(1e-15));
}

TEST_CASE("window gradient is the term average and matches finite differences") {
  const Stream obs = generate_synthetic(small_scenario());
  const SourceEstimate x{700.0, -15000.0, -100.0};

  LossHistory h(kTruckee, 3);
  for (int i = 0; i < 3; ++i) h.append(obs[static_cast<std::size_t>(i)]);
  const Vec3 g = h.window_gradient(x);
  const Vec3 fd = testing::fd_gradient(
      [&](const Vec3& y) { return h.window_eval(SourceEstimate::from_vec(y)); }, x.vec());
  CHECK(norm2(g - fd) / std::max(1e-300, norm2(fd)) <= 1e-6);

  // zero gradient at the truth on a noiseless stream
  CHECK(norm2(h.window_gradient(kTruth)) == doctest::Approx(0.0));
}

TEST_CASE("window Hessian is the exact mean of per-term Hessians") {
  const Stream obs = generate_synthetic(small_scenario());
  const SourceEstimate x{700.0, -15000.0, -100.0};
  LossHistory h(kTruckee, 2);
  h.append(obs[0]);
  h.append(obs[1]);
  const Mat3 hw = h.window_hessian(x);
  const Mat3 manual =
      0.5 * (loss_hessian(x, obs[0], kTruckee) + loss_hessian(x, obs[1], kTruckee));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(hw[i][j] == doctest::Approx(manual[i][j]).epsilon(1e-12));
    }

  // eigenvalues against the characteristic-polynomial oracle
  const auto roots = testing::charpoly_eigenvalues(hw);
  CHECK(min_eigenvalue(hw) == doctest::Approx(roots.front()).epsilon(1e-8));
}

TEST_CASE("window shift identity F^n - F^{n-1} = (Psi^n - Psi^{n-w})/w") {
  const Stream obs = generate_synthetic(small_scenario());
  const int w = 3;
  const SourceEstimate x{900.0, -20000.0, -150.0};

  LossHistory prev(kTruckee, w);
  LossHistory curr(kTruckee, w);
  const std::size_t n = 6;
  for (std::size_t i = 0; i + 1 < n; ++i) prev.append(obs[i]);
  for (std::size_t i = 0; i < n; ++i) curr.append(obs[i]);

  const double shift = curr.window_eval(x) - prev.window_eval(x);
  const double direct =
      (loss(x, obs[n - 1], kTruckee) - loss(x, obs[n - 1 - w], kTruckee)) / w;
  CHECK(shift == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("gradient-call accounting counts distinct loss terms") {
  const Stream obs = generate_synthetic(small_scenario());
  LossHistory h(kTruckee, 4);
  const SourceEstimate x{700.0, -15000.0, -100.0};
  h.append(obs[0]);
  h.append(obs[1]);
  CHECK(h.gradient_calls() == 0);
  (void)h.window_gradient(x);
  CHECK(h.gradient_calls() == 2);  // two terms in the window
  (void)h.window_gradient(x);
  CHECK(h.gradient_calls() == 4);
  h.append(obs[2]);
  h.append(obs[3]);
  h.append(obs[4]);
  (void)h.window_gradient(x);
  CHECK(h.gradient_calls() == 8);  // window is full at w = 4
}

TEST_CASE("selection score is zero at the truth on noiseless data") {
  const Stream obs = generate_synthetic(small_scenario());
  LossHistory h(kTruckee, 1);
  for (const Observation& o : obs) h.append(o);
  CHECK(h.selection_score(kTruth) == doctest::Approx(0.0));
  CHECK(h.selection_score(kTruth, true) == doctest::Approx(0.0));
  const SourceEstimate off{500.0, -10000.0, -50.0};
  CHECK(h.selection_score(off) > 0.0);
}
