// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "core/evaluation.hpp"
#include "core/synthetic.hpp"
#include "support.hpp"

using namespace sourcetrace;
using sourcetrace::testing::QuadraticObjective;
using sourcetrace::testing::SaddleObjective;

namespace {

const RiverParams kTruckee{60.0, 2430.0, 80.0, 1e-8};
const SourceEstimate kTruth{1300.0, -22106.0, -215.0};
const FeasibleBox kBox{{1.0, -40000.0, -500.0}, {3000.0, -1000.0, 0.0}};

Stream noiseless_stream(int count, std::uint64_t seed) {
  ScenarioConfig sc;
  sc.river = kTruckee;
  sc.true_source = kTruth;
  sc.sensor_locations = {0.0, 3000.0, 6000.0, 9000.0};
  sc.schedule = {60.0, 2.0, count};
  sc.seed = seed;
  sc.box = kBox;
  return generate_synthetic(sc);
}

}  // namespace

TEST_CASE("local regret is zero on an all-zero loss stream") {
  // zero-mass source predicts zero concentration everywhere
  Stream obs(6);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    obs[i] = {0, 0.0, 60.0 + static_cast<double>(i), 0.0};
  }
  RunTrace trace;
  trace.start = {0.0, -5000.0, -100.0};
  for (std::size_t i = 0; i < obs.size(); ++i) {
    TraceRow row;
    row.n = static_cast<std::int64_t>(i) + 1;
    row.estimate = trace.start;
    row.eta = {1.0, 1.0, 1.0};
    trace.rows.push_back(row);
  }
  FeasibleBox box = kBox;
  box.lo[0] = 0.0;  // zero mass must be feasible here
  std::vector<double> contribs;
  const double r = local_regret(trace, obs, 1, kTruckee, box, EtaConvention::accepted_at_n,
                                std::nullopt, &contribs);
  CHECK(r == 0.0);
  for (double c : contribs) CHECK(c == 0.0);
}

TEST_CASE("local regret equals the hand-summed value on a three-step toy trace") {
  const Stream obs = noiseless_stream(1, 1);
  Stream three{obs[0], obs[1], obs[2]};

  RunTrace trace;
  trace.start = {800.0, -15000.0, -120.0};
  const Vec3 estimates[3] = {
      {900.0, -16000.0, -130.0}, {1000.0, -17000.0, -150.0}, {1100.0, -18000.0, -170.0}};
  const Vec3 etas[3] = {{2.0, 3.0, 4.0}, {1.0, 1.0, 1.0}, {0.5, 0.25, 0.125}};
  for (int i = 0; i < 3; ++i) {
    TraceRow row;
    row.n = i + 1;
    row.estimate = estimates[i];
    row.eta = etas[i];
    trace.rows.push_back(row);
  }

  // independent scalar recomputation of sum ||(x - clamp(x - eta g)) / eta||^2
  double expected = 0;
  Vec3 x = trace.start;
  for (int i = 0; i < 3; ++i) {
    const Vec3 g = loss_gradient(SourceEstimate::from_vec(x), three[static_cast<std::size_t>(i)],
                                 kTruckee);
    double s = 0;
    for (int d = 0; d < 3; ++d) {
      double stepped = x[d] - etas[i][d] * g[d];
      stepped = std::min(std::max(stepped, kBox.lo[d]), kBox.hi[d]);
      const double c = (x[d] - stepped) / etas[i][d];
      s += c * c;
    }
    expected += s;
    x = estimates[i];
  }

  const double r = local_regret(trace, three, 1, kTruckee, kBox);
  CHECK(r == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("offline oracle finds the exact-fit optimum of a noiseless stream") {
  const Stream obs = noiseless_stream(12, 2);
  const OracleResult oracle = offline_oracle(obs, kBox, kTruckee, 25, 600);
  CHECK(oracle.value <= 1e-8);

  // minimality against random probes
  const SumLossObjective f(obs, kTruckee);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Vec3 probe{rng.uniform(kBox.lo[0], kBox.hi[0]), rng.uniform(kBox.lo[1], kBox.hi[1]),
                     rng.uniform(kBox.lo[2], kBox.hi[2])};
    CHECK(oracle.value <= f.value(probe) + 1e-15);
  }
}

TEST_CASE("doubling the oracle grid changes the value by less than 1 percent") {
  ScenarioConfig sc;
  sc.river = kTruckee;
  sc.true_source = kTruth;
  sc.sensor_locations = {0.0, 3000.0};
  sc.schedule = {60.0, 4.0, 15};
  sc.seed = 9;
  sc.box = kBox;
  sc.noise.kind = NoiseModel::Kind::relative_gaussian;
  sc.noise.stddev = 0.01;
  const Stream obs = generate_synthetic(sc);

  const OracleResult coarse = offline_oracle(obs, kBox, kTruckee, 20, 200);
  const OracleResult fine = offline_oracle(obs, kBox, kTruckee, 40, 200);
  const double scale = std::max({std::abs(coarse.value), std::abs(fine.value), 1e-300});
  CHECK(std::abs(coarse.value - fine.value) / scale < 0.01);
}

TEST_CASE("cumulative regret vanishes for an oracle-matching prediction") {
  const Stream obs = noiseless_stream(4, 3);
  RunTrace trace;
  trace.start = kTruth.vec();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    TraceRow row;
    row.n = static_cast<std::int64_t>(i) + 1;
    row.estimate = kTruth.vec();
    row.eta = {1, 1, 1};
    trace.rows.push_back(row);
  }
  const OracleResult oracle = offline_oracle(obs, kBox, kTruckee, 20, 200);
  const double r = cumulative_regret(trace, obs, kTruckee, oracle);
  CHECK(std::abs(r) <= 1e-8);
}

TEST_CASE("min_eigenvalue closed form matches the characteristic-polynomial oracle") {
  CHECK(min_eigenvalue({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}) == doctest::Approx(1.0));
  CHECK(min_eigenvalue({{{1, 0, 0}, {0, 2, 0}, {0, 0, -3}}}) == doctest::Approx(-3.0));

  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    Mat3 a = mat3_zero();
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        a[i][j] = rng.uniform(-3, 3);
        a[j][i] = a[i][j];
      }
    const double closed = min_eigenvalue(a);
    const auto roots = testing::charpoly_eigenvalues(a);
    CHECK(std::abs(closed - roots.front()) <= 1e-8);
  }
}

TEST_CASE("min_eigenvalue rejects asymmetric input") {
  const Mat3 bad{{{1, 1, 0}, {0, 1, 0}, {0, 0, 1}}};
  CHECK_THROWS_AS(min_eigenvalue(bad), AsymmetricInputError);
}

TEST_CASE("second-order certification separates minima from saddles") {
  const QuadraticObjective bowl({0.1, -0.2, 0.3}, {1.0, 2.0, 3.0});
  const auto good = check_second_order({0.1, -0.2, 0.3}, bowl, 1e-4, 1.0);
  CHECK(good.pass);
  CHECK(good.min_eig == doctest::Approx(1.0));

  const SaddleObjective saddle(0.0);
  const auto bad = check_second_order({0, 0, 0}, saddle, 1e-4, 1.0);
  CHECK_FALSE(bad.pass);
  CHECK(bad.min_eig == doctest::Approx(-2.0));
  CHECK(bad.gradient_norm <= 1e-4);
}

TEST_CASE("error-bound check recovers the curvature of a strongly convex bowl") {
  const QuadraticObjective bowl({0.2, 0.1, -0.3}, {2.0, 5.0, 3.0});
  const FeasibleBox box{{-2, -2, -2}, {2, 2, 2}};
  const PerturbConfig pc = aptgd_params(1.0, 0.1, 1e-3, 10.0, 20.0, 1.0);
  const auto far = check_error_bound(bowl, box, {0.5, 0.5, 0.5}, 1e-3, 50, 42, pc,
                                     LineSearchConfig{}, GridConfig{});
  CHECK(far.mu_hat == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(norm2(far.solved_min - Vec3{0.2, 0.1, -0.3}) <= 1e-3);
  // the candidate sits far outside the mu*theta ball of the solved minimum
  CHECK_FALSE(far.holds_with_sampling);

  // a candidate at the minimum satisfies the proximity clause
  const auto close = check_error_bound(bowl, box, {0.2, 0.1, -0.3}, 1e-3, 50, 42, pc,
                                       LineSearchConfig{}, GridConfig{});
  CHECK(close.holds_with_sampling);

  // reproducibility across seeds up to sampling noise
  const auto rep2 = check_error_bound(bowl, box, {0.5, 0.5, 0.5}, 1e-3, 50, 43, pc,
                                      LineSearchConfig{}, GridConfig{});
  CHECK(far.mu_hat == doctest::Approx(rep2.mu_hat).epsilon(1e-6));
}

TEST_CASE("error-bound check flags a saddle as not locally convex") {
  const SaddleObjective saddle(0.0);
  const FeasibleBox box{{-1, -1, -1}, {1, 1, 1}};
  const PerturbConfig pc = aptgd_params(1.0, 0.1, 1e-3, 4.0, 10.0, 1.0);
  CHECK_THROWS_AS(check_error_bound(saddle, box, {0, 0, 0}, 1e-3, 50, 7, pc, LineSearchConfig{},
                                    GridConfig{}),
                  NotLocallyConvexError);
}
