// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include "core/step_control.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/ade_model.hpp"

namespace sourcetrace {

namespace {

std::vector<double> axis_points(double lo, double hi, int k) {
  std::vector<double> pts(static_cast<std::size_t>(k));
  if (k == 1 || lo == hi) {
    std::fill(pts.begin(), pts.end(), 0.5 * (lo + hi));
    return pts;
  }
  const double h = (hi - lo) / static_cast<double>(k - 1);
  for (int i = 0; i < k; ++i) pts[static_cast<std::size_t>(i)] = lo + h * i;
  pts.back() = hi;
  return pts;
}

}  // namespace

InitStepResult init_step_sizes(const Objective& f, const FeasibleBox& box, const GridConfig& grid,
                               const InitStepOptions& opts) {
  if (!box.valid()) throw ConfigError("invalid feasible box");
  if (!grid.valid()) throw ConfigError("invalid grid config");
  const int k = grid.points_per_axis;
  const std::size_t ks = static_cast<std::size_t>(k);

  std::array<std::vector<double>, 3> axes;
  for (int a = 0; a < 3; ++a) axes[a] = axis_points(box.lo[a], box.hi[a], k);

  // Value table over the K^3 grid.
  std::vector<double> values(ks * ks * ks);
  auto at = [&](std::size_t i, std::size_t j, std::size_t l) -> double& {
    return values[(i * ks + j) * ks + l];
  };
  double value_bound = 0;
  for (std::size_t i = 0; i < ks; ++i)
    for (std::size_t j = 0; j < ks; ++j)
      for (std::size_t l = 0; l < ks; ++l) {
        const double v = f.value({axes[0][i], axes[1][j], axes[2][l]});
        at(i, j, l) = v;
        value_bound = std::max(value_bound, std::abs(v));
      }

  // Per-axis max absolute difference quotients, one axis varying at a time.
  InitStepResult out;
  out.value_bound = value_bound;
  auto value_of = [&](int axis, std::size_t v, std::size_t o1, std::size_t o2) {
    switch (axis) {
      case 0: return at(v, o1, o2);
      case 1: return at(o1, v, o2);
      default: return at(o1, o2, v);
    }
  };
  for (int axis = 0; axis < 3; ++axis) {
    double kappa = 0;
    for (std::size_t o1 = 0; o1 < ks; ++o1)
      for (std::size_t o2 = 0; o2 < ks; ++o2)
        for (std::size_t i = 0; i < ks; ++i)
          for (std::size_t j = i + 1; j < ks; ++j) {
            const double dx = axes[axis][j] - axes[axis][i];
            if (dx == 0) continue;
            const double q = std::abs(value_of(axis, j, o1, o2) - value_of(axis, i, o1, o2)) /
                             std::abs(dx);
            kappa = std::max(kappa, q);
          }
    if (kappa < grid.modulus_floor) {
      kappa = grid.modulus_floor;
      out.degenerate_axis = true;
    }
    out.moduli[axis] = kappa;
  }

  // Smoothness estimate from axis-aligned second differences on the same
  // value table.
  double beta_hat = 0;
  for (int axis = 0; axis < 3; ++axis) {
    if (k < 3) break;
    const double h = axes[axis][1] - axes[axis][0];
    if (h == 0) continue;
    for (std::size_t o1 = 0; o1 < ks; ++o1)
      for (std::size_t o2 = 0; o2 < ks; ++o2)
        for (std::size_t i = 1; i + 1 < ks; ++i) {
          const double dd = value_of(axis, i + 1, o1, o2) - 2.0 * value_of(axis, i, o1, o2) +
                            value_of(axis, i - 1, o1, o2);
          beta_hat = std::max(beta_hat, std::abs(dd) / (h * h));
        }
  }
  beta_hat = std::max(beta_hat, grid.modulus_floor);
  out.beta_hat = beta_hat;

  Vec3 ratio;
  for (int a = 0; a < 3; ++a) {
    ratio[a] = opts.scaling == ModulusScaling::inverse ? 1.0 / out.moduli[a] : out.moduli[a];
  }
  const double rmax = std::max({ratio[0], ratio[1], ratio[2]});
  for (int a = 0; a < 3; ++a) ratio[a] /= rmax;  // ||ratio||_inf = 1

  double mu;
  if (opts.inf_cap) {
    mu = *opts.inf_cap;
    if (!(mu > 0)) throw ConfigError("step-size infinity cap must be positive");
  } else {
    const double rmin = norm_min(ratio);
    mu = 2.0 * rmin / (opts.scale * beta_hat);
  }
  out.eta0.eta = mu * ratio;
  if (!out.eta0.valid()) {
    throw NonFiniteIterateError("initial step-size construction produced a non-finite step");
  }
  return out;
}

LineSearchResult line_search(const Objective& f, const Vec3& x, const Vec3& grad_x,
                             const StepVector& eta0, const FeasibleBox& box,
                             const LineSearchConfig& cfg) {
  if (!cfg.valid()) throw ConfigError("invalid line-search config");
  if (!eta0.valid()) throw ConfigError("initial step sizes must be positive");

  const double f_x = f.value(x);  // one evaluation shared by every level
  StepVector eta = eta0;
  for (int level = 0;; ++level) {
    const Vec3 pg = projected_gradient(grad_x, x, eta, box);
    const double npg = norm2(pg);
    if (npg < 1e-12) return {eta, level};  // stopping criterion will fire upstream

    const Vec3 trial = x - (1.0 / npg) * hadamard(eta.eta, pg);
    const double lhs = value_or_inf(f, trial);
    const double slack = cfg.armijo_beta * norm2(hadamard(eta.eta, pg));
    const double rhs = cfg.classic_armijo ? f_x - slack : f_x + slack;
    if (lhs <= rhs) return {eta, level};

    if (level >= cfg.max_shrinks) {
      throw LineSearchStalledError("no acceptable step after " +
                                   std::to_string(cfg.max_shrinks) + " shrinks");
    }
    eta.eta = hadamard(cfg.shrink, eta.eta);
  }
}

double optimal_window(double kappa, double delta, double n_samples) {
  const double w = 2.0 * kappa / delta;
  if (w <= 1.0) return 1.0;
  if (w >= n_samples) return n_samples;
  return w;
}

SmoothnessConstants estimate_smoothness_constants(std::span<const Observation> observations,
                                                  const RiverParams& p, const FeasibleBox& box,
                                                  const SmoothnessEstimationConfig& cfg) {
  if (observations.empty()) throw ConfigError("smoothness estimation needs observations");
  if (!box.valid()) throw ConfigError("invalid feasible box");

  const std::size_t stride =
      std::max<std::size_t>(1, observations.size() / std::max<std::size_t>(1, cfg.max_observations));

  SmoothnessConstants c;
  const int k = std::max(2, cfg.points_per_axis);
  std::array<std::vector<double>, 3> axes;
  for (int a = 0; a < 3; ++a) axes[a] = axis_points(box.lo[a], box.hi[a], k);
  Vec3 h;
  for (int a = 0; a < 3; ++a) h[a] = axes[a].size() > 1 ? axes[a][1] - axes[a][0] : 0.0;

  for (std::size_t oi = 0; oi < observations.size(); oi += stride) {
    const Observation& o = observations[oi];
    // value/gradient tables for this observation
    std::vector<double> vals;
    std::vector<Vec3> grads, rgrads;
    std::vector<double> rvals;
    vals.reserve(static_cast<std::size_t>(k * k * k));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        for (int l = 0; l < k; ++l) {
          const SourceEstimate x{axes[0][static_cast<std::size_t>(i)],
                                 axes[1][static_cast<std::size_t>(j)],
                                 axes[2][static_cast<std::size_t>(l)]};
          vals.push_back(loss(x, o, p));
          grads.push_back(loss_gradient(x, o, p));
          rvals.push_back(residual(x, o, p));
          rgrads.push_back(ade_gradient(x, o.sensor_location, o.sample_time, p));
        }
    const std::size_t ks = static_cast<std::size_t>(k);
    auto idx = [&](std::size_t i, std::size_t j, std::size_t l) { return (i * ks + j) * ks + l; };
    for (std::size_t i = 0; i < ks; ++i)
      for (std::size_t j = 0; j < ks; ++j)
        for (std::size_t l = 0; l < ks; ++l) {
          const std::size_t a = idx(i, j, l);
          c.loss_bound = std::max(c.loss_bound, std::abs(vals[a]));
          c.lipschitz_loss = std::max(c.lipschitz_loss, norm2(grads[a]));
          c.lipschitz_residual = std::max(c.lipschitz_residual, norm2(rgrads[a]));
          // axis-adjacent neighbours for gradient Lipschitz estimates
          const std::size_t nbr[3] = {idx(i + 1, j, l), idx(i, j + 1, l), idx(i, j, l + 1)};
          const bool ok[3] = {i + 1 < ks, j + 1 < ks, l + 1 < ks};
          for (int axis = 0; axis < 3; ++axis) {
            if (!ok[axis] || h[axis] == 0) continue;
            const std::size_t b = nbr[axis];
            c.lipschitz_grad = std::max(c.lipschitz_grad, norm2(grads[a] - grads[b]) / h[axis]);
            c.lipschitz_residual_grad =
                std::max(c.lipschitz_residual_grad, norm2(rgrads[a] - rgrads[b]) / h[axis]);
          }
        }
    (void)rvals;
  }

  // Hessian Lipschitz on a coarser grid (each Hessian costs six gradient
  // evaluations).
  const int kh = std::max(2, cfg.hessian_points_per_axis);
  std::array<std::vector<double>, 3> haxes;
  for (int a = 0; a < 3; ++a) haxes[a] = axis_points(box.lo[a], box.hi[a], kh);
  Vec3 hh;
  for (int a = 0; a < 3; ++a) hh[a] = haxes[a].size() > 1 ? haxes[a][1] - haxes[a][0] : 0.0;
  for (std::size_t oi = 0; oi < observations.size(); oi += stride * 4 + 1) {
    const Observation& o = observations[oi];
    std::vector<Mat3> hess;
    std::vector<bool> have;
    for (int i = 0; i < kh; ++i)
      for (int j = 0; j < kh; ++j)
        for (int l = 0; l < kh; ++l) {
          const SourceEstimate x{haxes[0][static_cast<std::size_t>(i)],
                                 haxes[1][static_cast<std::size_t>(j)],
                                 haxes[2][static_cast<std::size_t>(l)]};
          try {
            hess.push_back(loss_hessian(x, o, p));
            have.push_back(true);
          } catch (const ElapsedTimeError&) {
            // differencing point crossed the guard; skip this node
            hess.push_back(mat3_zero());
            have.push_back(false);
          }
        }
    const std::size_t ks = static_cast<std::size_t>(kh);
    auto idx = [&](std::size_t i, std::size_t j, std::size_t l) { return (i * ks + j) * ks + l; };
    for (std::size_t i = 0; i < ks; ++i)
      for (std::size_t j = 0; j < ks; ++j)
        for (std::size_t l = 0; l < ks; ++l) {
          const std::size_t a = idx(i, j, l);
          const std::size_t nbr[3] = {idx(i + 1, j, l), idx(i, j + 1, l), idx(i, j, l + 1)};
          const bool ok[3] = {i + 1 < ks, j + 1 < ks, l + 1 < ks};
          for (int axis = 0; axis < 3; ++axis) {
            if (!ok[axis] || hh[axis] == 0) continue;
            if (!have[a] || !have[nbr[axis]]) continue;
            c.lipschitz_hessian = std::max(
                c.lipschitz_hessian,
                frobenius_norm(hess[a] + (-1.0 * hess[nbr[axis]])) / hh[axis]);
          }
        }
  }

  // Keep every modulus strictly positive so downstream formulas stay finite.
  const double floor = 1e-30;
  c.lipschitz_loss = std::max(c.lipschitz_loss, floor);
  c.lipschitz_grad = std::max(c.lipschitz_grad, floor);
  c.lipschitz_hessian = std::max(c.lipschitz_hessian, floor);
  c.loss_bound = std::max(c.loss_bound, floor);
  c.lipschitz_residual = std::max(c.lipschitz_residual, floor);
  c.lipschitz_residual_grad = std::max(c.lipschitz_residual_grad, floor);
  return c;
}

}  // namespace sourcetrace
