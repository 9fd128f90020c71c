// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>

#include "core/geometry.hpp"
#include "core/objective.hpp"
#include "core/types.hpp"

namespace sourcetrace {

/// Normalized Backtracking-Armijo configuration. `armijo_beta` is the Armijo
/// constant of the acceptance inequality, distinct from the smoothness
/// modulus that shares the letter in other contexts.
struct LineSearchConfig {
  double armijo_beta = 8e-6;
  Vec3 shrink{0.5, 0.5, 0.5};  // tau, componentwise in (0,1)
  int max_shrinks = 60;        // L_max; 2^-60 is far past double relevance
  // The acceptance inequality is implemented as printed, with an additive
  // positive slack on the right-hand side. This switch restores the
  // conventional sufficient-decrease form for comparison.
  bool classic_armijo = false;

  bool valid() const {
    if (!(armijo_beta > 0 && armijo_beta < 1)) return false;
    for (int i = 0; i < 3; ++i)
      if (!(shrink[i] > 0 && shrink[i] < 1)) return false;
    return max_shrinks >= 1;
  }
};

/// Grid used for per-axis Lipschitz modulus estimation.
struct GridConfig {
  int points_per_axis = 5;      // K
  double modulus_floor = 1e-30;

  bool valid() const { return points_per_axis >= 2 && modulus_floor > 0; }
};

/// How the per-axis moduli map to step-size ratios. The inverse rule makes
/// the update magnitude comparable across dimensions (small steps on steep
/// axes); the direct rule reproduces the proportionality equations as
/// printed. Default is inverse.
enum class ModulusScaling { inverse, direct };

struct InitStepResult {
  StepVector eta0;
  Vec3 moduli{0, 0, 0};     // per-axis Lipschitz estimates (floored)
  double beta_hat = 0;      // smoothness estimate from axis second differences
  double value_bound = 0;   // max |F| seen on the grid
  bool degenerate_axis = false;  // some modulus fell below the floor
};

struct InitStepOptions {
  double scale = 100.0;  // headroom factor in ||eta||_min / ||eta||_inf^2 = scale * beta_hat / 2
  ModulusScaling scaling = ModulusScaling::inverse;
  // When set, the overall magnitude is fixed by ||eta0||_inf = inf_cap
  // instead of the smoothness condition (the perturbed variant's rule).
  std::optional<double> inf_cap;
};

/// Initial step-size construction: estimates per-axis Lipschitz moduli as the
/// max absolute difference quotient over a uniform K^3 grid on the box
/// (endpoints included), then scales the per-axis ratios so that
/// ||eta0||_min / ||eta0||_inf^2 = scale * beta_hat / 2.
InitStepResult init_step_sizes(const Objective& f, const FeasibleBox& box, const GridConfig& grid,
                               const InitStepOptions& opts = {});

struct LineSearchResult {
  StepVector eta;
  int shrinks = 0;
};

/// Normalized Backtracking-Armijo line search. Shrinks eta componentwise from
/// eta0 until
///   F(x - eta (*) g_proj / ||g_proj||) <= F(x) + armijo_beta * ||eta (*) g_proj||
/// where g_proj is recomputed with the candidate eta. `grad_x` is the raw
/// gradient at x, supplied by the caller so gradient accounting stays exact.
/// Trial points outside the evaluable domain count as +inf. Returns eta0
/// immediately when ||g_proj|| < 1e-12. Throws LineSearchStalledError after
/// max_shrinks rejections.
LineSearchResult line_search(const Objective& f, const Vec3& x, const Vec3& grad_x,
                             const StepVector& eta0, const FeasibleBox& box,
                             const LineSearchConfig& cfg);

/// Window that minimizes the local-regret bound under a fixed gradient
/// budget: 1 when 2*kappa/delta <= 1, N when >= N, else 2*kappa/delta.
double optimal_window(double kappa, double delta, double n_samples);

struct SmoothnessEstimationConfig {
  int points_per_axis = 7;
  int hessian_points_per_axis = 4;
  std::size_t max_observations = 64;
};

/// Empirical moduli of the per-observation loss family over the box, by grid
/// sampling of values, analytic gradients and differenced Hessians. The paper
/// proves these constants exist but never states values.
SmoothnessConstants estimate_smoothness_constants(std::span<const Observation> observations,
                                                  const RiverParams& p, const FeasibleBox& box,
                                                  const SmoothnessEstimationConfig& cfg = {});

}  // namespace sourcetrace
