// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/geometry.hpp"
#include "core/objective.hpp"
#include "core/rng.hpp"
#include "core/smoothing.hpp"
#include "core/step_control.hpp"
#include "core/types.hpp"

namespace sourcetrace {

enum class Algorithm { tgd, atgd, aptgd, mtgd, mptgd };

Algorithm parse_algorithm(const std::string& name);
std::string algorithm_name(Algorithm a);
bool is_multistart(Algorithm a);
bool is_perturbed(Algorithm a);

struct RunConfig {
  int window = 1;                  // w
  double tolerance = 1e-4;         // delta
  LineSearchConfig line_search;
  GridConfig grid;
  double scale = 100.0;            // headroom of the initial step-size condition
  ModulusScaling modulus_scaling = ModulusScaling::inverse;
  std::optional<double> fixed_eta; // scalar step (TGD)
  int multi_start = 1;             // I
  std::uint64_t seed = 0;
  std::optional<Vec3> start;       // default: seeded uniform draw in the box
  std::uint64_t max_inner_steps = 0;  // per-epoch cap; 0 = unlimited (budget studies)
  bool selection_mean_of_squares = false;
  bool record_inner = false;       // keep per-inner-step objective values in the trace
  int threads = 1;                 // concurrency cap for multi-start paths

  bool valid() const {
    return window >= 1 && tolerance > 0 && multi_start >= 1 && line_search.valid() &&
           grid.valid() && scale > 0 && (!fixed_eta || *fixed_eta > 0);
  }
};

/// Saddle-escape parameters. The derived fields follow the perturbed-descent
/// input block exactly; delta_f may grow online, in which case they are
/// recomputed per epoch.
struct PerturbConfig {
  double c = 0.5;
  double epsilon = 0.1;     // failure probability
  double delta = 1e-4;      // tolerance the thresholds are derived from
  double delta_f = 0;       // objective gap bound; 0 => estimated online
  double kappa = 0;         // loss Lipschitz modulus
  double iota = 0;          // Hessian Lipschitz modulus
  int dimension = 3;
  double epoch_budget_factor = 10.0;

  // derived
  double chi = 0;
  double radius = 0;   // r
  double g_thres = 0;
  double f_thres = 0;
  std::int64_t t_thres = 0;
  std::int64_t t_noise_init = 0;  // -t_thres - 1

  std::uint64_t epoch_budget() const;
};

/// Derives chi, r, g_thres, f_thres, t_thres from the inputs:
///   chi = 3 max{log(d kappa delta_f / (c delta^2 epsilon)), 4}
///   rance = sqrt(c)/chi^2 * delta/kappa,  g_thres = sqrt(c)/chi^2 * delta,
///   f_thres = c/chi^3 * sqrt(delta^3/iota),
///   t_thres = ceil(chi/c^2 * kappa/sqrt(iota delta)).
PerturbConfig aptgd_params(double c, double epsilon, double delta, double delta_f, double kappa,
                           double iota);

/// x + omega with omega uniform on the radius-r ball (gaussian direction,
/// cube-root radial inverse CDF).
Vec3 perturb(const Vec3& x, double r, Rng& rng);
/// Same, projected back into the box.
Vec3 perturb(const Vec3& x, double r, Rng& rng, const FeasibleBox& box);

struct TraceRow {
  std::int64_t n = 0;
  Vec3 estimate{0, 0, 0};        // x^{n+1}: estimate after processing sample n
  Vec3 eta{0, 0, 0};             // step accepted at inner-loop exit
  std::int64_t inner_steps = 0;  // tau^n (summed over paths for multi-start)
  std::uint64_t gradient_calls = 0;  // cumulative per-term gradient evaluations
  double loss = 0;               // Psi^n(x^n): loss of the period-n prediction
  double local_contrib = 0;      // ||pg of F^n at x^n||^2 with this row's eta
  double wall_seconds = 0;       // not serialized
  std::int64_t perturbations = 0;
  bool escape_failed_return = false;
  std::vector<double> inner_values;  // filled when record_inner
};

struct RunTrace {
  std::string algo;
  std::uint64_t seed = 0;
  Vec3 start{0, 0, 0};           // x^1 of the selected sequence
  RunConfig config;
  std::vector<TraceRow> rows;

  /// Invariant: cumulative gradient-call counts never decrease.
  bool gradient_calls_monotone() const {
    std::uint64_t prev = 0;
    for (const auto& r : rows) {
      if (r.gradient_calls < prev) return false;
      prev = r.gradient_calls;
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// Per-epoch inner solvers on an abstract objective. Exposed so surrogate
// objectives can drive them directly.

/// Outcome of one post-perturbation escape window: the objective at the
/// pre-perturbation point and at the t_thres-step check.
struct EscapeEvent {
  std::int64_t perturb_step = 0;
  double value_before = 0;
  double value_at_check = 0;
  bool escaped = false;  // objective dropped by at least f_thres
};

struct EpochResult {
  Vec3 x{0, 0, 0};
  StepVector eta_accepted;
  std::int64_t steps = 0;
  std::int64_t perturbations = 0;
  bool failed_escape_return = false;
  std::vector<EscapeEvent> escape_events;
  std::vector<double> values;  // objective after each inner step (record mode)
};

/// Fixed scalar-step projected descent until ||pg|| <= threshold.
EpochResult tgd_epoch(const Objective& f, const FeasibleBox& box, Vec3 x, double eta_scalar,
                      double threshold, std::uint64_t max_steps = 0, bool record = false);

/// Line-searched vector-step projected descent until ||pg|| <= delta. The
/// step restarts from eta0 on every pass.
EpochResult atgd_epoch(const Objective& f, const FeasibleBox& box, Vec3 x,
                       const StepVector& eta0, double delta, const LineSearchConfig& ls,
                       std::uint64_t max_steps = 0, bool record = false);

/// Perturbed variant: when the projected gradient falls to g_thres a uniform
/// ball perturbation is injected (at most once per t_thres steps); if the
/// objective fails to drop by f_thres within t_thres steps of a perturbation
/// the pre-perturbation point is returned.
EpochResult aptgd_epoch(const Objective& f, const FeasibleBox& box, Vec3 x,
                        const StepVector& eta0, const PerturbConfig& pc,
                        const LineSearchConfig& ls, Rng& rng, std::uint64_t max_steps = 0,
                        bool record = false);

// ---------------------------------------------------------------------------
// Online drivers over an observation stream.

RunTrace run_tgd(const Stream& stream, const FeasibleBox& box, const RiverParams& p,
                 const RunConfig& cfg);
RunTrace run_atgd(const Stream& stream, const FeasibleBox& box, const RiverParams& p,
                  const RunConfig& cfg);
RunTrace run_aptgd(const Stream& stream, const FeasibleBox& box, const RiverParams& p,
                   const RunConfig& cfg, const PerturbConfig& pc);
RunTrace run_multistart(Algorithm variant, const Stream& stream, const FeasibleBox& box,
                        const RiverParams& p, const RunConfig& cfg,
                        const std::optional<PerturbConfig>& pc = std::nullopt);

/// Dispatch by algorithm tag; pc is required for the perturbed variants.
RunTrace run_online(Algorithm algo, const Stream& stream, const FeasibleBox& box,
                    const RiverParams& p, const RunConfig& cfg,
                    const std::optional<PerturbConfig>& pc = std::nullopt);

/// Guard shared by every driver: the box's release-time upper bound must stay
/// below every sample time by at least the elapsed-time guard.
void validate_box_for_stream(const FeasibleBox& box, const Stream& stream);

}  // namespace sourcetrace
