// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "core/ade_model.hpp"
#include "core/objective.hpp"
#include "core/types.hpp"

namespace sourcetrace {

/// Streaming loss history with a sliding window. Only the most recent
/// `window` observations are kept for the follow-the-leader objective; the
/// full record of (sensor, time, concentration) triples is retained for the
/// multi-start selection rule, which averages residuals over everything seen
/// so far.
///
/// Single writer (the ingester); concurrent readers are fine between appends.
class LossHistory {
 public:
  LossHistory(RiverParams params, int window);

  void append(const Observation& o);

  int window() const { return window_; }
  std::int64_t index() const { return index_; }  // n: number of appends so far
  const RiverParams& params() const { return params_; }

  /// Observations contributing to F^n (the last min(w, n); oldest first).
  const std::deque<Observation>& window_terms() const { return window_terms_; }

  /// Everything appended so far, oldest first.
  const std::vector<Observation>& seen() const { return seen_; }

  /// F^n(x): sliding-window time average; terms with index <= 0 are zero, so
  /// the divisor stays w even when fewer terms exist.
  double window_eval(const SourceEstimate& x) const;

  /// Gradient of F^n(x). Adds one per distinct loss term to the gradient-call
  /// counter.
  Vec3 window_gradient(const SourceEstimate& x) const;

  /// Hessian of F^n(x): average of per-term Hessians.
  Mat3 window_hessian(const SourceEstimate& x) const;

  std::uint64_t gradient_calls() const { return gradient_calls_.load(std::memory_order_relaxed); }
  void reset_gradient_calls() { gradient_calls_.store(0, std::memory_order_relaxed); }

  /// Multi-start selection score at x over everything seen so far. In the
  /// printed form this is the mean over sensors of the squared per-sensor
  /// mean residual; `mean_of_squares` switches to the mean squared residual
  /// over all observations.
  double selection_score(const SourceEstimate& x, bool mean_of_squares = false) const;

 private:
  RiverParams params_;
  int window_;
  std::int64_t index_ = 0;
  std::deque<Observation> window_terms_;
  std::vector<Observation> seen_;
  // concurrent path epochs share the history read-only; the counter is the
  // one mutable slot
  mutable std::atomic<std::uint64_t> gradient_calls_{0};
};

/// Objective view of F^n over a LossHistory at its current index.
class WindowObjective final : public Objective {
 public:
  explicit WindowObjective(const LossHistory& h) : h_(&h) {}

  double value(const Vec3& x) const override { return h_->window_eval(SourceEstimate::from_vec(x)); }
  Vec3 gradient(const Vec3& x) const override {
    return h_->window_gradient(SourceEstimate::from_vec(x));
  }
  Mat3 hessian(const Vec3& x) const override {
    return h_->window_hessian(SourceEstimate::from_vec(x));
  }

 private:
  const LossHistory* h_;
};

}  // namespace sourcetrace
