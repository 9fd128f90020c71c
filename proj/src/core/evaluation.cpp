// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include "core/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/ade_model.hpp"
#include "core/rng.hpp"
#include "core/smoothing.hpp"
#include "core/step_control.hpp"

namespace sourcetrace {

double SumLossObjective::value(const Vec3& x) const {
  double s = 0;
  const SourceEstimate e = SourceEstimate::from_vec(x);
  for (const Observation& o : *obs_) s += loss(e, o, p_);
  return s;
}

Vec3 SumLossObjective::gradient(const Vec3& x) const {
  Vec3 s{0, 0, 0};
  const SourceEstimate e = SourceEstimate::from_vec(x);
  for (const Observation& o : *obs_) s = s + loss_gradient(e, o, p_);
  return s;
}

Mat3 SumLossObjective::hessian(const Vec3& x) const {
  Mat3 s = mat3_zero();
  const SourceEstimate e = SourceEstimate::from_vec(x);
  for (const Observation& o : *obs_) s = s + loss_hessian(e, o, p_);
  return s;
}

double local_regret(const RunTrace& trace, const Stream& stream, int window,
                    const RiverParams& p, const FeasibleBox& box, EtaConvention convention,
                    std::optional<Vec3> fixed_eta, std::vector<double>* contributions) {
  if (trace.rows.size() > stream.size()) {
    throw ConfigError("trace has more rows than the stream has observations");
  }
  if (convention == EtaConvention::fixed_reference && !fixed_eta) {
    throw ConfigError("fixed_reference convention needs a reference eta");
  }
  LossHistory history(p, window);
  double total = 0;
  if (contributions) contributions->clear();

  Vec3 x_pred = trace.start;
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    history.append(stream[k]);
    const TraceRow& row = trace.rows[k];
    Vec3 eta;
    switch (convention) {
      case EtaConvention::accepted_at_n:
        eta = row.eta;
        break;
      case EtaConvention::certificate_of_x:
        // the step that certified x^n: the previous row's accepted step
        eta = k == 0 ? row.eta : trace.rows[k - 1].eta;
        break;
      case EtaConvention::fixed_reference:
        eta = *fixed_eta;
        break;
    }
    const StepVector sv{eta};
    if (!sv.valid()) throw ConfigError("trace row " + std::to_string(k) + " has a non-positive eta");
    const Vec3 g = history.window_gradient(SourceEstimate::from_vec(x_pred));
    const double n = norm2(projected_gradient(g, project(box, x_pred), sv, box));
    const double contrib = n * n;
    total += contrib;
    if (contributions) contributions->push_back(contrib);
    x_pred = row.estimate;
  }
  return total;
}

OracleResult offline_oracle(const Stream& prefix, const FeasibleBox& box, const RiverParams& p,
                            int grid_density, int polish_steps, int polish_starts) {
  if (prefix.empty()) throw ConfigError("offline oracle needs a nonempty stream");
  if (grid_density < 2) throw ConfigError("oracle grid density must be >= 2");
  validate_box_for_stream(box, prefix);
  const SumLossObjective f(prefix, p);

  struct Cell {
    double value;
    Vec3 x;
  };
  std::vector<Cell> best;
  const std::size_t keep = static_cast<std::size_t>(std::max(1, polish_starts));
  const int k = grid_density;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int l = 0; l < k; ++l) {
        const Vec3 x{box.lo[0] + (box.hi[0] - box.lo[0]) * i / (k - 1),
                     box.lo[1] + (box.hi[1] - box.lo[1]) * j / (k - 1),
                     box.lo[2] + (box.hi[2] - box.lo[2]) * l / (k - 1)};
        const double v = f.value(x);
        if (best.size() < keep) {
          best.push_back({v, x});
          std::push_heap(best.begin(), best.end(),
                         [](const Cell& a, const Cell& b) { return a.value < b.value; });
        } else if (v < best.front().value) {
          std::pop_heap(best.begin(), best.end(),
                        [](const Cell& a, const Cell& b) { return a.value < b.value; });
          best.back() = {v, x};
          std::push_heap(best.begin(), best.end(),
                         [](const Cell& a, const Cell& b) { return a.value < b.value; });
        }
      }

  // Damped Gauss-Newton polish from the best cells, projected into the box.
  // The summed loss is a least-squares objective with an exact Jacobian, and
  // the (location, time) valley is too ill-conditioned for first-order polish
  // to reach the documented oracle tolerance.
  OracleResult out;
  out.value = std::numeric_limits<double>::infinity();
  for (const Cell& cell : best) {
    Vec3 x = cell.x;
    double v = cell.value;
    double lambda = 1e-3;
    for (int it = 0; it < polish_steps; ++it) {
      // normal equations J'J d = -J'r over the prefix
      Mat3 a = mat3_zero();
      Vec3 b{0, 0, 0};
      const SourceEstimate e = SourceEstimate::from_vec(x);
      for (const Observation& o : prefix) {
        const Vec3 j = ade_gradient(e, o.sensor_location, o.sample_time, p);
        const double r = e.mass * j[0] - o.concentration;
        for (int ii = 0; ii < 3; ++ii) {
          for (int jj = 0; jj < 3; ++jj) a[ii][jj] += j[ii] * j[jj];
          b[ii] += j[ii] * r;
        }
      }
      bool improved = false;
      for (int attempt = 0; attempt < 40; ++attempt) {
        Mat3 m = a;
        for (int ii = 0; ii < 3; ++ii) m[ii][ii] += lambda * (a[ii][ii] + 1e-300);
        // Cramer solve of the damped 3x3 system
        const double det =
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
            m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
            m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        if (det == 0 || !std::isfinite(det)) {
          lambda *= 4.0;
          continue;
        }
        Vec3 d;
        for (int col = 0; col < 3; ++col) {
          Mat3 t = m;
          for (int row = 0; row < 3; ++row) t[row][col] = -b[row];
          const double dt =
              t[0][0] * (t[1][1] * t[2][2] - t[1][2] * t[2][1]) -
              t[0][1] * (t[1][0] * t[2][2] - t[1][2] * t[2][0]) +
              t[0][2] * (t[1][0] * t[2][1] - t[1][1] * t[2][0]);
          d[col] = dt / det;
        }
        const Vec3 next = project(box, x + d);
        if (!all_finite(next) || next == x) {
          lambda *= 4.0;
          continue;
        }
        double nv;
        try {
          nv = f.value(next);
        } catch (const ElapsedTimeError&) {
          nv = std::numeric_limits<double>::infinity();
        }
        if (nv < v) {
          x = next;
          v = nv;
          lambda = std::max(1e-12, lambda * 0.5);
          improved = true;
          break;
        }
        lambda *= 4.0;
        if (lambda > 1e18) break;
      }
      if (!improved) break;
    }
    if (v < out.value) {
      out.value = v;
      out.argmin = SourceEstimate::from_vec(x);
    }
  }
  return out;
}

double cumulative_regret(const RunTrace& trace, const Stream& stream, const RiverParams& p,
                         const OracleResult& oracle, std::vector<double>* period_losses) {
  if (trace.rows.size() > stream.size()) {
    throw ConfigError("trace has more rows than the stream has observations");
  }
  double acc = 0;
  if (period_losses) period_losses->clear();
  Vec3 x_pred = trace.start;
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    const double l = loss(SourceEstimate::from_vec(x_pred), stream[k], p);
    acc += l;
    if (period_losses) period_losses->push_back(l);
    x_pred = trace.rows[k].estimate;
  }
  return acc - oracle.value;
}

double min_eigenvalue(const Mat3& h, double symmetry_tol) {
  double scale = 0;
  double defect = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      scale = std::max(scale, std::abs(h[i][j]));
      defect = std::max(defect, std::abs(h[i][j] - h[j][i]));
    }
  if (defect > symmetry_tol * std::max(1.0, scale)) {
    throw AsymmetricInputError("matrix symmetry defect " + std::to_string(defect) +
                               " exceeds tolerance");
  }
  const Mat3 a = symmetrize(h);

  const double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
  if (p1 == 0.0) {
    return std::min({a[0][0], a[1][1], a[2][2]});
  }
  const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
  const double p2 = (a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q) +
                    (a[2][2] - q) * (a[2][2] - q) + 2.0 * p1;
  const double pscale = std::sqrt(p2 / 6.0);
  Mat3 b;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b[i][j] = (a[i][j] - (i == j ? q : 0.0)) / pscale;
  const double detb =
      b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
      b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
      b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
  const double r = std::clamp(detb / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  // eigenvalues: q + 2 pscale cos(phi + 2k pi/3); the k=1 branch is smallest
  return q + 2.0 * pscale * std::cos(phi + 2.0 * 3.14159265358979323846 / 3.0);
}

SecondOrderCertificate check_second_order(const Vec3& x, const Objective& f, double delta,
                                          double iota_hat) {
  if (!(delta > 0) || !(iota_hat > 0)) throw ConfigError("delta and iota must be positive");
  SecondOrderCertificate cert;
  cert.gradient_norm = norm2(f.gradient(x));
  cert.min_eig = min_eigenvalue(f.hessian(x));
  cert.pass = cert.gradient_norm <= delta && cert.min_eig >= -std::sqrt(iota_hat * delta);
  return cert;
}

ErrorBoundReport check_error_bound(const Objective& f, const FeasibleBox& box,
                                   const Vec3& x_candidate, double theta, int samples,
                                   std::uint64_t seed, const PerturbConfig& pc,
                                   const LineSearchConfig& ls, const GridConfig& grid) {
  if (!(theta > 0)) throw ConfigError("theta must be positive");
  if (samples < 1) throw ConfigError("sample count must be >= 1");

  // Step 1: solve a local minimum of the frozen objective from the candidate.
  InitStepOptions opts;
  opts.inf_cap = pc.c / pc.kappa;
  const InitStepResult init = init_step_sizes(f, box, grid, opts);
  Rng rng(seed);
  const EpochResult solved = aptgd_epoch(f, box, project(box, x_candidate), init.eta0, pc, ls, rng);

  // Step 2: mu_hat lower-bounds the smallest Hessian eigenvalue there.
  ErrorBoundReport out;
  out.solved_min = solved.x;
  out.mu_hat = min_eigenvalue(f.hessian(solved.x));
  if (!(out.mu_hat > 0)) {
    throw NotLocallyConvexError("solved point is not a strict local minimum (lambda_min = " +
                                std::to_string(out.mu_hat) + ")");
  }

  // Step 3: sample the mu*theta ball and demand positive definiteness.
  const double radius = out.mu_hat * theta;
  for (int i = 0; i < samples; ++i) {
    const Vec3 y = perturb(solved.x, radius, rng, box);
    const double lmin = min_eigenvalue(f.hessian(y));
    if (!(lmin > 0)) {
      throw NotLocallyConvexError("sampled Hessian not positive definite (lambda_min = " +
                                  std::to_string(lmin) + ")");
    }
  }
  out.holds_with_sampling = norm2(x_candidate - solved.x) <= radius;
  return out;
}

}  // namespace sourcetrace
