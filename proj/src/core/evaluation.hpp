// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "core/geometry.hpp"
#include "core/objective.hpp"
#include "core/optimizers.hpp"
#include "core/types.hpp"

namespace sourcetrace {

/// Which eta enters the local-regret norm when steps adapt. The default uses
/// each iteration's accepted step as recorded in the trace.
enum class EtaConvention { accepted_at_n, certificate_of_x, fixed_reference };

struct RegretReport {
  double local_regret = 0;
  double cumulative_regret = 0;
  std::vector<double> local_contributions;  // per iteration, >= 0
  std::vector<double> period_losses;        // Psi^n(x^n)
  double oracle_value = 0;                  // upper bound on the offline infimum
  SourceEstimate oracle_argmin;
};

/// Recomputes the per-iteration squared projected-gradient norms of the
/// selected sequence against the stream and sums them. Contributions are
/// returned through the report vector.
double local_regret(const RunTrace& trace, const Stream& stream, int window,
                    const RiverParams& p, const FeasibleBox& box,
                    EtaConvention convention = EtaConvention::accepted_at_n,
                    std::optional<Vec3> fixed_eta = std::nullopt,
                    std::vector<double>* contributions = nullptr);

struct OracleResult {
  SourceEstimate argmin;
  double value = 0;  // an upper bound on the true infimum of the summed loss
};

/// Dense-grid scan of the summed loss over a stream prefix followed by
/// projected-gradient polish from the best cells.
OracleResult offline_oracle(const Stream& prefix, const FeasibleBox& box, const RiverParams& p,
                            int grid_density = 50, int polish_steps = 200,
                            int polish_starts = 10);

/// Sum of per-period losses of the trace's predictions minus the oracle value
/// on the same prefix.
double cumulative_regret(const RunTrace& trace, const Stream& stream, const RiverParams& p,
                         const OracleResult& oracle,
                         std::vector<double>* period_losses = nullptr);

/// Smallest eigenvalue of a symmetric 3x3 matrix, closed form. Throws
/// AsymmetricInputError when the symmetry defect exceeds tolerance.
double min_eigenvalue(const Mat3& h, double symmetry_tol = 1e-8);

struct SecondOrderCertificate {
  double gradient_norm = 0;
  double min_eig = 0;
  bool pass = false;
};

/// Checks ||grad F(x)|| <= delta and lambda_min(hess F(x)) >= -sqrt(iota_hat *
/// delta).
SecondOrderCertificate check_second_order(const Vec3& x, const Objective& f, double delta,
                                          double iota_hat);

/// Strict-saddle thresholds; delta := min(theta, tau^2/iota) feeds the
/// perturbed-descent certification.
struct SaddleParams {
  double theta = 0;
  double tau_strict = 0;
  double zeta = 0;
  double mu = 0;

  bool valid() const { return theta > 0 && tau_strict > 0 && mu > 0 && zeta >= 0; }
  double delta(double iota) const { return std::min(theta, tau_strict * tau_strict / iota); }
};

struct ErrorBoundReport {
  double mu_hat = 0;
  bool holds_with_sampling = false;
  Vec3 solved_min{0, 0, 0};
};

/// Local error-bound check: solves a local minimum of the frozen objective
/// with the perturbed-descent epoch, takes mu_hat = lambda_min of the Hessian
/// there, samples the mu_hat*theta ball for positive definiteness, and tests
/// whether the candidate lies inside that ball. Throws NotLocallyConvexError
/// when the solved point or any sampled point fails positive definiteness.
ErrorBoundReport check_error_bound(const Objective& f, const FeasibleBox& box,
                                   const Vec3& x_candidate, double theta, int samples,
                                   std::uint64_t seed, const PerturbConfig& pc,
                                   const LineSearchConfig& ls, const GridConfig& grid);

/// Objective view of an unaveraged loss sum over a fixed set of observations
/// (realizes the offline infimum's target).
class SumLossObjective final : public Objective {
 public:
  SumLossObjective(const Stream& obs, const RiverParams& p) : obs_(&obs), p_(p) {}

  double value(const Vec3& x) const override;
  Vec3 gradient(const Vec3& x) const override;
  Mat3 hessian(const Vec3& x) const override;

 private:
  const Stream* obs_;
  RiverParams p_;
};

}  // namespace sourcetrace
