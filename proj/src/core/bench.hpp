// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "core/config.hpp"

namespace sourcetrace {

/// Runs the full replication suite into out_dir: the synthetic stream, one
/// trace + regret curve per algorithm, an identification summary, the
/// multi-start sweeps, and the fixed-budget comparison. Outputs are
/// byte-deterministic for a fixed config.
void run_bench(const AppConfig& cfg, const std::string& config_text, const std::string& out_dir,
               bool emit_gnuplot);

/// Regret CSV for one trace: per-n local contributions and running sums, with
/// oracle checkpoints for the cumulative curve.
std::string regret_csv(const RunTrace& trace, const Stream& stream, const RiverParams& p,
                       const FeasibleBox& box, int window, int oracle_grid, int curve_points,
                       const std::string& manifest);

}  // namespace sourcetrace
