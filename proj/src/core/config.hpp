// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/optimizers.hpp"
#include "core/sensor_planning.hpp"
#include "core/synthetic.hpp"
#include "core/types.hpp"

namespace sourcetrace {

/// Perturbation inputs as configured; kappa/iota may be left out and
/// estimated from the data at run assembly.
struct PerturbSection {
  double c = 0.5;
  double epsilon = 0.1;
  double delta_f = 0;  // 0: estimate online
  std::optional<double> kappa;
  std::optional<double> iota;
  double epoch_budget_factor = 10.0;
};

struct PlanSection {
  SensorPlanConfig plan;
  Vec3 result_noise_std{0, 0, 0};  // measurement error injected into results
  std::uint64_t seed = 0;
};

struct BenchSection {
  std::vector<int> sweep_multi_start{5, 10, 15, 20, 25, 30};
  std::uint64_t fixed_budget = 3;  // inner steps per iteration in the budget study
  int oracle_grid = 50;
  int curve_points = 10;
};

/// One top-level JSON object with snake_case fields mirroring the config
/// structs, grouped into scenario/run/perturb/plan/bench sections.
struct AppConfig {
  std::optional<ScenarioConfig> scenario;
  std::optional<RunConfig> run;
  std::optional<PerturbSection> perturb;
  std::optional<PlanSection> plan;
  BenchSection bench;
  int threads = 1;

  std::string canonical_json() const;  // sorted-key dump used in manifests
};

/// Parses and validates; unknown keys are rejected. SOURCE_TRACE_SEED
/// overrides every seed field; SOURCE_TRACE_THREADS caps concurrency.
AppConfig parse_config(const std::string& json_text);
AppConfig load_config_file(const std::string& path);

/// Completes a PerturbConfig for a concrete run: missing kappa/iota are
/// estimated from the stream over the box, delta comes from the run
/// tolerance.
PerturbConfig assemble_perturb(const PerturbSection& section, const RunConfig& run,
                               const Stream& stream, const RiverParams& p,
                               const FeasibleBox& box);

}  // namespace sourcetrace
