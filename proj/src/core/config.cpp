// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include "core/config.hpp"

#include <cstdlib>
#include <set>

#include <json.hpp>

#include "core/csv.hpp"
#include "core/step_control.hpp"

namespace sourcetrace {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void expect_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) fail(where + ": unknown key '" + key + "'");
  }
}

double get_num(const json& j, const std::string& where, const std::string& key,
               std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(where + ": missing '" + key + "'");
  }
  if (!j[key].is_number()) fail(where + ": '" + key + "' must be a number");
  return j[key].get<double>();
}

Vec3 get_vec3(const json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3) {
    fail(where + ": '" + key + "' must be an array of three numbers");
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = j[key][static_cast<std::size_t>(i)].get<double>();
  return v;
}

std::array<double, 2> get_range(const json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2) {
    fail(where + ": '" + key + "' must be a [lo, hi] pair");
  }
  return {j[key][0].get<double>(), j[key][1].get<double>()};
}

FeasibleBox parse_box(const json& j, const std::string& where) {
  expect_keys(j, where, {"mass_range", "location_range", "time_range"});
  const auto s = get_range(j, where, "mass_range");
  const auto l = get_range(j, where, "location_range");
  const auto t = get_range(j, where, "time_range");
  FeasibleBox box;
  box.lo = {s[0], l[0], t[0]};
  box.hi = {s[1], l[1], t[1]};
  if (!box.valid()) fail(where + ": box bounds must satisfy lo <= hi");
  return box;
}

ScenarioConfig parse_scenario(const json& j) {
  expect_keys(j, "scenario",
              {"river", "true_source", "sensor_locations", "schedule", "noise", "seed", "box"});
  ScenarioConfig sc;
  {
    const json& r = j.at("river");
    expect_keys(r, "scenario.river", {"cross_section_area", "dispersion", "velocity", "decay"});
    sc.river.cross_section_area = get_num(r, "scenario.river", "cross_section_area");
    sc.river.dispersion = get_num(r, "scenario.river", "dispersion");
    sc.river.velocity = get_num(r, "scenario.river", "velocity");
    sc.river.decay = get_num(r, "scenario.river", "decay");
  }
  {
    const json& t = j.at("true_source");
    expect_keys(t, "scenario.true_source", {"mass", "location", "release_time"});
    sc.true_source.mass = get_num(t, "scenario.true_source", "mass");
    sc.true_source.location = get_num(t, "scenario.true_source", "location");
    sc.true_source.release_time = get_num(t, "scenario.true_source", "release_time");
  }
  if (!j.contains("sensor_locations") || !j["sensor_locations"].is_array()) {
    fail("scenario: 'sensor_locations' must be an array");
  }
  for (const auto& v : j["sensor_locations"]) sc.sensor_locations.push_back(v.get<double>());
  {
    const json& s = j.at("schedule");
    expect_keys(s, "scenario.schedule", {"start_min", "step_min", "count"});
    sc.schedule.start = get_num(s, "scenario.schedule", "start_min");
    sc.schedule.step = get_num(s, "scenario.schedule", "step_min");
    sc.schedule.count = static_cast<int>(get_num(s, "scenario.schedule", "count"));
  }
  if (j.contains("noise")) {
    const json& n = j["noise"];
    expect_keys(n, "scenario.noise", {"type", "std"});
    const std::string type = n.value("type", "none");
    if (type == "none") {
      sc.noise.kind = NoiseModel::Kind::none;
    } else if (type == "gaussian") {
      sc.noise.kind = NoiseModel::Kind::gaussian;
    } else if (type == "relative_gaussian") {
      sc.noise.kind = NoiseModel::Kind::relative_gaussian;
    } else {
      fail("scenario.noise: unknown type '" + type + "'");
    }
    sc.noise.stddev = get_num(n, "scenario.noise", "std", 0.0);
  }
  sc.seed = static_cast<std::uint64_t>(get_num(j, "scenario", "seed", 0.0));
  sc.box = parse_box(j.at("box"), "scenario.box");
  sc.validate();
  return sc;
}

RunConfig parse_run(const json& j) {
  expect_keys(j, "run",
              {"window", "tolerance", "multi_start", "seed", "fixed_eta", "start", "line_search",
               "grid", "scale", "max_inner_steps", "selection_mean_of_squares",
               "modulus_scaling", "record_inner"});
  RunConfig rc;
  rc.window = static_cast<int>(get_num(j, "run", "window", 1.0));
  rc.tolerance = get_num(j, "run", "tolerance");
  rc.multi_start = static_cast<int>(get_num(j, "run", "multi_start", 1.0));
  rc.seed = static_cast<std::uint64_t>(get_num(j, "run", "seed", 0.0));
  if (j.contains("fixed_eta")) rc.fixed_eta = get_num(j, "run", "fixed_eta");
  if (j.contains("start")) rc.start = get_vec3(j, "run", "start");
  if (j.contains("line_search")) {
    const json& ls = j["line_search"];
    expect_keys(ls, "run.line_search", {"armijo_beta", "shrink", "max_shrinks", "classic_armijo"});
    rc.line_search.armijo_beta = get_num(ls, "run.line_search", "armijo_beta", 8e-6);
    if (ls.contains("shrink")) rc.line_search.shrink = get_vec3(ls, "run.line_search", "shrink");
    rc.line_search.max_shrinks =
        static_cast<int>(get_num(ls, "run.line_search", "max_shrinks", 60.0));
    rc.line_search.classic_armijo = ls.value("classic_armijo", false);
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    expect_keys(g, "run.grid", {"points_per_axis", "modulus_floor"});
    rc.grid.points_per_axis = static_cast<int>(get_num(g, "run.grid", "points_per_axis", 5.0));
    rc.grid.modulus_floor = get_num(g, "run.grid", "modulus_floor", 1e-30);
  }
  rc.scale = get_num(j, "run", "scale", 100.0);
  rc.max_inner_steps = static_cast<std::uint64_t>(get_num(j, "run", "max_inner_steps", 0.0));
  rc.selection_mean_of_squares = j.value("selection_mean_of_squares", false);
  if (j.contains("modulus_scaling")) {
    const std::string m = j["modulus_scaling"].get<std::string>();
    if (m == "inverse") {
      rc.modulus_scaling = ModulusScaling::inverse;
    } else if (m == "direct") {
      rc.modulus_scaling = ModulusScaling::direct;
    } else {
      fail("run.modulus_scaling must be 'inverse' or 'direct'");
    }
  }
  rc.record_inner = j.value("record_inner", false);
  if (!rc.valid()) fail("run: invalid values");
  return rc;
}

PerturbSection parse_perturb(const json& j) {
  expect_keys(j, "perturb", {"c", "epsilon", "delta_f", "kappa", "iota", "epoch_budget_factor"});
  PerturbSection ps;
  ps.c = get_num(j, "perturb", "c", 0.5);
  ps.epsilon = get_num(j, "perturb", "epsilon", 0.1);
  ps.delta_f = get_num(j, "perturb", "delta_f", 0.0);
  if (j.contains("kappa")) ps.kappa = get_num(j, "perturb", "kappa");
  if (j.contains("iota")) ps.iota = get_num(j, "perturb", "iota");
  ps.epoch_budget_factor = get_num(j, "perturb", "epoch_budget_factor", 10.0);
  return ps;
}

PlanSection parse_plan(const json& j) {
  expect_keys(j, "plan",
              {"alpha", "widths", "round_length", "initial_sensors", "max_sensors",
               "result_noise_std", "seed"});
  PlanSection ps;
  ps.plan.alpha = get_num(j, "plan", "alpha", 0.05);
  ps.plan.widths = get_vec3(j, "plan", "widths");
  ps.plan.round_length = static_cast<int>(get_num(j, "plan", "round_length", 10.0));
  ps.plan.initial_sensors = static_cast<int>(get_num(j, "plan", "initial_sensors", 2.0));
  ps.plan.max_sensors = static_cast<int>(get_num(j, "plan", "max_sensors"));
  if (j.contains("result_noise_std")) ps.result_noise_std = get_vec3(j, "plan", "result_noise_std");
  ps.seed = static_cast<std::uint64_t>(get_num(j, "plan", "seed", 0.0));
  if (!ps.plan.valid()) fail("plan: invalid values");
  return ps;
}

BenchSection parse_bench(const json& j) {
  expect_keys(j, "bench", {"sweep_multi_start", "fixed_budget", "oracle_grid", "curve_points"});
  BenchSection b;
  if (j.contains("sweep_multi_start")) {
    b.sweep_multi_start.clear();
    for (const auto& v : j["sweep_multi_start"]) b.sweep_multi_start.push_back(v.get<int>());
  }
  b.fixed_budget = static_cast<std::uint64_t>(get_num(j, "bench", "fixed_budget", 3.0));
  b.oracle_grid = static_cast<int>(get_num(j, "bench", "oracle_grid", 50.0));
  b.curve_points = static_cast<int>(get_num(j, "bench", "curve_points", 10.0));
  return b;
}

json box_json(const FeasibleBox& b) {
  return json{{"mass_range", {b.lo[0], b.hi[0]}},
              {"location_range", {b.lo[1], b.hi[1]}},
              {"time_range", {b.lo[2], b.hi[2]}}};
}

}  // namespace

std::string AppConfig::canonical_json() const {
  json j;
  if (scenario) {
    const ScenarioConfig& sc = *scenario;
    json n;
    switch (sc.noise.kind) {
      case NoiseModel::Kind::none: n["type"] = "none"; break;
      case NoiseModel::Kind::gaussian: n["type"] = "gaussian"; break;
      case NoiseModel::Kind::relative_gaussian: n["type"] = "relative_gaussian"; break;
    }
    n["std"] = sc.noise.stddev;
    j["scenario"] = json{
        {"river",
         {{"cross_section_area", sc.river.cross_section_area},
          {"dispersion", sc.river.dispersion},
          {"velocity", sc.river.velocity},
          {"decay", sc.river.decay}}},
        {"true_source",
         {{"mass", sc.true_source.mass},
          {"location", sc.true_source.location},
          {"release_time", sc.true_source.release_time}}},
        {"sensor_locations", sc.sensor_locations},
        {"schedule",
         {{"start_min", sc.schedule.start}, {"step_min", sc.schedule.step},
          {"count", sc.schedule.count}}},
        {"noise", n},
        {"seed", sc.seed},
        {"box", box_json(sc.box)}};
  }
  if (run) {
    const RunConfig& rc = *run;
    json r{{"window", rc.window},
           {"tolerance", rc.tolerance},
           {"multi_start", rc.multi_start},
           {"seed", rc.seed},
           {"line_search",
            {{"armijo_beta", rc.line_search.armijo_beta},
             {"shrink", rc.line_search.shrink},
             {"max_shrinks", rc.line_search.max_shrinks},
             {"classic_armijo", rc.line_search.classic_armijo}}},
           {"grid",
            {{"points_per_axis", rc.grid.points_per_axis},
             {"modulus_floor", rc.grid.modulus_floor}}},
           {"scale", rc.scale},
           {"max_inner_steps", rc.max_inner_steps},
           {"selection_mean_of_squares", rc.selection_mean_of_squares},
           {"modulus_scaling",
            rc.modulus_scaling == ModulusScaling::inverse ? "inverse" : "direct"},
           {"record_inner", rc.record_inner}};
    if (rc.fixed_eta) r["fixed_eta"] = *rc.fixed_eta;
    if (rc.start) r["start"] = *rc.start;
    j["run"] = r;
  }
  if (perturb) {
    json p{{"c", perturb->c},
           {"epsilon", perturb->epsilon},
           {"delta_f", perturb->delta_f},
           {"epoch_budget_factor", perturb->epoch_budget_factor}};
    if (perturb->kappa) p["kappa"] = *perturb->kappa;
    if (perturb->iota) p["iota"] = *perturb->iota;
    j["perturb"] = p;
  }
  if (plan) {
    j["plan"] = json{{"alpha", plan->plan.alpha},
                     {"widths", plan->plan.widths},
                     {"round_length", plan->plan.round_length},
                     {"initial_sensors", plan->plan.initial_sensors},
                     {"max_sensors", plan->plan.max_sensors},
                     {"result_noise_std", plan->result_noise_std},
                     {"seed", plan->seed}};
  }
  j["bench"] = json{{"sweep_multi_start", bench.sweep_multi_start},
                    {"fixed_budget", bench.fixed_budget},
                    {"oracle_grid", bench.oracle_grid},
                    {"curve_points", bench.curve_points}};
  return j.dump();
}

AppConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  expect_keys(j, "config", {"scenario", "run", "perturb", "plan", "bench"});
  AppConfig cfg;
  if (j.contains("scenario")) cfg.scenario = parse_scenario(j["scenario"]);
  if (j.contains("run")) cfg.run = parse_run(j["run"]);
  if (j.contains("perturb")) cfg.perturb = parse_perturb(j["perturb"]);
  if (j.contains("plan")) cfg.plan = parse_plan(j["plan"]);
  if (j.contains("bench")) cfg.bench = parse_bench(j["bench"]);

  if (const char* seed_env = std::getenv("SOURCE_TRACE_SEED")) {
    char* end = nullptr;
    const unsigned long long s = std::strtoull(seed_env, &end, 10);
    if (end == seed_env || *end != '\0') throw ConfigError("SOURCE_TRACE_SEED is not an integer");
    if (cfg.scenario) cfg.scenario->seed = s;
    if (cfg.run) cfg.run->seed = s;
    if (cfg.plan) cfg.plan->seed = s;
  }
  if (const char* thr_env = std::getenv("SOURCE_TRACE_THREADS")) {
    char* end = nullptr;
    const long t = std::strtol(thr_env, &end, 10);
    if (end == thr_env || *end != '\0' || t < 1) {
      throw ConfigError("SOURCE_TRACE_THREADS must be a positive integer");
    }
    cfg.threads = static_cast<int>(t);
  }
  if (cfg.run) cfg.run->threads = cfg.threads;
  return cfg;
}

AppConfig load_config_file(const std::string& path) { return parse_config(read_file(path)); }

PerturbConfig assemble_perturb(const PerturbSection& section, const RunConfig& run,
                               const Stream& stream, const RiverParams& p,
                               const FeasibleBox& box) {
  double kappa = section.kappa.value_or(0.0);
  double iota = section.iota.value_or(0.0);
  if (!(kappa > 0) || !(iota > 0)) {
    const SmoothnessConstants sm = estimate_smoothness_constants(stream, p, box);
    if (!(kappa > 0)) kappa = sm.lipschitz_loss;
    if (!(iota > 0)) iota = sm.lipschitz_hessian;
  }
  const double delta_f = section.delta_f > 0 ? section.delta_f : 1e-300;  // refreshed online
  PerturbConfig pc =
      aptgd_params(section.c, section.epsilon, run.tolerance, delta_f, kappa, iota);
  if (!(section.delta_f > 0)) pc.delta_f = 0;  // signal the online estimator
  pc.epoch_budget_factor = section.epoch_budget_factor;
  return pc;
}

}  // namespace sourcetrace
