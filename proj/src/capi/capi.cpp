// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include "sourcetrace/sourcetrace.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <string>

#include "core/ade_model.hpp"
#include "core/bench.hpp"
#include "core/config.hpp"
#include "core/csv.hpp"
#include "core/evaluation.hpp"
#include "core/optimizers.hpp"
#include "core/rng.hpp"
#include "core/sensor_planning.hpp"
#include "core/synthetic.hpp"

using namespace sourcetrace;

namespace {

thread_local std::string g_last_error;

int set_error(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ST_OK;
  } catch (const Error& e) {
    return set_error(static_cast<int>(e.code()), e.what());
  } catch (const std::exception& e) {
    return set_error(ST_ERR_INVALID, e.what());
  }
}

}  // namespace

struct st_observations {
  Stream obs;
  std::string manifest;
  std::vector<std::string> warnings;
};

struct st_trace {
  RunTrace trace;
  std::string manifest;
};

struct st_regret {
  RegretReport report;
  std::string curve_csv;
};

struct st_plan {
  PlanSchedule plan;
  std::string manifest;
};

extern "C" {

const char* st_last_error(void) { return g_last_error.c_str(); }

const char* st_version(void) { return "0.1.0"; }

int st_ade_concentration(double mass, double location, double release_time,
                         double sensor_location, double sample_time, double cross_section_area,
                         double dispersion, double velocity, double decay, double* out) {
  return guarded([&] {
    if (!out) throw Error(Errc::invalid, "null output pointer");
    const RiverParams p{cross_section_area, dispersion, velocity, decay};
    if (!p.valid()) throw ConfigError("invalid river parameters");
    *out = ade_concentration(SourceEstimate{mass, location, release_time}, sensor_location,
                             sample_time, p);
  });
}

int st_observations_simulate(const char* config_json, st_observations** out) {
  return guarded([&] {
    if (!config_json || !out) throw Error(Errc::invalid, "null argument");
    const AppConfig cfg = parse_config(config_json);
    if (!cfg.scenario) throw ConfigError("simulate needs a 'scenario' section");
    auto handle = std::make_unique<st_observations>();
    handle->obs = generate_synthetic(*cfg.scenario);
    handle->manifest = manifest_hash(cfg.canonical_json() + ":simulate");
    *out = handle.release();
  });
}

int st_observations_load(const char* path, st_observations** out) {
  return guarded([&] {
    if (!path || !out) throw Error(Errc::invalid, "null argument");
    const LoadedObservations loaded = load_observations(read_file(path));
    auto handle = std::make_unique<st_observations>();
    handle->obs = loaded.observations;
    handle->manifest = loaded.manifest;
    handle->warnings = loaded.warnings;
    *out = handle.release();
  });
}

int st_observations_save(const st_observations* obs, const char* path) {
  return guarded([&] {
    if (!obs || !path) throw Error(Errc::invalid, "null argument");
    write_file(path, write_observations(obs->obs, obs->manifest));
  });
}

size_t st_observations_count(const st_observations* obs) { return obs ? obs->obs.size() : 0; }

int st_observations_get(const st_observations* obs, size_t index, int* sensor_id,
                        double* location_m, double* time_min, double* concentration) {
  return guarded([&] {
    if (!obs || index >= obs->obs.size()) throw Error(Errc::invalid, "index out of range");
    const Observation& o = obs->obs[index];
    if (sensor_id) *sensor_id = o.sensor_id;
    if (location_m) *location_m = o.sensor_location;
    if (time_min) *time_min = o.sample_time;
    if (concentration) *concentration = o.concentration;
  });
}

size_t st_observations_warning_count(const st_observations* obs) {
  return obs ? obs->warnings.size() : 0;
}

const char* st_observations_warning(const st_observations* obs, size_t index) {
  if (!obs || index >= obs->warnings.size()) return "";
  return obs->warnings[index].c_str();
}

void st_observations_free(st_observations* obs) { delete obs; }

int st_identify(const char* algo, const char* config_json, const st_observations* obs,
                st_trace** out) {
  return guarded([&] {
    if (!algo || !config_json || !obs || !out) throw Error(Errc::invalid, "null argument");
    const Algorithm a = parse_algorithm(algo);
    const AppConfig cfg = parse_config(config_json);
    if (!cfg.run) throw ConfigError("identify needs a 'run' section");
    if (!cfg.scenario) throw ConfigError("identify needs a 'scenario' section (river and box)");
    const RiverParams& p = cfg.scenario->river;
    const FeasibleBox& box = cfg.scenario->box;

    std::optional<PerturbConfig> pc;
    if (is_perturbed(a)) {
      pc = assemble_perturb(cfg.perturb.value_or(PerturbSection{}), *cfg.run, obs->obs, p, box);
    }
    auto handle = std::make_unique<st_trace>();
    handle->trace = run_online(a, obs->obs, box, p, *cfg.run, pc);
    handle->manifest = manifest_hash(cfg.canonical_json() + ":identify:" + algo + ":" +
                                     manifest_hash(write_observations(obs->obs, "")));
    *out = handle.release();
  });
}

int st_trace_save(const st_trace* trace, const char* path) {
  return guarded([&] {
    if (!trace || !path) throw Error(Errc::invalid, "null argument");
    write_file(path, write_trace(trace->trace, trace->manifest));
  });
}

int st_trace_load(const char* path, st_trace** out) {
  return guarded([&] {
    if (!path || !out) throw Error(Errc::invalid, "null argument");
    const LoadedTrace loaded = load_trace(read_file(path));
    auto handle = std::make_unique<st_trace>();
    handle->trace = loaded.trace;
    handle->manifest = loaded.manifest;
    *out = handle.release();
  });
}

size_t st_trace_rows(const st_trace* trace) { return trace ? trace->trace.rows.size() : 0; }

int st_trace_row(const st_trace* trace, size_t index, double out_columns[11]) {
  return guarded([&] {
    if (!trace || !out_columns || index >= trace->trace.rows.size()) {
      throw Error(Errc::invalid, "index out of range");
    }
    const TraceRow& r = trace->trace.rows[index];
    out_columns[0] = static_cast<double>(r.n);
    for (int i = 0; i < 3; ++i) out_columns[1 + i] = r.estimate[i];
    for (int i = 0; i < 3; ++i) out_columns[4 + i] = r.eta[i];
    out_columns[7] = static_cast<double>(r.inner_steps);
    out_columns[8] = static_cast<double>(r.gradient_calls);
    out_columns[9] = r.loss;
    out_columns[10] = r.local_contrib;
  });
}

void st_trace_free(st_trace* trace) { delete trace; }

int st_regret_compute(const char* config_json, const st_trace* trace, const st_observations* obs,
                      int oracle_grid, st_regret** out) {
  return guarded([&] {
    if (!config_json || !trace || !obs || !out) throw Error(Errc::invalid, "null argument");
    const AppConfig cfg = parse_config(config_json);
    if (!cfg.run || !cfg.scenario) {
      throw ConfigError("regret needs 'run' and 'scenario' sections");
    }
    const RiverParams& p = cfg.scenario->river;
    const FeasibleBox& box = cfg.scenario->box;
    const int grid = oracle_grid > 0 ? oracle_grid : cfg.bench.oracle_grid;

    auto handle = std::make_unique<st_regret>();
    RegretReport& rep = handle->report;
    rep.local_regret = local_regret(trace->trace, obs->obs, cfg.run->window, p, box,
                                    EtaConvention::accepted_at_n, std::nullopt,
                                    &rep.local_contributions);
    const OracleResult oracle = offline_oracle(obs->obs, box, p, grid, 200);
    rep.oracle_value = oracle.value;
    rep.oracle_argmin = oracle.argmin;
    rep.cumulative_regret =
        cumulative_regret(trace->trace, obs->obs, p, oracle, &rep.period_losses);
    const std::string manifest =
        manifest_hash(cfg.canonical_json() + ":regret:" +
                      manifest_hash(write_observations(obs->obs, "")));
    handle->curve_csv = regret_csv(trace->trace, obs->obs, p, box, cfg.run->window, grid,
                                   cfg.bench.curve_points, manifest);
    *out = handle.release();
  });
}

double st_regret_local(const st_regret* r) { return r ? r->report.local_regret : 0; }
double st_regret_cumulative(const st_regret* r) { return r ? r->report.cumulative_regret : 0; }
double st_regret_oracle_value(const st_regret* r) { return r ? r->report.oracle_value : 0; }

int st_regret_oracle_argmin(const st_regret* r, double out_slt[3]) {
  return guarded([&] {
    if (!r || !out_slt) throw Error(Errc::invalid, "null argument");
    out_slt[0] = r->report.oracle_argmin.mass;
    out_slt[1] = r->report.oracle_argmin.location;
    out_slt[2] = r->report.oracle_argmin.release_time;
  });
}

int st_regret_save(const st_regret* r, const char* csv_path, int emit_gnuplot) {
  return guarded([&] {
    if (!r || !csv_path) throw Error(Errc::invalid, "null argument");
    write_file(csv_path, r->curve_csv);
    if (emit_gnuplot) {
      const std::string path(csv_path);
      std::string gp;
      gp += "set datafile separator ','\n";
      gp += "set term pngcairo size 900,600\n";
      gp += "set xlabel 'n'\n";
      gp += "set output 'local_regret.png'\n";
      gp += "plot '" + path + "' using 1:3 with lines title 'local regret'\n";
      gp += "set output 'cumulative_regret.png'\n";
      gp += "plot '" + path + "' using 1:7 with points title 'cumulative regret'\n";
      write_file(path + ".gp", gp);
    }
  });
}

void st_regret_free(st_regret* r) { delete r; }

int st_plan_sensors(const char* config_json, const st_observations* obs, st_plan** out) {
  return guarded([&] {
    if (!config_json || !obs || !out) throw Error(Errc::invalid, "null argument");
    const AppConfig cfg = parse_config(config_json);
    if (!cfg.plan || !cfg.run || !cfg.scenario) {
      throw ConfigError("plan-sensors needs 'plan', 'run' and 'scenario' sections");
    }
    const PlanSection& section = *cfg.plan;
    const RiverParams p = cfg.scenario->river;
    const FeasibleBox box = cfg.scenario->box;
    const RunConfig run = *cfg.run;

    // Split the pooled observations into per-sensor streams by sensor_id,
    // preserving order.
    std::vector<Stream> streams;
    std::vector<int> ids;
    for (const Observation& o : obs->obs) {
      std::size_t idx = 0;
      for (; idx < ids.size(); ++idx) {
        if (ids[idx] == o.sensor_id) break;
      }
      if (idx == ids.size()) {
        ids.push_back(o.sensor_id);
        streams.emplace_back();
      }
      streams[idx].push_back(o);
    }

    const Vec3 noise_std = section.result_noise_std;
    const std::uint64_t seed = section.seed;
    const IdentifyRunner runner = [&](int round, int sensor,
                                      std::span<const Observation> round_data) {
      RunConfig rc = run;
      rc.multi_start = 1;
      rc.record_inner = false;
      rc.seed = Rng::split(run.seed, static_cast<std::uint64_t>(round) * 1000003ull +
                                         static_cast<std::uint64_t>(sensor));
      const Stream slice(round_data.begin(), round_data.end());
      const RunTrace t = run_atgd(slice, box, p, rc);
      Vec3 est = t.rows.empty() ? t.start : t.rows.back().estimate;
      // measurement error injected into the identification result
      Rng noise(Rng::split(Rng::split(seed, static_cast<std::uint64_t>(round)),
                           static_cast<std::uint64_t>(sensor)));
      for (int d = 0; d < 3; ++d) {
        if (noise_std[d] > 0) est[d] += noise_std[d] * noise.gaussian();
      }
      return SourceEstimate::from_vec(est);
    };

    auto handle = std::make_unique<st_plan>();
    handle->plan = plan_sensors(streams, section.plan, runner);
    handle->manifest = manifest_hash(cfg.canonical_json() + ":plan:" +
                                     manifest_hash(write_observations(obs->obs, "")));
    *out = handle.release();
  });
}

size_t st_plan_rounds(const st_plan* plan) { return plan ? plan->plan.counts.size() : 0; }

int st_plan_count(const st_plan* plan, size_t round, int* required_sensors) {
  return guarded([&] {
    if (!plan || !required_sensors || round >= plan->plan.counts.size()) {
      throw Error(Errc::invalid, "index out of range");
    }
    *required_sensors = plan->plan.counts[round];
  });
}

int st_plan_converged(const st_plan* plan) { return plan && plan->plan.converged ? 1 : 0; }

int st_plan_save(const st_plan* plan, const char* path) {
  return guarded([&] {
    if (!plan || !path) throw Error(Errc::invalid, "null argument");
    std::string out;
    out += "# manifest: " + plan->manifest + "\n";
    out += "round,required_sensors,required_raw,pool_exhausted,min_record_s,min_record_l,min_record_t\n";
    for (std::size_t i = 0; i < plan->plan.rounds.size(); ++i) {
      const RoundRecord& r = plan->plan.rounds[i];
      auto min_of = [](const std::vector<int>& v) {
        int m = v.empty() ? 0 : v.front();
        for (int x : v) m = std::min(m, x);
        return m;
      };
      out += std::to_string(i + 1);
      out += "," + std::to_string(r.required);
      out += "," + std::to_string(r.required_raw);
      out += "," + std::to_string(r.pool_exhausted ? 1 : 0);
      out += "," + std::to_string(min_of(r.record_mass));
      out += "," + std::to_string(min_of(r.record_location));
      out += "," + std::to_string(min_of(r.record_time));
      out += "\n";
    }
    write_file(path, out);
  });
}

void st_plan_free(st_plan* plan) { delete plan; }

int st_bench(const char* config_json, const char* out_dir, int emit_gnuplot) {
  return guarded([&] {
    if (!config_json || !out_dir) throw Error(Errc::invalid, "null argument");
    const AppConfig cfg = parse_config(config_json);
    run_bench(cfg, config_json, out_dir, emit_gnuplot != 0);
  });
}

}  // extern "C"
