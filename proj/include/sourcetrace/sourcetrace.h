/* Copyright 2026 the sourcetrace authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the river pollution source identification toolkit: synthetic
 * stream generation from the closed-form advection-dispersion model, the
 * online optimizer family (tgd/atgd/aptgd/mtgd/mptgd), regret evaluation
 * against an offline oracle, sequential sensor-installation planning, and the
 * replication benchmark.
 *
 * Conventions: every function returns an int status (ST_OK on success);
 * results come back through opaque handles that must be released with the
 * matching _free call. st_last_error() describes the most recent failure on
 * the calling thread. Configs are JSON strings with scenario/run/perturb/
 * plan/bench sections; observation and trace files are CSV.
 */
#ifndef SOURCETRACE_H
#define SOURCETRACE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  ST_OK = 0,
  ST_ERR_INVALID = 1,
  ST_ERR_CONFIG = 2,
  ST_ERR_DATA = 3,
  ST_ERR_NUMERIC = 4
};

/* Message for the most recent error on this thread; empty string if none. */
const char* st_last_error(void);

const char* st_version(void);

typedef struct st_observations st_observations;
typedef struct st_trace st_trace;
typedef struct st_regret st_regret;
typedef struct st_plan st_plan;

/* ---- forward model ---- */

/* Predicted concentration for a candidate source at one sensor sampling.
 * Fails with ST_ERR_NUMERIC when the elapsed time is below the guard. */
int st_ade_concentration(double mass, double location, double release_time,
                         double sensor_location, double sample_time, double cross_section_area,
                         double dispersion, double velocity, double decay, double* out);

/* ---- observation streams ---- */

int st_observations_simulate(const char* config_json, st_observations** out);
int st_observations_load(const char* path, st_observations** out);
int st_observations_save(const st_observations* obs, const char* path);
size_t st_observations_count(const st_observations* obs);
int st_observations_get(const st_observations* obs, size_t index, int* sensor_id,
                        double* location_m, double* time_min, double* concentration);
/* Number of load warnings (e.g. negative concentrations), and access to each. */
size_t st_observations_warning_count(const st_observations* obs);
const char* st_observations_warning(const st_observations* obs, size_t index);
void st_observations_free(st_observations* obs);

/* ---- identification runs ---- */

/* algo: "tgd" | "atgd" | "aptgd" | "mtgd" | "mptgd". */
int st_identify(const char* algo, const char* config_json, const st_observations* obs,
                st_trace** out);
int st_trace_save(const st_trace* trace, const char* path);
int st_trace_load(const char* path, st_trace** out);
size_t st_trace_rows(const st_trace* trace);
/* columns: n,s,l,t,eta_s,eta_l,eta_t,inner_steps,grad_calls,loss,local_contrib */
int st_trace_row(const st_trace* trace, size_t index, double out_columns[11]);
void st_trace_free(st_trace* trace);

/* ---- regret evaluation ---- */

int st_regret_compute(const char* config_json, const st_trace* trace,
                      const st_observations* obs, int oracle_grid, st_regret** out);
double st_regret_local(const st_regret* r);
double st_regret_cumulative(const st_regret* r);
double st_regret_oracle_value(const st_regret* r);
int st_regret_oracle_argmin(const st_regret* r, double out_slt[3]);
/* Writes the per-iteration regret curve CSV; optionally a gnuplot script
 * alongside it. */
int st_regret_save(const st_regret* r, const char* csv_path, int emit_gnuplot);
void st_regret_free(st_regret* r);

/* ---- sequential sensor installation ---- */

/* Observations are split by sensor_id into per-sensor streams; the run
 * section configures the per-round identification algorithm. */
int st_plan_sensors(const char* config_json, const st_observations* obs, st_plan** out);
size_t st_plan_rounds(const st_plan* plan);
int st_plan_count(const st_plan* plan, size_t round, int* required_sensors);
int st_plan_converged(const st_plan* plan);
int st_plan_save(const st_plan* plan, const char* path);
void st_plan_free(st_plan* plan);

/* ---- replication benchmark ---- */

int st_bench(const char* config_json, const char* out_dir, int emit_gnuplot);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SOURCETRACE_H */
