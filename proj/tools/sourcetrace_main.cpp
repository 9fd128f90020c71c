// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Links only the shared C API.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sourcetrace/sourcetrace.h"

namespace {

int fail_with(int code) {
  std::fprintf(stderr, "error: code=%d: %s\n", code, st_last_error());
  return code;
}

std::string read_text_file(const std::string& path, int* err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    *err = ST_ERR_DATA;
    return {};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  *err = ST_OK;
  return ss.str();
}

struct ObsGuard {
  st_observations* p = nullptr;
  ~ObsGuard() { st_observations_free(p); }
};
struct TraceGuard {
  st_trace* p = nullptr;
  ~TraceGuard() { st_trace_free(p); }
};
struct RegretGuard {
  st_regret* p = nullptr;
  ~RegretGuard() { st_regret_free(p); }
};
struct PlanGuard {
  st_plan* p = nullptr;
  ~PlanGuard() { st_plan_free(p); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"river pollution source identification via online non-convex learning"};
  app.require_subcommand(1);

  std::string config_path, out_path, data_path, trace_path, algo, data_dir, out_dir;
  int oracle_grid = 0;
  bool emit_gnuplot = false;

  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic observation stream");
  simulate->add_option("--config", config_path, "JSON config with a scenario section")
      ->required();
  simulate->add_option("--out", out_path, "output observations CSV")->required();

  CLI::App* identify = app.add_subcommand("identify", "run one online optimizer over a stream");
  identify->add_option("--algo", algo, "tgd|atgd|aptgd|mtgd|mptgd")->required();
  identify->add_option("--config", config_path, "JSON config")->required();
  identify->add_option("--data", data_path, "observations CSV")->required();
  identify->add_option("--trace", trace_path, "output trace CSV")->required();

  CLI::App* regret = app.add_subcommand("regret", "local and cumulative regret curves");
  regret->add_option("--trace", trace_path, "trace CSV")->required();
  regret->add_option("--data", data_path, "observations CSV")->required();
  regret->add_option("--config", config_path, "JSON config")->required();
  regret->add_option("--out", out_path, "output regret CSV")->required();
  regret->add_option("--oracle-grid", oracle_grid, "offline oracle grid density per axis");
  regret->add_flag("--emit-gnuplot", emit_gnuplot, "write a plot script alongside the CSV");

  CLI::App* plan = app.add_subcommand("plan-sensors", "sequential sensor-installation schedule");
  plan->add_option("--config", config_path, "JSON config")->required();
  plan->add_option("--data-dir", data_dir, "directory of observation CSVs")->required();
  plan->add_option("--out", out_path, "output schedule CSV")->required();

  CLI::App* bench = app.add_subcommand("bench", "full replication suite");
  bench->add_option("--config", config_path, "JSON config")->required();
  bench->add_option("--out-dir", out_dir, "output directory")->required();
  bench->add_flag("--emit-gnuplot", emit_gnuplot, "write a plot script into the directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::fprintf(stderr, "error: code=%d: %s\n", ST_ERR_CONFIG, e.what());
    return ST_ERR_CONFIG;
  }

  int err = ST_OK;

  if (simulate->parsed()) {
    const std::string config = read_text_file(config_path, &err);
    if (err) return fail_with(err);
    ObsGuard obs;
    if ((err = st_observations_simulate(config.c_str(), &obs.p))) return fail_with(err);
    if ((err = st_observations_save(obs.p, out_path.c_str()))) return fail_with(err);
    std::printf("wrote %zu observations to %s\n", st_observations_count(obs.p), out_path.c_str());
    return 0;
  }

  if (identify->parsed()) {
    const std::string config = read_text_file(config_path, &err);
    if (err) return fail_with(err);
    ObsGuard obs;
    if ((err = st_observations_load(data_path.c_str(), &obs.p))) return fail_with(err);
    for (size_t i = 0; i < st_observations_warning_count(obs.p); ++i) {
      std::fprintf(stderr, "warning: %s\n", st_observations_warning(obs.p, i));
    }
    TraceGuard trace;
    if ((err = st_identify(algo.c_str(), config.c_str(), obs.p, &trace.p))) {
      return fail_with(err);
    }
    if ((err = st_trace_save(trace.p, trace_path.c_str()))) return fail_with(err);
    const size_t rows = st_trace_rows(trace.p);
    double cols[11] = {0};
    if (rows) st_trace_row(trace.p, rows - 1, cols);
    std::printf("%s: %zu iterations, final estimate (s, l, t) = (%g, %g, %g)\n", algo.c_str(),
                rows, cols[1], cols[2], cols[3]);
    return 0;
  }

  if (regret->parsed()) {
    const std::string config = read_text_file(config_path, &err);
    if (err) return fail_with(err);
    ObsGuard obs;
    if ((err = st_observations_load(data_path.c_str(), &obs.p))) return fail_with(err);
    TraceGuard trace;
    if ((err = st_trace_load(trace_path.c_str(), &trace.p))) return fail_with(err);
    RegretGuard reg;
    if ((err = st_regret_compute(config.c_str(), trace.p, obs.p, oracle_grid, &reg.p))) {
      return fail_with(err);
    }
    if ((err = st_regret_save(reg.p, out_path.c_str(), emit_gnuplot ? 1 : 0))) {
      return fail_with(err);
    }
    double argmin[3] = {0};
    st_regret_oracle_argmin(reg.p, argmin);
    std::printf("local regret %.17g, cumulative regret %.17g "
                "(oracle value %.17g at (%g, %g, %g))\n",
                st_regret_local(reg.p), st_regret_cumulative(reg.p),
                st_regret_oracle_value(reg.p), argmin[0], argmin[1], argmin[2]);
    return 0;
  }

  if (plan->parsed()) {
    const std::string config = read_text_file(config_path, &err);
    if (err) return fail_with(err);
    // pool every observation CSV in the directory
    ObsGuard pooled;
    {
      std::vector<std::string> files;
      for (const auto& entry : std::filesystem::directory_iterator(data_dir)) {
        if (entry.path().extension() == ".csv") files.push_back(entry.path().string());
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) {
        std::fprintf(stderr, "error: code=%d: no .csv files in %s\n", ST_ERR_DATA,
                     data_dir.c_str());
        return ST_ERR_DATA;
      }
      // concatenate by loading each and re-saving into one temp set
      std::string merged;
      for (size_t i = 0; i < files.size(); ++i) {
        const std::string text = read_text_file(files[i], &err);
        if (err) return fail_with(err);
        if (i == 0) {
          merged = text;
        } else {
          // append data rows only
          std::istringstream in(text);
          std::string line;
          bool past_header = false;
          while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            if (!past_header) {
              past_header = true;
              continue;
            }
            merged += line + "\n";
          }
        }
      }
      const std::string tmp = out_path + ".pooled.tmp.csv";
      std::ofstream(tmp, std::ios::binary) << merged;
      err = st_observations_load(tmp.c_str(), &pooled.p);
      std::filesystem::remove(tmp);
      if (err) return fail_with(err);
    }
    PlanGuard schedule;
    if ((err = st_plan_sensors(config.c_str(), pooled.p, &schedule.p))) return fail_with(err);
    if ((err = st_plan_save(schedule.p, out_path.c_str()))) return fail_with(err);
    int final_count = 0;
    const size_t rounds = st_plan_rounds(schedule.p);
    if (rounds) st_plan_count(schedule.p, rounds - 1, &final_count);
    std::printf("%zu rounds, final required sensors %d, converged=%d\n", rounds, final_count,
                st_plan_converged(schedule.p));
    return 0;
  }

  if (bench->parsed()) {
    const std::string config = read_text_file(config_path, &err);
    if (err) return fail_with(err);
    if ((err = st_bench(config.c_str(), out_dir.c_str(), emit_gnuplot ? 1 : 0))) {
      return fail_with(err);
    }
    std::printf("bench outputs written to %s\n", out_dir.c_str());
    return 0;
  }

  return ST_ERR_CONFIG;
}
