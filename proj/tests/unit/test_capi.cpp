// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "sourcetrace/sourcetrace.h"

namespace {

const char* kConfig = R"json({
  "scenario": {
    "river": {"cross_section_area": 60, "dispersion": 2430, "velocity": 80, "decay": 1e-8},
    "true_source": {"mass": 1300, "location": -22106, "release_time": -215},
    "sensor_locations": [0, 3000],
    "schedule": {"start_min": 60, "step_min": 2, "count": 12},
    "noise": {"type": "relative_gaussian", "std": 0.01},
    "seed": 21,
    "box": {"mass_range": [1, 3000], "location_range": [-40000, -1000], "time_range": [-500, 0]}
  },
  "run": {"window": 1, "tolerance": 1e-4, "multi_start": 2, "seed": 3},
  "bench": {"sweep_multi_start": [2], "fixed_budget": 2, "oracle_grid": 12, "curve_points": 3}
})json";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("sourcetrace_capi_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("the C surface drives simulate, identify, regret and bench end to end") {
  TempDir tmp;

  double c = 0;
  REQUIRE(st_ade_concentration(1300, -22106, -215, 0, 100, 60, 2430, 80, 1e-8, &c) == ST_OK);
  CHECK(c == doctest::Approx(3.064706648630677e-4).epsilon(1e-12));
  CHECK(st_ade_concentration(1, 0, 100, 0, 100, 60, 2430, 80, 1e-8, &c) == ST_ERR_NUMERIC);
  CHECK(std::string(st_last_error()).find("elapsed") != std::string::npos);

  st_observations* obs = nullptr;
  REQUIRE(st_observations_simulate(kConfig, &obs) == ST_OK);
  CHECK(st_observations_count(obs) == 24);
  const auto obs_path = (tmp.path / "obs.csv").string();
  REQUIRE(st_observations_save(obs, obs_path.c_str()) == ST_OK);

  st_observations* loaded = nullptr;
  REQUIRE(st_observations_load(obs_path.c_str(), &loaded) == ST_OK);
  CHECK(st_observations_count(loaded) == 24);
  int sensor = -1;
  double loc = 0, t = 0, conc = 0;
  REQUIRE(st_observations_get(loaded, 0, &sensor, &loc, &t, &conc) == ST_OK);
  CHECK(sensor == 0);
  CHECK(t == 60.0);

  st_trace* trace = nullptr;
  REQUIRE(st_identify("atgd", kConfig, loaded, &trace) == ST_OK);
  CHECK(st_trace_rows(trace) == 24);
  const auto trace_path = (tmp.path / "trace.csv").string();
  REQUIRE(st_trace_save(trace, trace_path.c_str()) == ST_OK);

  st_trace* trace2 = nullptr;
  REQUIRE(st_trace_load(trace_path.c_str(), &trace2) == ST_OK);
  CHECK(st_trace_rows(trace2) == 24);
  double row[11] = {0};
  REQUIRE(st_trace_row(trace2, 23, row) == ST_OK);
  CHECK(row[0] == 24.0);

  st_regret* reg = nullptr;
  REQUIRE(st_regret_compute(kConfig, trace2, loaded, 10, &reg) == ST_OK);
  CHECK(st_regret_local(reg) >= 0.0);
  const auto regret_path = (tmp.path / "regret.csv").string();
  REQUIRE(st_regret_save(reg, regret_path.c_str(), 1) == ST_OK);
  CHECK(std::filesystem::exists(regret_path));
  CHECK(std::filesystem::exists(regret_path + ".gp"));

  // unknown algorithm surfaces as a config error with a message
  st_trace* bad = nullptr;
  CHECK(st_identify("sgd", kConfig, loaded, &bad) == ST_ERR_CONFIG);
  CHECK(std::string(st_last_error()).find("sgd") != std::string::npos);

  st_regret_free(reg);
  st_trace_free(trace2);
  st_trace_free(trace);
  st_observations_free(loaded);
  st_observations_free(obs);
}

TEST_CASE("bench reruns are byte-identical") {
  TempDir tmp;
  const auto dir_a = (tmp.path / "a").string();
  const auto dir_b = (tmp.path / "b").string();
  REQUIRE(st_bench(kConfig, dir_a.c_str(), 0) == ST_OK);
  REQUIRE(st_bench(kConfig, dir_b.c_str(), 0) == ST_OK);

  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
    const auto name = entry.path().filename();
    CAPTURE(name.string());
    REQUIRE(std::filesystem::exists(std::filesystem::path(dir_b) / name));
    CHECK(slurp(entry.path()) == slurp(std::filesystem::path(dir_b) / name));
    ++compared;
  }
  CHECK(compared >= 10);  // observations, five traces, five regrets, summaries
}
