// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include "core/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "core/csv.hpp"
#include "core/evaluation.hpp"

namespace sourcetrace {

namespace {

std::string rel_err(double est, double truth) {
  return format_double(std::abs(est - truth) / std::max(1e-300, std::abs(truth)));
}

}  // namespace

std::string regret_csv(const RunTrace& trace, const Stream& stream, const RiverParams& p,
                       const FeasibleBox& box, int window, int oracle_grid, int curve_points,
                       const std::string& manifest) {
  std::vector<double> contribs;
  local_regret(trace, stream, window, p, box, EtaConvention::accepted_at_n, std::nullopt,
               &contribs);

  const std::size_t n = trace.rows.size();
  std::vector<std::size_t> checkpoints;
  const int points = std::max(1, curve_points);
  for (int i = 1; i <= points; ++i) {
    const std::size_t cp = n * static_cast<std::size_t>(i) / static_cast<std::size_t>(points);
    if (cp >= 1 && (checkpoints.empty() || checkpoints.back() != cp)) checkpoints.push_back(cp);
  }

  // Intermediate checkpoints use a coarser oracle; the final point gets the
  // full grid.
  std::vector<double> oracle_values(checkpoints.size());
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const bool last = i + 1 == checkpoints.size();
    const int grid = last ? oracle_grid : std::max(10, oracle_grid / 4);
    const int polish = last ? 200 : 50;
    const Stream prefix(stream.begin(),
                        stream.begin() + static_cast<std::ptrdiff_t>(checkpoints[i]));
    oracle_values[i] = offline_oracle(prefix, box, p, grid, polish).value;
  }

  std::string out;
  out += "# manifest: " + manifest + "\n";
  out += "n,local_contrib,local_regret_cum,loss,loss_cum,oracle_value,cumulative_regret\n";
  double local_cum = 0;
  double loss_cum = 0;
  Vec3 x_pred = trace.start;
  std::size_t next_cp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    local_cum += contribs[k];
    const double l = loss(SourceEstimate::from_vec(x_pred), stream[k], p);
    loss_cum += l;
    x_pred = trace.rows[k].estimate;
    out += std::to_string(k + 1);
    out += "," + format_double(contribs[k]);
    out += "," + format_double(local_cum);
    out += "," + format_double(l);
    out += "," + format_double(loss_cum);
    if (next_cp < checkpoints.size() && checkpoints[next_cp] == k + 1) {
      out += "," + format_double(oracle_values[next_cp]);
      out += "," + format_double(loss_cum - oracle_values[next_cp]);
      ++next_cp;
    } else {
      out += ",,";
    }
    out += '\n';
  }
  return out;
}

void run_bench(const AppConfig& cfg, const std::string& config_text, const std::string& out_dir,
               bool emit_gnuplot) {
  (void)config_text;
  if (!cfg.scenario || !cfg.run) {
    throw ConfigError("bench needs 'scenario' and 'run' config sections");
  }
  std::filesystem::create_directories(out_dir);
  const std::string manifest = manifest_hash(cfg.canonical_json() + ":bench");
  const ScenarioConfig& sc = *cfg.scenario;
  const RunConfig& base_run = *cfg.run;
  const Stream stream = generate_synthetic(sc);
  write_file(out_dir + "/observations.csv", write_observations(stream, manifest));

  const PerturbSection perturb_section = cfg.perturb.value_or(PerturbSection{});
  const PerturbConfig pc =
      assemble_perturb(perturb_section, base_run, stream, sc.river, sc.box);

  const OracleResult oracle =
      offline_oracle(stream, sc.box, sc.river, cfg.bench.oracle_grid, 200);

  const Algorithm algos[] = {Algorithm::tgd, Algorithm::atgd, Algorithm::aptgd, Algorithm::mtgd,
                             Algorithm::mptgd};

  std::string summary;
  summary += "# manifest: " + manifest + "\n";
  summary += "algo,s,l,t,rel_err_s,rel_err_l,rel_err_t,local_regret,cumulative_regret\n";
  std::string budget_csv;
  budget_csv += "# manifest: " + manifest + "\n";
  budget_csv += "algo,inner_step_budget,local_regret\n";

  for (Algorithm algo : algos) {
    RunConfig rc = base_run;
    if (algo == Algorithm::tgd && !rc.fixed_eta) rc.fixed_eta = 10.0;
    const std::optional<PerturbConfig> maybe_pc =
        is_perturbed(algo) ? std::optional<PerturbConfig>(pc) : std::nullopt;
    const RunTrace trace = run_online(algo, stream, sc.box, sc.river, rc, maybe_pc);
    const std::string name = algorithm_name(algo);
    write_file(out_dir + "/trace_" + name + ".csv", write_trace(trace, manifest));
    write_file(out_dir + "/regret_" + name + ".csv",
               regret_csv(trace, stream, sc.river, sc.box, rc.window, cfg.bench.oracle_grid,
                          cfg.bench.curve_points, manifest));

    const Vec3 est = trace.rows.empty() ? trace.start : trace.rows.back().estimate;
    const double lr = local_regret(trace, stream, rc.window, sc.river, sc.box);
    const double cr = cumulative_regret(trace, stream, sc.river, oracle);
    summary += name;
    for (int i = 0; i < 3; ++i) summary += "," + format_double(est[i]);
    summary += "," + rel_err(est[0], sc.true_source.mass);
    summary += "," + rel_err(est[1], sc.true_source.location);
    summary += "," + rel_err(est[2], sc.true_source.release_time);
    summary += "," + format_double(lr);
    summary += "," + format_double(cr);
    summary += "\n";

    // Fixed-budget study: same run with capped inner steps per iteration.
    RunConfig capped = rc;
    capped.max_inner_steps = cfg.bench.fixed_budget;
    const RunTrace capped_trace = run_online(algo, stream, sc.box, sc.river, capped, maybe_pc);
    budget_csv += name + "," + std::to_string(cfg.bench.fixed_budget) + "," +
                  format_double(local_regret(capped_trace, stream, rc.window, sc.river, sc.box)) +
                  "\n";
  }
  write_file(out_dir + "/identification.csv", summary);
  write_file(out_dir + "/fixed_budget.csv", budget_csv);

  // Multi-start sweeps.
  for (Algorithm algo : {Algorithm::mtgd, Algorithm::mptgd}) {
    std::string sweep;
    sweep += "# manifest: " + manifest + "\n";
    sweep += "multi_start,s,l,t,rel_err_s,rel_err_l,rel_err_t,cumulative_regret\n";
    for (int group : cfg.bench.sweep_multi_start) {
      RunConfig rc = base_run;
      rc.multi_start = group;
      const std::optional<PerturbConfig> maybe_pc =
          is_perturbed(algo) ? std::optional<PerturbConfig>(pc) : std::nullopt;
      const RunTrace trace = run_online(algo, stream, sc.box, sc.river, rc, maybe_pc);
      const Vec3 est = trace.rows.empty() ? trace.start : trace.rows.back().estimate;
      sweep += std::to_string(group);
      for (int i = 0; i < 3; ++i) sweep += "," + format_double(est[i]);
      sweep += "," + rel_err(est[0], sc.true_source.mass);
      sweep += "," + rel_err(est[1], sc.true_source.location);
      sweep += "," + rel_err(est[2], sc.true_source.release_time);
      sweep += "," + format_double(cumulative_regret(trace, stream, sc.river, oracle));
      sweep += "\n";
    }
    write_file(out_dir + "/" + algorithm_name(algo) + "_sweep.csv", sweep);
  }

  if (emit_gnuplot) {
    std::string gp;
    gp += "# gnuplot script for the bench outputs; run from this directory\n";
    gp += "set datafile separator ','\n";
    gp += "set key left top\n";
    gp += "set term pngcairo size 900,600\n";
    gp += "set output 'local_regret.png'\n";
    gp += "set xlabel 'n'\nset ylabel 'local regret'\n";
    gp += "plot 'regret_tgd.csv' using 1:3 with lines title 'tgd', \\\n";
    gp += "     'regret_atgd.csv' using 1:3 with lines title 'atgd', \\\n";
    gp += "     'regret_aptgd.csv' using 1:3 with lines title 'aptgd', \\\n";
    gp += "     'regret_mtgd.csv' using 1:3 with lines title 'mtgd', \\\n";
    gp += "     'regret_mptgd.csv' using 1:3 with lines title 'mptgd'\n";
    gp += "set output 'cumulative_regret.png'\n";
    gp += "set ylabel 'cumulative regret'\n";
    gp += "plot 'regret_tgd.csv' using 1:7 with points title 'tgd', \\\n";
    gp += "     'regret_atgd.csv' using 1:7 with points title 'atgd', \\\n";
    gp += "     'regret_aptgd.csv' using 1:7 with points title 'aptgd', \\\n";
    gp += "     'regret_mtgd.csv' using 1:7 with points title 'mtgd', \\\n";
    gp += "     'regret_mptgd.csv' using 1:7 with points title 'mptgd'\n";
    write_file(out_dir + "/plots.gp", gp);
  }
}

}  // namespace sourcetrace
