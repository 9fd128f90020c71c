// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include "core/optimizers.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "core/ade_model.hpp"

namespace sourcetrace {

namespace {

constexpr std::uint64_t kHardEpochCap = 50'000'000;
constexpr double kZeroGradientGuard = 1e-12;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void check_finite(const Vec3& x, std::int64_t step) {
  if (!all_finite(x)) {
    throw NonFiniteIterateError("iterate became non-finite at inner step " +
                                std::to_string(step));
  }
}

}  // namespace

Algorithm parse_algorithm(const std::string& name) {
  if (name == "tgd") return Algorithm::tgd;
  if (name == "atgd") return Algorithm::atgd;
  if (name == "aptgd") return Algorithm::aptgd;
  if (name == "mtgd") return Algorithm::mtgd;
  if (name == "mptgd") return Algorithm::mptgd;
  throw ConfigError("unknown algorithm '" + name + "'");
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::tgd: return "tgd";
    case Algorithm::atgd: return "atgd";
    case Algorithm::aptgd: return "aptgd";
    case Algorithm::mtgd: return "mtgd";
    case Algorithm::mptgd: return "mptgd";
  }
  return "?";
}

bool is_multistart(Algorithm a) { return a == Algorithm::mtgd || a == Algorithm::mptgd; }
bool is_perturbed(Algorithm a) { return a == Algorithm::aptgd || a == Algorithm::mptgd; }

std::uint64_t PerturbConfig::epoch_budget() const {
  const double per_escape = static_cast<double>(t_thres);
  const double escapes = f_thres > 0 ? std::max(1.0, delta_f / f_thres) : 1.0;
  const double cap = epoch_budget_factor * per_escape * escapes;
  if (!(cap > 0) || cap > 1e18) return kHardEpochCap;
  return std::max<std::uint64_t>(static_cast<std::uint64_t>(cap),
                                 10u * static_cast<std::uint64_t>(t_thres + 1));
}

PerturbConfig aptgd_params(double c, double epsilon, double delta, double delta_f, double kappa,
                           double iota) {
  if (!(c > 0 && c <= 1)) throw ConfigError("perturbation constant c must be in (0, 1]");
  if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("failure probability must be in (0, 1)");
  if (!(delta > 0) || !(kappa > 0) || !(iota > 0) || delta_f < 0) {
    throw ConfigError("aptgd parameters must be positive");
  }
  PerturbConfig pc;
  pc.c = c;
  pc.epsilon = epsilon;
  pc.delta = delta;
  pc.delta_f = delta_f;
  pc.kappa = kappa;
  pc.iota = iota;
  const double log_term =
      std::log(pc.dimension * kappa * delta_f / (c * delta * delta * epsilon));
  pc.chi = 3.0 * std::max(log_term, 4.0);
  const double chi2 = pc.chi * pc.chi;
  pc.radius = (std::sqrt(c) / chi2) * (delta / kappa);
  pc.g_thres = (std::sqrt(c) / chi2) * delta;
  pc.f_thres = (c / (chi2 * pc.chi)) * std::sqrt(delta * delta * delta / iota);
  pc.t_thres = static_cast<std::int64_t>(
      std::ceil((pc.chi / (c * c)) * (kappa / std::sqrt(iota * delta))));
  pc.t_noise_init = -pc.t_thres - 1;
  return pc;
}

Vec3 perturb(const Vec3& x, double r, Rng& rng) {
  if (!(r > 0)) throw ConfigError("perturbation radius must be positive");
  Vec3 g{rng.gaussian(), rng.gaussian(), rng.gaussian()};
  double n = norm2(g);
  while (n == 0) {  // probability zero, but keep the draw well defined
    g = {rng.gaussian(), rng.gaussian(), rng.gaussian()};
    n = norm2(g);
  }
  const double radius = r * std::cbrt(rng.uniform01());
  return x + (radius / n) * g;
}

Vec3 perturb(const Vec3& x, double r, Rng& rng, const FeasibleBox& box) {
  return project(box, perturb(x, r, rng));
}

// ---------------------------------------------------------------------------
// Epoch solvers

namespace {

// x - eta (*) pg is identically the projection of the full step; using the
// projected point directly avoids a second rounding through the divide.
struct PgStep {
  Vec3 stepped;
  Vec3 pg;
};

PgStep pg_step(const Vec3& g, const Vec3& x, const StepVector& eta, const FeasibleBox& box) {
  PgStep s;
  s.stepped = project(box, x - hadamard(eta.eta, g));
  s.pg = ediv(x - s.stepped, eta.eta);
  return s;
}

}  // namespace

EpochResult tgd_epoch(const Objective& f, const FeasibleBox& box, Vec3 x, double eta_scalar,
                      double threshold, std::uint64_t max_steps, bool record) {
  if (!(eta_scalar > 0)) throw ConfigError("tgd step size must be positive");
  EpochResult out;
  const StepVector eta{{eta_scalar, eta_scalar, eta_scalar}};
  out.eta_accepted = eta;
  if (record) out.values.push_back(f.value(x));
  while (true) {
    const Vec3 g = f.gradient(x);
    const PgStep s = pg_step(g, x, eta, box);
    if (norm2(s.pg) <= threshold) break;
    if (max_steps && static_cast<std::uint64_t>(out.steps) >= max_steps) break;
    if (static_cast<std::uint64_t>(out.steps) >= kHardEpochCap) {
      throw EpochBudgetError("tgd epoch exceeded the hard step cap");
    }
    check_finite(s.stepped, out.steps);
    if (s.stepped == x) {
      throw LineSearchStalledError("tgd update stalled below double precision");
    }
    x = s.stepped;
    ++out.steps;
    if (record) out.values.push_back(f.value(x));
  }
  out.x = x;
  return out;
}

EpochResult atgd_epoch(const Objective& f, const FeasibleBox& box, Vec3 x,
                       const StepVector& eta0, double delta, const LineSearchConfig& ls,
                       std::uint64_t max_steps, bool record) {
  EpochResult out;
  StepVector eta = eta0;
  if (record) out.values.push_back(f.value(x));
  while (true) {
    const Vec3 g = f.gradient(x);
    if (norm2(projected_gradient(g, x, eta, box)) <= delta) break;
    if (max_steps && static_cast<std::uint64_t>(out.steps) >= max_steps) break;
    if (static_cast<std::uint64_t>(out.steps) >= kHardEpochCap) {
      throw EpochBudgetError("atgd epoch exceeded the hard step cap");
    }
    eta = line_search(f, x, g, eta0, box, ls).eta;
    const PgStep s = pg_step(g, x, eta, box);
    check_finite(s.stepped, out.steps);
    if (s.stepped == x && norm2(s.pg) > kZeroGradientGuard) {
      throw LineSearchStalledError("atgd update stalled below double precision");
    }
    x = s.stepped;
    ++out.steps;
    if (record) out.values.push_back(f.value(x));
  }
  out.x = x;
  out.eta_accepted = eta;
  return out;
}

EpochResult aptgd_epoch(const Objective& f, const FeasibleBox& box, Vec3 x,
                        const StepVector& eta0, const PerturbConfig& pc,
                        const LineSearchConfig& ls, Rng& rng, std::uint64_t max_steps,
                        bool record) {
  EpochResult out;
  StepVector eta = eta0;
  std::int64_t t_noise = pc.t_noise_init;
  Vec3 x_tilde{0, 0, 0};
  double f_tilde = 0;
  const std::uint64_t budget = pc.epoch_budget();
  if (record) out.values.push_back(f.value(x));

  for (std::int64_t t = 0;; ++t) {
    if (max_steps) {
      if (static_cast<std::uint64_t>(t) >= max_steps) break;  // budget-study mode
      if (static_cast<std::uint64_t>(t) >= kHardEpochCap) {
        throw EpochBudgetError("aptgd epoch exceeded the hard step cap");
      }
    } else if (static_cast<std::uint64_t>(t) >= budget) {
      throw EpochBudgetError("aptgd epoch exceeded its iteration budget (" +
                             std::to_string(budget) + ")");
    }
    Vec3 g = f.gradient(x);
    eta = line_search(f, x, g, eta0, box, ls).eta;
    PgStep s = pg_step(g, x, eta, box);

    if (norm2(s.pg) <= pc.g_thres && t - t_noise > pc.t_thres) {
      t_noise = t;
      x_tilde = x;
      f_tilde = f.value(x);
      x = perturb(x, pc.radius, rng, box);
      ++out.perturbations;
      // the perturbed point gets a fresh step size and gradient
      g = f.gradient(x);
      eta = line_search(f, x, g, eta0, box, ls).eta;
      s = pg_step(g, x, eta, box);
    }
    if (t - t_noise == pc.t_thres) {
      const double f_now = f.value(x);
      EscapeEvent ev;
      ev.perturb_step = t_noise;
      ev.value_before = f_tilde;
      ev.value_at_check = f_now;
      ev.escaped = !(f_now - f_tilde > -pc.f_thres);
      out.escape_events.push_back(ev);
      if (!ev.escaped) {
        x = x_tilde;  // escape failed: the pre-perturbation point is the answer
        out.failed_escape_return = true;
        break;
      }
    }
    check_finite(s.stepped, t);
    x = s.stepped;
    ++out.steps;
    if (record) out.values.push_back(f.value(x));
  }
  out.x = x;
  out.eta_accepted = eta;
  return out;
}

// ---------------------------------------------------------------------------
// Online drivers

void validate_box_for_stream(const FeasibleBox& box, const Stream& stream) {
  if (!box.valid()) throw ConfigError("invalid feasible box");
  for (const Observation& o : stream) {
    if (box.hi[2] > o.sample_time - kElapsedTimeGuardMin) {
      throw ConfigError(
          "feasible release-time upper bound violates the elapsed-time guard for a sample at t=" +
          std::to_string(o.sample_time));
    }
  }
}

namespace {

Vec3 draw_start(const FeasibleBox& box, std::uint64_t path_seed) {
  Rng rng(path_seed);
  Vec3 x;
  for (int i = 0; i < 3; ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
  return x;
}

struct PathState {
  Vec3 x{0, 0, 0};
  Rng rng{0};
};

RunTrace run_engine(Algorithm algo, const Stream& stream, const FeasibleBox& box,
                    const RiverParams& p, const RunConfig& cfg,
                    const std::optional<PerturbConfig>& pc_in) {
  if (!cfg.valid()) throw ConfigError("invalid run config");
  if (!p.valid()) throw ConfigError("invalid river parameters");
  validate_box_for_stream(box, stream);
  if (algo == Algorithm::tgd && !cfg.fixed_eta) {
    throw ConfigError("tgd requires fixed_eta");
  }
  if (is_perturbed(algo)) {
    if (!pc_in) throw ConfigError(algorithm_name(algo) + " requires perturbation parameters");
    if (!(pc_in->kappa > 0) || !(pc_in->iota > 0)) {
      throw ConfigError("perturbation parameters need positive kappa and iota");
    }
  }

  const int paths = is_multistart(algo) ? cfg.multi_start : 1;
  std::vector<PathState> states(static_cast<std::size_t>(paths));
  for (int i = 0; i < paths; ++i) {
    const std::uint64_t ps = Rng::split(cfg.seed, static_cast<std::uint64_t>(i));
    states[static_cast<std::size_t>(i)].rng = Rng(ps);
    states[static_cast<std::size_t>(i)].x =
        (i == 0 && cfg.start) ? project(box, *cfg.start) : draw_start(box, ps);
  }

  RunTrace trace;
  trace.algo = algorithm_name(algo);
  trace.seed = cfg.seed;
  trace.config = cfg;
  trace.start = states[0].x;

  LossHistory history(p, cfg.window);
  const WindowObjective objective(history);
  double delta_f_running = 0;

  Vec3 selected = trace.start;
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const double t0 = now_seconds();
    const Observation& obs = stream[k];
    const std::int64_t n = static_cast<std::int64_t>(k) + 1;
    history.append(obs);

    TraceRow row;
    row.n = n;
    try {
      row.loss = loss(SourceEstimate::from_vec(selected), obs, p);
    } catch (const ElapsedTimeError&) {
      row.loss = std::numeric_limits<double>::infinity();
    }

    // Per-epoch setup: step sizes shared across paths; for perturbed variants
    // the thresholds are refreshed when delta_f is estimated online.
    PerturbConfig pc;
    InitStepOptions step_opts;
    step_opts.scale = cfg.scale;
    step_opts.scaling = cfg.modulus_scaling;
    if (is_perturbed(algo)) {
      pc = *pc_in;
      if (pc.delta_f <= 0) {
        delta_f_running = std::max(delta_f_running, objective.value(selected));
        pc = aptgd_params(pc_in->c, pc_in->epsilon, cfg.tolerance,
                          std::max(1.5 * delta_f_running, 1e-300), pc_in->kappa, pc_in->iota);
        pc.epoch_budget_factor = pc_in->epoch_budget_factor;
      }
      step_opts.inf_cap = pc.c / pc.kappa;
    }
    InitStepResult init;
    if (algo != Algorithm::tgd) {
      init = init_step_sizes(objective, box, cfg.grid, step_opts);
    }

    std::vector<EpochResult> results(states.size());
    auto run_path = [&](std::size_t i) {
      PathState& st = states[i];
      try {
        switch (algo) {
          case Algorithm::tgd:
            results[i] = tgd_epoch(objective, box, st.x, *cfg.fixed_eta,
                                   cfg.tolerance / cfg.window, cfg.max_inner_steps,
                                   cfg.record_inner);
            break;
          case Algorithm::atgd:
          case Algorithm::mtgd:
            results[i] = atgd_epoch(objective, box, st.x, init.eta0, cfg.tolerance,
                                    cfg.line_search, cfg.max_inner_steps, cfg.record_inner);
            break;
          case Algorithm::aptgd:
          case Algorithm::mptgd:
            results[i] = aptgd_epoch(objective, box, st.x, init.eta0, pc, cfg.line_search,
                                     st.rng, cfg.max_inner_steps, cfg.record_inner);
            break;
        }
      } catch (const LineSearchStalledError& e) {
        throw LineSearchStalledError("iteration " + std::to_string(n) + ", path " +
                                     std::to_string(i) + ": " + e.what());
      } catch (const NonFiniteIterateError& e) {
        throw NonFiniteIterateError("iteration " + std::to_string(n) + ", path " +
                                    std::to_string(i) + ": " + e.what());
      } catch (const EpochBudgetError& e) {
        throw EpochBudgetError("iteration " + std::to_string(n) + ", path " +
                               std::to_string(i) + ": " + e.what());
      }
      st.x = results[i].x;
    };
    // Paths are independent (own state and rng; the shared history is
    // read-only during epochs), so chunking them over threads keeps the
    // results bit-identical to the sequential order.
    const int workers = std::min<int>(cfg.threads, static_cast<int>(states.size()));
    if (workers > 1) {
      std::vector<std::thread> pool;
      std::atomic<std::size_t> cursor{0};
      std::mutex err_mutex;
      std::exception_ptr first_error;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= states.size()) break;
            try {
              run_path(i);
            } catch (...) {
              const std::lock_guard<std::mutex> lock(err_mutex);
              if (!first_error) first_error = std::current_exception();
            }
          }
        });
      }
      for (auto& t : pool) t.join();
      if (first_error) std::rethrow_exception(first_error);
    } else {
      for (std::size_t i = 0; i < states.size(); ++i) run_path(i);
    }

    // Selection: argmin of the recorded score over everything seen so far,
    // ties to the lowest path index. Trivial for a single path.
    std::size_t winner = 0;
    if (states.size() > 1) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < states.size(); ++i) {
        const double s = history.selection_score(SourceEstimate::from_vec(states[i].x),
                                                 cfg.selection_mean_of_squares);
        if (s < best) {
          best = s;
          winner = i;
        }
      }
    }

    const EpochResult& win = results[winner];
    row.estimate = win.x;
    row.eta = win.eta_accepted.eta;
    for (const EpochResult& r : results) row.inner_steps += r.steps;
    row.perturbations = win.perturbations;
    row.escape_failed_return = win.failed_escape_return;
    if (cfg.record_inner) row.inner_values = win.values;

    // Local-regret contribution of the selected sequence at this period:
    // ||pg of F^n at x^n|| with this row's accepted step.
    const Vec3 g_pred = objective.gradient(selected);
    const StepVector eta_row{row.eta};
    const double pgn = norm2(projected_gradient(g_pred, project(box, selected), eta_row, box));
    row.local_contrib = pgn * pgn;

    row.gradient_calls = history.gradient_calls();
    row.wall_seconds = now_seconds() - t0;
    trace.rows.push_back(std::move(row));
    selected = win.x;
  }
  return trace;
}

}  // namespace

RunTrace run_tgd(const Stream& stream, const FeasibleBox& box, const RiverParams& p,
                 const RunConfig& cfg) {
  return run_engine(Algorithm::tgd, stream, box, p, cfg, std::nullopt);
}

RunTrace run_atgd(const Stream& stream, const FeasibleBox& box, const RiverParams& p,
                  const RunConfig& cfg) {
  return run_engine(Algorithm::atgd, stream, box, p, cfg, std::nullopt);
}

RunTrace run_aptgd(const Stream& stream, const FeasibleBox& box, const RiverParams& p,
                   const RunConfig& cfg, const PerturbConfig& pc) {
  return run_engine(Algorithm::aptgd, stream, box, p, cfg, pc);
}

RunTrace run_multistart(Algorithm variant, const Stream& stream, const FeasibleBox& box,
                        const RiverParams& p, const RunConfig& cfg,
                        const std::optional<PerturbConfig>& pc) {
  if (!is_multistart(variant)) throw ConfigError("run_multistart expects mtgd or mptgd");
  return run_engine(variant, stream, box, p, cfg, pc);
}

RunTrace run_online(Algorithm algo, const Stream& stream, const FeasibleBox& box,
                    const RiverParams& p, const RunConfig& cfg,
                    const std::optional<PerturbConfig>& pc) {
  return run_engine(algo, stream, box, p, cfg, pc);
}

}  // namespace sourcetrace
