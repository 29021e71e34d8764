#include "arcvc/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "arcvc/errors.hpp"
#include "arcvc/metrics.hpp"
#include "arcvc/rng.hpp"

namespace arcvc {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  return f;
}

void write_run_csv(const std::string& path, const TrainResult& result,
                   std::size_t window) {
  auto f = open_out(path);
  f << "# schema=arcvc-run-v1\n";
  f << "episode,total_reward,b0,violation,success,sample_risk,reference,wall_ms\n";
  for (const auto& r : result.records) {
    f << r.episode << ',' << fmt(r.total_reward) << ',' << fmt(r.b0) << ','
      << (r.violation ? 1 : 0) << ',' << (r.success ? 1 : 0) << ','
      << fmt(r.sample_risk) << ',' << fmt(r.reference) << ',' << fmt(r.wall_ms)
      << '\n';
  }
  const std::size_t w = std::min(window, result.records.size());
  if (w > 0) {
    f << "# summary window=" << w
      << " violation_rate=" << fmt(violation_rate(result.records, w))
      << " success_rate=" << fmt(success_rate(result.records, w)) << '\n';
  }
  if (result.failed) f << "# failed reason=" << result.fail_reason << '\n';
}

GridWorldConfig grid_for_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  GridWorldConfig g = cfg.grid;
  g.layout_seed = derive_seed(seed, "layout");
  return g;
}

struct RunSummary {
  std::uint64_t seed = 0;
  double violation = 0.0;
  double success = 0.0;
  double mean_return = 0.0;
  bool failed = false;
};

RunSummary summarize_run(std::uint64_t seed, const TrainResult& result,
                         std::size_t window) {
  RunSummary s;
  s.seed = seed;
  s.failed = result.failed;
  if (!result.records.empty()) {
    const std::size_t w = std::min(window, result.records.size());
    s.violation = violation_rate(result.records, w);
    s.success = success_rate(result.records, w);
    double sum = 0.0;
    for (const auto& r : result.records) sum += r.total_reward;
    s.mean_return = sum / result.records.size();
  }
  return s;
}

}  // namespace

void parallel_for(int n_tasks, int workers, const std::function<void(int)>& fn) {
  if (n_tasks <= 0) return;
  workers = std::max(1, std::min(workers, n_tasks));
  if (workers == 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_tasks) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

ExperimentOutcome run_risk_comparison(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  fs::create_directories(cfg.out_dir + "/runs");
  const auto& kinds = cfg.comparison_kinds;
  const int n_seeds = static_cast<int>(cfg.seeds.size());
  const int n_tasks = static_cast<int>(kinds.size()) * n_seeds;

  std::vector<RunSummary> summaries(static_cast<std::size_t>(n_tasks));
  std::atomic<bool> diverged{false};
  parallel_for(n_tasks, cfg.workers, [&](int i) {
    const std::string& kind = kinds[static_cast<std::size_t>(i / n_seeds)];
    const std::uint64_t seed = cfg.seeds[static_cast<std::size_t>(i % n_seeds)];
    GridWorld env(grid_for_seed(cfg, seed));
    ArcvcConfig tcfg = cfg.train;
    tcfg.risk = make_risk_spec(cfg, kind);
    tcfg.seed = seed;
    const auto result = train(tcfg, env);
    if (result.failed) diverged = true;
    summaries[static_cast<std::size_t>(i)] = summarize_run(seed, result, cfg.window);
    write_run_csv(cfg.out_dir + "/runs/risk_comparison_" + kind + "_seed" +
                      std::to_string(seed) + ".csv",
                  result, cfg.window);
  });

  const std::string path = cfg.out_dir + "/risk_comparison.csv";
  auto f = open_out(path);
  f << "# schema=arcvc-risk-comparison-v1\n";
  f << "row_type,kind,seed,violation_rate,success_rate,mean_return,"
       "violation_se,success_se,failed\n";
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    for (int s = 0; s < n_seeds; ++s) {
      const auto& r = summaries[k * n_seeds + s];
      f << "run," << kinds[k] << ',' << r.seed << ',' << fmt(r.violation) << ','
        << fmt(r.success) << ',' << fmt(r.mean_return) << ",,,"
        << (r.failed ? 1 : 0) << '\n';
    }
  }
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    std::vector<double> viol, succ;
    for (int s = 0; s < n_seeds; ++s) {
      const auto& r = summaries[k * n_seeds + s];
      if (r.failed) continue;
      viol.push_back(r.violation);
      succ.push_back(r.success);
    }
    const auto v = summarize(viol);
    const auto u = summarize(succ);
    f << "summary," << kinds[k] << ",," << fmt(v.mean) << ',' << fmt(u.mean)
      << ",," << fmt(v.stderr) << ',' << fmt(u.stderr) << ",0\n";
  }
  ExperimentOutcome out;
  out.files.push_back(path);
  if (diverged) out.exit_code = 2;
  return out;
}

ExperimentOutcome run_reference_study(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const int n_repeats = static_cast<int>(cfg.seeds.size());
  const int n_tasks = static_cast<int>(cfg.gammas.size()) * n_repeats;

  struct Row {
    double gamma = 0.0;
    int repeat = 0;
    EpsilonBarSample eps;
    bool failed = false;
  };
  std::vector<Row> rows(static_cast<std::size_t>(n_tasks));
  std::atomic<bool> diverged{false};
  parallel_for(n_tasks, cfg.workers, [&](int i) {
    const double gamma = cfg.gammas[static_cast<std::size_t>(i / n_repeats)];
    const int repeat = i % n_repeats;
    const std::uint64_t seed = cfg.seeds[static_cast<std::size_t>(repeat)];
    GridWorld env(grid_for_seed(cfg, seed));
    ArcvcConfig tcfg = cfg.train;
    tcfg.gamma = gamma;
    tcfg.seed = seed;
    auto& row = rows[static_cast<std::size_t>(i)];
    row.gamma = gamma;
    row.repeat = repeat;
    const auto result = train(tcfg, env);
    if (result.failed) {
      diverged = true;
      row.failed = true;
      return;
    }
    EpsilonBarConfig ecfg;
    ecfg.gamma = gamma;
    ecfg.horizon = tcfg.tau;
    ecfg.stationary_steps = cfg.eval_stationary_steps;
    ecfg.n_states = cfg.eval_states;
    ecfg.n_episodes = cfg.eval_episodes;
    auto eval_rng = rng_stream(seed, "epsilon_bar");
    row.eps = epsilon_bar(env, *result.actor, tcfg.risk.f, ecfg, eval_rng);
  });

  const std::string path = cfg.out_dir + "/reference_study.csv";
  auto f = open_out(path);
  f << "# schema=arcvc-reference-study-v1\n";
  f << "row_type,gamma,repeat,eps_global,eps_state,eps_bar,eps_bar_se,failed\n";
  for (const auto& r : rows) {
    f << "run," << fmt(r.gamma) << ',' << r.repeat << ',' << fmt(r.eps.eps_global)
      << ',' << fmt(r.eps.eps_state) << ',' << fmt(r.eps.eps_bar) << ",,"
      << (r.failed ? 1 : 0) << '\n';
  }
  for (std::size_t g = 0; g < cfg.gammas.size(); ++g) {
    std::vector<double> vals;
    for (int rpt = 0; rpt < n_repeats; ++rpt) {
      const auto& r = rows[g * n_repeats + rpt];
      if (!r.failed) vals.push_back(r.eps.eps_bar);
    }
    const auto s = summarize(vals);
    f << "summary," << fmt(cfg.gammas[g]) << ",,,," << fmt(s.mean) << ','
      << fmt(s.stderr) << ",0\n";
  }
  ExperimentOutcome out;
  out.files.push_back(path);
  if (diverged) out.exit_code = 2;
  return out;
}

ExperimentOutcome run_penalty_study(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  fs::create_directories(cfg.out_dir + "/checkpoints");
  const int n_layouts = static_cast<int>(cfg.seeds.size());
  const int n_tasks = 2 * n_layouts;
  const PenaltyKind arms[2] = {PenaltyKind::sample_based, PenaltyKind::risk_network};

  std::vector<TrainResult> results(static_cast<std::size_t>(n_tasks));
  std::atomic<bool> diverged{false};
  parallel_for(n_tasks, cfg.workers, [&](int i) {
    const PenaltyKind pm = arms[i / n_layouts];
    const std::uint64_t seed = cfg.seeds[static_cast<std::size_t>(i % n_layouts)];
    GridWorld env(grid_for_seed(cfg, seed));  // matched layout across arms
    ArcvcConfig tcfg = cfg.train;
    tcfg.penalty = pm;
    tcfg.seed = seed;  // matched training seed across arms
    CheckpointSink sink;
    sink.directory = cfg.out_dir + "/checkpoints";
    sink.prefix = std::string("penalty_") + to_string(pm) + "_seed" + std::to_string(seed);
    results[static_cast<std::size_t>(i)] = train(tcfg, env, sink);
    if (results[static_cast<std::size_t>(i)].failed) diverged = true;
  });

  const std::string path = cfg.out_dir + "/penalty_study.csv";
  auto f = open_out(path);
  f << "# schema=arcvc-penalty-study-v1\n";
  f << "layout_seed,arm,episode,reward,accumulated_reward,violation,"
       "running_violation_rate\n";
  for (int a = 0; a < 2; ++a) {
    for (int l = 0; l < n_layouts; ++l) {
      const auto& result = results[static_cast<std::size_t>(a * n_layouts + l)];
      const std::uint64_t seed = cfg.seeds[static_cast<std::size_t>(l)];
      double acc = 0.0;
      int violations = 0;
      for (std::size_t e = 0; e < result.records.size(); ++e) {
        const auto& r = result.records[e];
        acc += r.total_reward;
        violations += r.violation ? 1 : 0;
        f << seed << ',' << to_string(arms[a]) << ',' << r.episode << ','
          << fmt(r.total_reward) << ',' << fmt(acc) << ',' << (r.violation ? 1 : 0)
          << ',' << fmt(static_cast<double>(violations) / (e + 1)) << '\n';
      }
    }
  }
  ExperimentOutcome out;
  out.files.push_back(path);
  if (diverged) out.exit_code = 2;
  return out;
}

ExperimentOutcome run_shaping(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  auto rng = rng_stream(cfg.seeds.front(), "shaping");

  std::vector<ShapingSample> samples;
  if (cfg.shaping_synthetic) {
    // Planted-model mode: z spread around c, y from the model plus noise.
    std::uniform_real_distribution<double> zdist(cfg.synthetic_c - 4.0,
                                                 cfg.synthetic_c + 4.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    samples.reserve(static_cast<std::size_t>(cfg.synthetic_n));
    for (int i = 0; i < cfg.synthetic_n; ++i) {
      const double z = zdist(rng);
      double y = shaped_model(cfg.synthetic_b, cfg.synthetic_c, z);
      if (cfg.synthetic_noise > 0.0) y += cfg.synthetic_noise * noise(rng);
      samples.push_back({z, y, 0});
    }
  } else {
    samples = collect_shaping_samples(cfg.shaping, rng);
  }

  const std::string samples_path = cfg.out_dir + "/shaping_samples.csv";
  {
    auto f = open_out(samples_path);
    write_samples_csv(samples, f);
  }
  ExperimentOutcome out;
  out.files.push_back(samples_path);
  try {
    const auto fit = fit_shaped_model(samples);
    const std::string fit_path = cfg.out_dir + "/shaping_fit.csv";
    auto f = open_out(fit_path);
    write_fit_csv(fit, f);
    out.files.push_back(fit_path);
  } catch (const FitError&) {
    out.exit_code = 3;
  }
  return out;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::risk_comparison: return run_risk_comparison(cfg);
    case ExperimentKind::reference_study: return run_reference_study(cfg);
    case ExperimentKind::penalty_study: return run_penalty_study(cfg);
    case ExperimentKind::shaping: return run_shaping(cfg);
  }
  throw ConfigError("unknown experiment kind");
}

}  // namespace arcvc
