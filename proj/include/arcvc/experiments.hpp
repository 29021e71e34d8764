#pragma once

#include <functional>
#include <string>
#include <vector>

#include "arcvc/config.hpp"

namespace arcvc {

struct ExperimentOutcome {
  int exit_code = 0;  // 0 ok, 2 a run diverged, 3 degenerate fit
  std::vector<std::string> files;
};

// Trains every configured risk kind over all seeds on matched layouts and
// writes per-run rows plus one mean/stderr summary row per kind.
ExperimentOutcome run_risk_comparison(const ExperimentConfig& cfg);

// Per gamma and repeat: train, then score the policy's global-vs-state
// reference deviation. Emits one row per run plus per-gamma means.
ExperimentOutcome run_reference_study(const ExperimentConfig& cfg);

// Trains both penalty methods on matched layouts/seeds and writes aligned
// per-episode curves plus final network checkpoints per arm.
ExperimentOutcome run_penalty_study(const ExperimentConfig& cfg);

// Collects (B - J, p_k(m)) samples from the ruin process (or synthesizes
// them from a planted model) and fits the bump model.
ExperimentOutcome run_shaping(const ExperimentConfig& cfg);

ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

// Runs fn(0..n_tasks-1) on up to `workers` threads. Task outputs must not
// share mutable state; callers write ordered results after the join.
void parallel_for(int n_tasks, int workers, const std::function<void(int)>& fn);

}  // namespace arcvc
