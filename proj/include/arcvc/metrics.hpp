#pragma once

#include <random>
#include <span>
#include <vector>

#include "arcvc/env.hpp"
#include "arcvc/nn.hpp"
#include "arcvc/risk.hpp"
#include "arcvc/trainer.hpp"

namespace arcvc {

// Fraction of trailing-window episodes whose per-episode sample risk
// exceeded the constraint.
double violation_rate(std::span<const RunRecord> records, std::size_t window);

// Fraction of trailing-window episodes flagged successful.
double success_rate(std::span<const RunRecord> records, std::size_t window);

struct EpsilonBarSample {
  double gamma = 0.0;
  double eps_global = 0.0;   // reference = stationary mean of J
  double eps_state = 0.0;    // reference = per-state J
  double eps_bar = 0.0;      // |eps_G - eps_pi| / max(eps_G, eps_pi)
  double eps_global_se = 0.0;
  double eps_state_se = 0.0;
};

struct EpsilonBarConfig {
  double gamma = 0.9;
  int horizon = 500;
  int stationary_steps = 100000;  // rollout length for state-visit frequencies
  int n_states = 40;              // states sampled from the visit distribution
  int n_episodes = 40;            // rollouts per sampled state
};

// Deviation between the global-reference and state-reference risk estimates
// under the evaluated policy. States are drawn from the empirical visit
// distribution of a long rollout; J(x) is the per-state Monte-Carlo mean of
// the same rollouts that feed the risk estimates, so a single-state chain
// yields exactly zero.
EpsilonBarSample epsilon_bar(Environment& env, const Mlp& actor,
                             const RiskFunction& f, const EpsilonBarConfig& cfg,
                             std::mt19937_64& rng);

struct SummaryStat {
  double mean = 0.0;
  double stderr = 0.0;
  int n = 0;
};

SummaryStat summarize(std::span<const double> values);

}  // namespace arcvc
