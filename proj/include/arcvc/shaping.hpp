#pragma once

#include <iosfwd>
#include <random>
#include <vector>

#include "arcvc/env.hpp"
#include "arcvc/risk.hpp"

namespace arcvc {

// One observed (deviation, risk-probability) pair from the ruin process.
struct ShapingSample {
  double z = 0.0;  // realization of B - J(m)
  double y = 0.0;  // risk target p_k(m)
  int m = 0;       // source fortune
};

struct ShapedFit {
  double b = 0.0;
  double c = 0.0;
  double rss = 0.0;
  int samples = 0;
};

struct ShapingConfig {
  GamblersRuinConfig ruin;
  int fortune_lo = 1;
  int fortune_hi = 25;
  int n_per_state = 200;
  int j_episodes = 2000;  // Monte-Carlo episodes for the J(m) estimate
  bool empirical_targets = false;  // y from simulated ruin frequency instead of the exact DP
  int empirical_episodes = 2000;
};

void validate(const ShapingConfig& cfg);

// For each fortune m in [lo, hi]: estimate J(m) by Monte-Carlo policy
// evaluation, then pair n_per_state fresh realizations z = B - J(m) with the
// bankruptcy probability p_k(m).
std::vector<ShapingSample> collect_shaping_samples(const ShapingConfig& cfg,
                                                   std::mt19937_64& rng);

// Least-squares fit of y ~ 1/(1 + b (z - c)^2): coarse grid over
// (log b, c) followed by Levenberg-damped Gauss-Newton. Deterministic.
// Throws FitError on degenerate input (fewer than 3 samples or all z equal).
ShapedFit fit_shaped_model(const std::vector<ShapingSample>& samples);

// Model prediction for a candidate (b, c).
double shaped_model(double b, double c, double z);

RiskFunction shaped_risk_from_fit(const ShapedFit& fit);

void write_samples_csv(const std::vector<ShapingSample>& samples, std::ostream& out);
void write_fit_csv(const ShapedFit& fit, std::ostream& out);

}  // namespace arcvc
