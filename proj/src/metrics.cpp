#include "arcvc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "arcvc/errors.hpp"
#include "arcvc/trajectory.hpp"

namespace arcvc {

namespace {

std::span<const RunRecord> trailing(std::span<const RunRecord> records,
                                    std::size_t window) {
  if (window == 0) throw UsageError("metrics: empty window");
  if (window > records.size())
    throw UsageError("metrics: window larger than record count");
  return records.subspan(records.size() - window);
}

}  // namespace

double violation_rate(std::span<const RunRecord> records, std::size_t window) {
  const auto tail = trailing(records, window);
  std::size_t count = 0;
  for (const auto& r : tail) count += r.violation ? 1 : 0;
  return static_cast<double>(count) / tail.size();
}

double success_rate(std::span<const RunRecord> records, std::size_t window) {
  const auto tail = trailing(records, window);
  std::size_t count = 0;
  for (const auto& r : tail) count += r.success ? 1 : 0;
  return static_cast<double>(count) / tail.size();
}

EpsilonBarSample epsilon_bar(Environment& env, const Mlp& actor,
                             const RiskFunction& f, const EpsilonBarConfig& cfg,
                             std::mt19937_64& rng) {
  if (cfg.n_episodes < 1 || cfg.n_states < 1)
    throw ConfigError("epsilon_bar: n_states and n_episodes must be >= 1");

  // State-visit frequencies of a long rollout (episodes restart on reset).
  std::vector<std::array<int, 2>> visited;
  visited.reserve(static_cast<std::size_t>(cfg.stationary_steps));
  env.reset(rng);
  for (int t = 0; t < cfg.stationary_steps; ++t) {
    if (env.done()) env.reset(rng);
    visited.push_back(env.raw_state());
    const auto probs = actor.forward(env.features());
    env.step(sample_categorical(probs, rng), rng);
  }

  // Sampling states from the visit list is sampling from the empirical
  // stationary distribution.
  std::uniform_int_distribution<std::size_t> pick(0, visited.size() - 1);
  std::vector<std::array<int, 2>> states(static_cast<std::size_t>(cfg.n_states));
  for (auto& s : states) s = visited[pick(rng)];

  // Per-state rollouts: the same draws feed J(x), the stationary mean of J,
  // and both risk estimates.
  std::vector<std::vector<double>> returns(states.size());
  std::vector<double> j_state(states.size(), 0.0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    returns[i].reserve(static_cast<std::size_t>(cfg.n_episodes));
    for (int e = 0; e < cfg.n_episodes; ++e) {
      env.set_state(states[i]);
      const auto episode =
          rollout(env, actor, rng, cfg.horizon + 1, cfg.gamma, cfg.horizon);
      returns[i].push_back(episode.steps.empty() ? 0.0 : episode.b0());
    }
    double sum = 0.0;
    for (double b : returns[i]) sum += b;
    j_state[i] = sum / cfg.n_episodes;
  }
  double j_global = 0.0;
  for (double j : j_state) j_global += j;
  j_global /= static_cast<double>(states.size());

  std::vector<double> dev_state, dev_global;
  dev_state.reserve(states.size() * cfg.n_episodes);
  dev_global.reserve(states.size() * cfg.n_episodes);
  for (std::size_t i = 0; i < states.size(); ++i)
    for (double b : returns[i]) {
      dev_state.push_back(f(b - j_state[i]));
      dev_global.push_back(f(b - j_global));
    }

  const auto s_state = summarize(dev_state);
  const auto s_global = summarize(dev_global);
  EpsilonBarSample out;
  out.gamma = cfg.gamma;
  out.eps_state = s_state.mean;
  out.eps_global = s_global.mean;
  out.eps_state_se = s_state.stderr;
  out.eps_global_se = s_global.stderr;
  const double hi = std::max(out.eps_global, out.eps_state);
  out.eps_bar = hi > 0.0 ? std::abs(out.eps_global - out.eps_state) / hi : 0.0;
  return out;
}

SummaryStat summarize(std::span<const double> values) {
  SummaryStat s;
  s.n = static_cast<int>(values.size());
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr = std::sqrt(ss / (s.n - 1) / s.n);
  }
  return s;
}

}  // namespace arcvc
