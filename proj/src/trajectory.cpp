#include "arcvc/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "arcvc/errors.hpp"

namespace arcvc {

double reward_to_go(std::span<const double> rewards, double gamma, int horizon) {
  if (rewards.empty()) throw UsageError("reward_to_go: empty reward sequence");
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("reward_to_go: gamma in [0,1]");
  if (horizon < 0) throw ConfigError("reward_to_go: horizon must be >= 0");
  const std::size_t terms =
      std::min(rewards.size(), static_cast<std::size_t>(horizon) + 1);
  double sum = 0.0;
  double disc = 1.0;
  for (std::size_t t = 0; t < terms; ++t) {
    sum += disc * rewards[t];
    disc *= gamma;
  }
  return sum;
}

FiniteTimeBuffer::FiniteTimeBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("FiniteTimeBuffer: capacity must be >= 1");
}

void FiniteTimeBuffer::push(double reward) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(reward);
}

double EpisodeBatch::total_reward() const {
  double sum = 0.0;
  for (const auto& s : steps) sum += s.reward;
  return sum;
}

void dump_episode_csv(const EpisodeBatch& episode, std::ostream& out) {
  out << "step,raw0,raw1,action,reward,reward_to_go\n";
  char buf[64];
  for (std::size_t t = 0; t < episode.steps.size(); ++t) {
    const auto& s = episode.steps[t];
    out << t << ',' << s.raw[0] << ',' << s.raw[1] << ',' << s.action << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", s.reward);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", s.reward_to_go);
    out << buf << '\n';
  }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("ReplayBuffer: capacity must be >= 1");
  entries_.reserve(std::min<std::size_t>(capacity_, 4096));
}

void ReplayBuffer::push(Entry entry) {
  if (entries_.size() < capacity_) {
    entries_.push_back(std::move(entry));
  } else {
    entries_[head_] = std::move(entry);  // overwrite the oldest
    head_ = (head_ + 1) % capacity_;
  }
}

void ReplayBuffer::push_episode(const EpisodeBatch& episode) {
  for (const auto& s : episode.steps)
    push({s.state, s.reward, s.action, s.next_state, s.terminal, s.reward_to_go});
}

std::vector<const ReplayBuffer::Entry*> ReplayBuffer::sample(
    std::size_t n, std::mt19937_64& rng) const {
  if (entries_.empty()) throw UsageError("ReplayBuffer: sample from empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
  std::vector<const Entry*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(&entries_[pick(rng)]);
  return out;
}

int sample_categorical(std::span<const double> probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;  // guard against rounding at u~1
}

EpisodeBatch rollout(Environment& env, const Mlp& actor, std::mt19937_64& rng,
                     int max_steps, double gamma, int horizon) {
  EpisodeBatch episode;
  // The buffer holds the horizon+1 rewards of one return window. Once it
  // fills, its contents are exactly the window of the oldest unfinalized
  // step, so B_t is computed as steps scroll out of the window.
  FiniteTimeBuffer ftb(static_cast<std::size_t>(horizon) + 1);
  std::size_t front = 0;  // first step whose B_t is not yet finalized
  for (int t = 0; t < max_steps && !env.done(); ++t) {
    Transition tr;
    tr.state = env.features();
    tr.raw = env.raw_state();
    const auto probs = actor.forward(tr.state);
    for (double p : probs)
      if (!std::isfinite(p)) throw TrainingError("rollout: non-finite policy output");
    tr.action = sample_categorical(probs, rng);
    const auto outcome = env.step(tr.action, rng);
    tr.reward = outcome.reward;
    tr.terminal = outcome.terminal;
    tr.next_state = env.features();
    episode.steps.push_back(std::move(tr));
    ftb.push(episode.steps.back().reward);
    if (ftb.size() == ftb.capacity()) {
      const auto window = ftb.contents();
      episode.steps[front].reward_to_go = reward_to_go(window, gamma, horizon);
      ++front;
    }
  }
  // Steps still inside the buffer get trailing windows (fewer terms).
  const auto tail = ftb.contents();
  for (std::size_t t = front; t < episode.steps.size(); ++t) {
    const std::size_t offset = tail.size() - (episode.steps.size() - t);
    episode.steps[t].reward_to_go = reward_to_go(
        std::span<const double>(tail).subspan(offset), gamma, horizon);
  }
  return episode;
}

ValueEstimate monte_carlo_value(Environment& env, const Mlp& actor,
                                std::array<int, 2> state, int n_episodes,
                                double gamma, int horizon, std::mt19937_64& rng) {
  if (n_episodes < 1) throw ConfigError("monte_carlo_value: n_episodes >= 1");
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n_episodes; ++i) {
    env.set_state(state);
    const auto episode = rollout(env, actor, rng, horizon + 1, gamma, horizon);
    const double b = episode.steps.empty() ? 0.0 : episode.b0();
    sum += b;
    sumsq += b * b;
  }
  ValueEstimate est;
  est.episodes = n_episodes;
  est.mean = sum / n_episodes;
  if (n_episodes > 1) {
    const double var = (sumsq - sum * sum / n_episodes) / (n_episodes - 1);
    est.stderr = std::sqrt(std::max(0.0, var) / n_episodes);
  }
  return est;
}

}  // namespace arcvc
