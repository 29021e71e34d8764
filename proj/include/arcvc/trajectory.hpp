#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "arcvc/env.hpp"
#include "arcvc/nn.hpp"

namespace arcvc {

// One (state, action, reward, next-state) record with episode annotations.
struct Transition {
  std::vector<double> state;       // encoded features at x_t
  std::array<int, 2> raw{0, 0};    // raw label for traces (x,y / fortune)
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
  double reward_to_go = 0.0;       // B_t over the trailing window
};

// Discounted sum over at most horizon+1 terms: sum_{t=0}^{min(horizon, len-1)}
// gamma^t r_t. Canonical front-to-back evaluation order.
double reward_to_go(std::span<const double> rewards, double gamma, int horizon);

// FIFO queue of the most recent items, bounded at `capacity`. push/pop O(1).
class FiniteTimeBuffer {
 public:
  explicit FiniteTimeBuffer(std::size_t capacity);

  void push(double reward);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  void clear() { items_.clear(); }
  double front() const { return items_.front(); }
  std::vector<double> contents() const { return {items_.begin(), items_.end()}; }

 private:
  std::size_t capacity_;
  std::deque<double> items_;
};

// One episode plus per-step discounted returns.
struct EpisodeBatch {
  std::vector<Transition> steps;

  std::size_t length() const { return steps.size(); }
  double b0() const { return steps.empty() ? 0.0 : steps.front().reward_to_go; }
  double total_reward() const;
  const std::vector<double>& start_state() const { return steps.front().state; }
};

// CSV trace: step,<raw0>,<raw1>,action,reward,reward_to_go.
void dump_episode_csv(const EpisodeBatch& episode, std::ostream& out);

// Bounded FIFO store of per-step tuples with uniform sampling.
class ReplayBuffer {
 public:
  struct Entry {
    std::vector<double> state;
    double reward = 0.0;
    int action = 0;
    std::vector<double> next_state;
    bool terminal = false;
    double b = 0.0;  // stored reward-to-go
  };

  explicit ReplayBuffer(std::size_t capacity);

  void push(Entry entry);
  void push_episode(const EpisodeBatch& episode);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Entry& at(std::size_t i) const { return entries_[(head_ + i) % entries_.size()]; }

  // Uniform with replacement.
  std::vector<const Entry*> sample(std::size_t n, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Entry> entries_;  // ring once full
  std::size_t head_ = 0;        // index of the oldest entry
};

// Runs one episode: actions sampled from the actor's softmax output, rewards
// collected through a finite-time buffer, per-step B_t annotated over the
// trailing window of at most horizon+1 rewards. The environment must be
// freshly reset. Throws TrainingError on a non-finite policy output.
EpisodeBatch rollout(Environment& env, const Mlp& actor, std::mt19937_64& rng,
                     int max_steps, double gamma, int horizon);

struct ValueEstimate {
  double mean = 0.0;
  double stderr = 0.0;
  int episodes = 0;
};

// Monte-Carlo J(state): sample mean of B over rollouts started from `state`.
ValueEstimate monte_carlo_value(Environment& env, const Mlp& actor,
                                std::array<int, 2> state, int n_episodes,
                                double gamma, int horizon, std::mt19937_64& rng);

// Samples an index from a probability vector using a single uniform draw.
int sample_categorical(std::span<const double> probs, std::mt19937_64& rng);

}  // namespace arcvc
