#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace arcvc {

struct StepOutcome {
  double reward = 0.0;
  bool terminal = false;
};

// Minimal episodic environment surface shared by the grid world, the
// gambler's-ruin process, and the small test chains. Single-owner mutable;
// all randomness flows through the caller's generator.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int feature_dim() const = 0;
  virtual int action_count() const = 0;
  virtual void reset(std::mt19937_64& rng) = 0;
  // Jump to a concrete state (grid: {x, y}; ruin: {fortune, 0}).
  virtual void set_state(std::array<int, 2> raw) = 0;
  virtual std::array<int, 2> raw_state() const = 0;
  virtual std::vector<double> features() const = 0;
  virtual StepOutcome step(int action, std::mt19937_64& rng) = 0;
  virtual bool done() const = 0;
  virtual bool succeeded() const { return false; }
};

// ---------------------------------------------------------------------------
// Grid world

enum class Action { up = 0, down = 1, right = 2, left = 3 };
inline constexpr int kNumActions = 4;

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

struct GridWorldConfig {
  int width = 20;    // x in [0, width-1]
  int height = 25;   // y in [0, height-1]; y grows downward
  double p_mine = 0.2;
  double p_noise = 0.1;
  double r_mine = -1.0;
  double r_target = 1.0;
  Cell start{0, 0};
  Cell target{0, 24};
  int max_episode_len = 500;
  std::uint64_t layout_seed = 0;
  bool mine_features = false;  // append 4 neighbor-mine indicators

  int x_max() const { return width - 1; }
  int y_max() const { return height - 1; }
};

void validate(const GridWorldConfig& cfg);

// P(cell x is mined) = p_mine * (x_max - x) / x_max, decreasing in x.
double mine_probability(const GridWorldConfig& cfg, int x);

// One byte per cell, row-major (y * width + x); start/target always clear.
// Deterministic per layout_seed: cells are drawn in row-major order.
std::vector<std::uint8_t> generate_layout(const GridWorldConfig& cfg);

struct GridWorldState {
  int x = 0;
  int y = 0;
  int steps = 0;
};

struct GridStepResult {
  GridWorldState next;
  double reward = 0.0;
  bool terminal = false;
};

// Noisy move semantics: with probability p_noise the action is replaced by a
// uniform direction; off-grid moves leave the position unchanged. Reward is
// r_target on the target (terminal), r_mine on a mine (episode continues),
// else 0. Throws UsageError when the state is already terminal.
GridStepResult grid_step(const GridWorldConfig& cfg,
                         const std::vector<std::uint8_t>& mines,
                         const GridWorldState& state, Action action,
                         std::mt19937_64& rng);

std::vector<double> grid_features(const GridWorldConfig& cfg,
                                  const std::vector<std::uint8_t>& mines,
                                  const GridWorldState& state);

// Text layout: '.' empty, 'M' mine, 'S' start, 'T' target, one row per line.
std::string layout_to_text(const GridWorldConfig& cfg,
                           const std::vector<std::uint8_t>& mines);
struct ParsedLayout {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mines;
  Cell start;
  Cell target;
};
ParsedLayout layout_from_text(const std::string& text);

class GridWorld : public Environment {
 public:
  explicit GridWorld(GridWorldConfig cfg);
  GridWorld(GridWorldConfig cfg, std::vector<std::uint8_t> mines);

  int feature_dim() const override;
  int action_count() const override { return kNumActions; }
  void reset(std::mt19937_64& rng) override;
  void set_state(std::array<int, 2> raw) override;
  std::array<int, 2> raw_state() const override { return {state_.x, state_.y}; }
  std::vector<double> features() const override;
  StepOutcome step(int action, std::mt19937_64& rng) override;
  bool done() const override { return done_; }
  bool succeeded() const override { return reached_target_; }

  const GridWorldConfig& config() const { return cfg_; }
  const std::vector<std::uint8_t>& mines() const { return mines_; }
  const GridWorldState& state() const { return state_; }

 private:
  GridWorldConfig cfg_;
  std::vector<std::uint8_t> mines_;
  GridWorldState state_;
  bool done_ = false;
  bool reached_target_ = false;
};

// ---------------------------------------------------------------------------
// Gambler's ruin

struct GamblersRuinConfig {
  int initial_fortune = 5;
  int risk_lookahead = 10;  // k
  int t_max = 100;          // trajectory truncation horizon
  double gamma = 1.0;
  int feature_cap = 100;    // m_cap, featurization only
};

void validate(const GamblersRuinConfig& cfg);

struct RuinStepResult {
  int next_fortune = 0;
  double reward = 0.0;
};

// Fair-coin gamble: fortune +-1 with probability 1/2 each; reward is the
// fortune change. Throws UsageError at fortune 0.
RuinStepResult ruin_step(int fortune, std::mt19937_64& rng);

// Exact probability of reaching fortune 0 within k steps from fortune m,
// by dynamic programming over the birth-death chain. Dyadic values, exact
// in double precision for the k used here.
double bankruptcy_probability(int m, int k);

std::vector<double> ruin_features(int fortune, int cap);

class GamblersRuin : public Environment {
 public:
  explicit GamblersRuin(GamblersRuinConfig cfg);

  int feature_dim() const override { return 1; }
  int action_count() const override { return 1; }  // MRP: single dummy action
  void reset(std::mt19937_64& rng) override;
  void set_state(std::array<int, 2> raw) override;
  std::array<int, 2> raw_state() const override { return {fortune_, 0}; }
  std::vector<double> features() const override;
  StepOutcome step(int action, std::mt19937_64& rng) override;
  bool done() const override { return done_; }

  const GamblersRuinConfig& config() const { return cfg_; }
  int fortune() const { return fortune_; }

 private:
  GamblersRuinConfig cfg_;
  int fortune_ = 0;
  int steps_ = 0;
  bool done_ = false;
};

}  // namespace arcvc
