#include "arcvc/env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "arcvc/errors.hpp"

namespace arcvc {

void validate(const GridWorldConfig& cfg) {
  if (cfg.width < 1 || cfg.height < 1)
    throw ConfigError("grid: width and height must be >= 1");
  if (cfg.p_mine < 0.0 || cfg.p_mine > 1.0)
    throw ConfigError("grid: p_mine must be in [0,1]");
  if (cfg.p_noise < 0.0 || cfg.p_noise > 1.0)
    throw ConfigError("grid: p_noise must be in [0,1]");
  if (cfg.r_mine >= 0.0) throw ConfigError("grid: r_mine must be negative");
  if (cfg.start == cfg.target) throw ConfigError("grid: start must differ from target");
  auto in_bounds = [&](Cell c) {
    return c.x >= 0 && c.x < cfg.width && c.y >= 0 && c.y < cfg.height;
  };
  if (!in_bounds(cfg.start) || !in_bounds(cfg.target))
    throw ConfigError("grid: start/target out of bounds");
  if (cfg.max_episode_len < 1)
    throw ConfigError("grid: max_episode_len must be >= 1");
}

double mine_probability(const GridWorldConfig& cfg, int x) {
  if (cfg.x_max() == 0) return cfg.p_mine;  // single-column grid
  return cfg.p_mine * static_cast<double>(cfg.x_max() - x) / cfg.x_max();
}

std::vector<std::uint8_t> generate_layout(const GridWorldConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.layout_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::uint8_t> mines(static_cast<std::size_t>(cfg.width) * cfg.height, 0);
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const Cell c{x, y};
      if (c == cfg.start || c == cfg.target) continue;
      if (unit(rng) < mine_probability(cfg, x))
        mines[static_cast<std::size_t>(y) * cfg.width + x] = 1;
    }
  }
  return mines;
}

namespace {

constexpr int kDx[kNumActions] = {0, 0, 1, -1};   // up, down, right, left
constexpr int kDy[kNumActions] = {-1, 1, 0, 0};

bool at_target(const GridWorldConfig& cfg, const GridWorldState& s) {
  return s.x == cfg.target.x && s.y == cfg.target.y;
}

}  // namespace

GridStepResult grid_step(const GridWorldConfig& cfg,
                         const std::vector<std::uint8_t>& mines,
                         const GridWorldState& state, Action action,
                         std::mt19937_64& rng) {
  if (at_target(cfg, state) || state.steps >= cfg.max_episode_len)
    throw UsageError("grid_step: episode already terminal");

  int dir = static_cast<int>(action);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < cfg.p_noise) {
    std::uniform_int_distribution<int> pick(0, kNumActions - 1);
    dir = pick(rng);
  }
  GridStepResult res;
  res.next = state;
  const int nx = state.x + kDx[dir];
  const int ny = state.y + kDy[dir];
  if (nx >= 0 && nx < cfg.width && ny >= 0 && ny < cfg.height) {
    res.next.x = nx;
    res.next.y = ny;
  }
  res.next.steps = state.steps + 1;
  if (at_target(cfg, res.next)) {
    res.reward = cfg.r_target;
    res.terminal = true;
  } else {
    if (mines[static_cast<std::size_t>(res.next.y) * cfg.width + res.next.x])
      res.reward = cfg.r_mine;
    res.terminal = res.next.steps >= cfg.max_episode_len;
  }
  return res;
}

std::vector<double> grid_features(const GridWorldConfig& cfg,
                                  const std::vector<std::uint8_t>& mines,
                                  const GridWorldState& state) {
  std::vector<double> f;
  f.reserve(cfg.mine_features ? 6 : 2);
  f.push_back(static_cast<double>(state.x) / std::max(cfg.x_max(), 1));
  f.push_back(static_cast<double>(state.y) / std::max(cfg.y_max(), 1));
  if (cfg.mine_features) {
    for (int a = 0; a < kNumActions; ++a) {
      const int nx = state.x + kDx[a];
      const int ny = state.y + kDy[a];
      const bool mined = nx >= 0 && nx < cfg.width && ny >= 0 && ny < cfg.height &&
                         mines[static_cast<std::size_t>(ny) * cfg.width + nx];
      f.push_back(mined ? 1.0 : 0.0);
    }
  }
  return f;
}

std::string layout_to_text(const GridWorldConfig& cfg,
                           const std::vector<std::uint8_t>& mines) {
  std::string out;
  out.reserve(static_cast<std::size_t>(cfg.height) * (cfg.width + 1));
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const Cell c{x, y};
      char ch = '.';
      if (c == cfg.start)
        ch = 'S';
      else if (c == cfg.target)
        ch = 'T';
      else if (mines[static_cast<std::size_t>(y) * cfg.width + x])
        ch = 'M';
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

ParsedLayout layout_from_text(const std::string& text) {
  ParsedLayout p;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(line);
  if (rows.empty()) throw ConfigError("layout: empty text");
  p.height = static_cast<int>(rows.size());
  p.width = static_cast<int>(rows[0].size());
  p.mines.assign(static_cast<std::size_t>(p.width) * p.height, 0);
  bool saw_start = false, saw_target = false;
  for (int y = 0; y < p.height; ++y) {
    if (static_cast<int>(rows[y].size()) != p.width)
      throw ConfigError("layout: ragged rows");
    for (int x = 0; x < p.width; ++x) {
      switch (rows[y][x]) {
        case '.':
          break;
        case 'M':
          p.mines[static_cast<std::size_t>(y) * p.width + x] = 1;
          break;
        case 'S':
          p.start = {x, y};
          saw_start = true;
          break;
        case 'T':
          p.target = {x, y};
          saw_target = true;
          break;
        default:
          throw ConfigError(std::string("layout: bad character '") + rows[y][x] + "'");
      }
    }
  }
  if (!saw_start || !saw_target)
    throw ConfigError("layout: missing start or target");
  return p;
}

GridWorld::GridWorld(GridWorldConfig cfg)
    : cfg_(cfg), mines_(generate_layout(cfg)) {
  state_ = {cfg_.start.x, cfg_.start.y, 0};
}

GridWorld::GridWorld(GridWorldConfig cfg, std::vector<std::uint8_t> mines)
    : cfg_(cfg), mines_(std::move(mines)) {
  validate(cfg_);
  if (mines_.size() != static_cast<std::size_t>(cfg_.width) * cfg_.height)
    throw ConfigError("grid: mine layout size mismatch");
  state_ = {cfg_.start.x, cfg_.start.y, 0};
}

int GridWorld::feature_dim() const { return cfg_.mine_features ? 6 : 2; }

void GridWorld::reset(std::mt19937_64&) {
  state_ = {cfg_.start.x, cfg_.start.y, 0};
  done_ = false;
  reached_target_ = false;
}

void GridWorld::set_state(std::array<int, 2> raw) {
  state_ = {raw[0], raw[1], 0};
  done_ = false;
  reached_target_ = false;
}

std::vector<double> GridWorld::features() const {
  return grid_features(cfg_, mines_, state_);
}

StepOutcome GridWorld::step(int action, std::mt19937_64& rng) {
  if (done_) throw UsageError("GridWorld: step after terminal");
  auto res = grid_step(cfg_, mines_, state_, static_cast<Action>(action), rng);
  state_ = res.next;
  done_ = res.terminal;
  reached_target_ = at_target(cfg_, state_);
  return {res.reward, res.terminal};
}

// ---------------------------------------------------------------------------

void validate(const GamblersRuinConfig& cfg) {
  if (cfg.initial_fortune < 0)
    throw ConfigError("ruin: initial fortune must be >= 0");
  if (cfg.risk_lookahead < 1) throw ConfigError("ruin: k must be >= 1");
  if (cfg.t_max < cfg.risk_lookahead)
    throw ConfigError("ruin: t_max must be >= k");
  if (cfg.gamma < 0.0 || cfg.gamma > 1.0)
    throw ConfigError("ruin: gamma must be in [0,1]");
  if (cfg.feature_cap < 1) throw ConfigError("ruin: feature_cap must be >= 1");
}

RuinStepResult ruin_step(int fortune, std::mt19937_64& rng) {
  if (fortune < 1) throw UsageError("ruin_step: process terminated at fortune 0");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool win = unit(rng) < 0.5;
  return {fortune + (win ? 1 : -1), win ? 1.0 : -1.0};
}

double bankruptcy_probability(int m, int k) {
  if (m < 0 || k < 0) throw UsageError("bankruptcy_probability: m,k must be >= 0");
  if (m == 0) return 1.0;
  if (m > k) return 0.0;
  // p[j] = P(ruin within s steps | fortune j), rolled forward in s.
  const int width = m + k + 1;
  std::vector<double> p(width, 0.0), next(width, 0.0);
  p[0] = 1.0;
  for (int s = 1; s <= k; ++s) {
    next[0] = 1.0;
    for (int j = 1; j < width; ++j) {
      const double up = (j + 1 < width) ? p[j + 1] : 0.0;
      next[j] = 0.5 * (p[j - 1] + up);
    }
    std::swap(p, next);
  }
  return p[m];
}

std::vector<double> ruin_features(int fortune, int cap) {
  return {static_cast<double>(std::min(fortune, cap)) / cap};
}

GamblersRuin::GamblersRuin(GamblersRuinConfig cfg) : cfg_(cfg) {
  validate(cfg_);
  fortune_ = cfg_.initial_fortune;
  done_ = fortune_ == 0;
}

void GamblersRuin::reset(std::mt19937_64&) {
  fortune_ = cfg_.initial_fortune;
  steps_ = 0;
  done_ = fortune_ == 0;
}

void GamblersRuin::set_state(std::array<int, 2> raw) {
  fortune_ = raw[0];
  steps_ = 0;
  done_ = fortune_ == 0;
}

std::vector<double> GamblersRuin::features() const {
  return ruin_features(fortune_, cfg_.feature_cap);
}

StepOutcome GamblersRuin::step(int, std::mt19937_64& rng) {
  if (done_) throw UsageError("GamblersRuin: step after terminal");
  auto res = ruin_step(fortune_, rng);
  fortune_ = res.next_fortune;
  ++steps_;
  done_ = fortune_ == 0 || steps_ >= cfg_.t_max;
  return {res.reward, done_};
}

}  // namespace arcvc
