#include "arcvc/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "arcvc/errors.hpp"

namespace arcvc {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::string IniMap::get_str(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double IniMap::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for " + key + ": '" + it->second + "'");
  }
}

int IniMap::get_int(const std::string& key, int fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + it->second + "'");
  }
}

bool IniMap::get_bool(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: bad boolean for " + key + ": '" + it->second + "'");
}

std::uint64_t IniMap::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config: bad seed for " + key + ": '" + it->second + "'");
  }
}

std::vector<double> IniMap::get_double_list(const std::string& key,
                                            const std::vector<double>& fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(it->second)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("config: bad number in list " + key + ": '" + item + "'");
    }
  }
  return out;
}

std::vector<std::uint64_t> IniMap::get_u64_list(
    const std::string& key, const std::vector<std::uint64_t>& fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(it->second)) {
    try {
      out.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ConfigError("config: bad seed in list " + key + ": '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> IniMap::get_str_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  return split_list(it->second);
}

IniMap parse_ini(std::istream& in) {
  IniMap ini;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    ini.set(section.empty() ? key : section + "." + key, value);
  }
  return ini;
}

IniMap parse_ini_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  return parse_ini(f);
}

void apply_override(IniMap& ini, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must be section.key=value: '" + assignment + "'");
  ini.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::risk_comparison: return "risk_comparison";
    case ExperimentKind::reference_study: return "reference_study";
    case ExperimentKind::penalty_study: return "penalty_study";
    case ExperimentKind::shaping: return "shaping";
  }
  return "?";
}

RiskKind risk_kind_from_name(const std::string& name) {
  if (name == "var" || name == "one_sided_variance") return RiskKind::one_sided_variance;
  if (name == "abs" || name == "one_sided_abs") return RiskKind::one_sided_abs;
  if (name == "sqrt" || name == "one_sided_sqrt") return RiskKind::one_sided_sqrt;
  if (name == "shaped") return RiskKind::shaped;
  throw ConfigError("unknown risk kind: '" + name + "'");
}

RiskSpec make_risk_spec(const ExperimentConfig& cfg, const std::string& kind_name) {
  RiskSpec spec;
  spec.g = PenaltyFunction::squared_hinge();
  spec.lambda = cfg.train.risk.lambda;
  const RiskKind kind = risk_kind_from_name(kind_name);
  switch (kind) {
    case RiskKind::one_sided_variance:
      spec.f = RiskFunction::one_sided_variance();
      break;
    case RiskKind::one_sided_abs:
      spec.f = RiskFunction::one_sided_abs();
      break;
    case RiskKind::one_sided_sqrt:
      spec.f = RiskFunction::one_sided_sqrt();
      break;
    case RiskKind::shaped:
      spec.f = RiskFunction::shaped(cfg.shaped_b, cfg.shaped_c);
      break;
    default:
      throw ConfigError("unsupported risk kind: " + kind_name);
  }
  if (kind != RiskKind::shaped && cfg.d_abs_scale)
    spec.constraint = scale_constraint(cfg.d_abs, kind);
  else
    spec.constraint = cfg.d_abs;
  validate(spec);
  return spec;
}

namespace {

ReferenceKind reference_from_name(const std::string& name) {
  if (name == "state_value") return ReferenceKind::state_value;
  if (name == "bootstrapped") return ReferenceKind::bootstrapped;
  if (name == "global_mean") return ReferenceKind::global_mean;
  if (name == "constant") return ReferenceKind::constant;
  throw ConfigError("unknown reference method: '" + name + "'");
}

PenaltyKind penalty_from_name(const std::string& name) {
  if (name == "risk_network") return PenaltyKind::risk_network;
  if (name == "sample_based") return PenaltyKind::sample_based;
  throw ConfigError("unknown penalty method: '" + name + "'");
}

ExperimentKind experiment_from_name(const std::string& name) {
  if (name == "risk_comparison") return ExperimentKind::risk_comparison;
  if (name == "reference_study") return ExperimentKind::reference_study;
  if (name == "penalty_study") return ExperimentKind::penalty_study;
  if (name == "shaping") return ExperimentKind::shaping;
  throw ConfigError("unknown experiment kind: '" + name + "'");
}

}  // namespace

ExperimentConfig load_experiment_config(const IniMap& ini) {
  ExperimentConfig cfg;
  cfg.kind = experiment_from_name(ini.get_str("experiment.kind", "risk_comparison"));
  cfg.seeds = ini.get_u64_list("experiment.seeds", cfg.seeds);
  if (cfg.seeds.empty()) throw ConfigError("experiment.seeds must be nonempty");
  cfg.out_dir = ini.get_str("experiment.out", cfg.out_dir);
  cfg.workers = ini.get_int("experiment.workers", cfg.workers);
  if (cfg.workers < 1) throw ConfigError("experiment.workers must be >= 1");
  const int window = ini.get_int("experiment.window", static_cast<int>(cfg.window));
  if (window < 1) throw ConfigError("experiment.window must be >= 1");
  cfg.window = static_cast<std::size_t>(window);

  auto& g = cfg.grid;
  g.width = ini.get_int("grid.width", g.width);
  g.height = ini.get_int("grid.height", g.height);
  g.p_mine = ini.get_double("grid.p_mine", g.p_mine);
  g.p_noise = ini.get_double("grid.p_noise", g.p_noise);
  g.r_mine = ini.get_double("grid.r_mine", g.r_mine);
  g.r_target = ini.get_double("grid.r_target", g.r_target);
  g.max_episode_len = ini.get_int("grid.max_episode_len", g.max_episode_len);
  g.mine_features = ini.get_bool("grid.mine_features", g.mine_features);
  g.start.x = ini.get_int("grid.start_x", 0);
  g.start.y = ini.get_int("grid.start_y", 0);
  g.target.x = ini.get_int("grid.target_x", 0);
  g.target.y = ini.get_int("grid.target_y", g.height - 1);
  validate(g);

  auto& t = cfg.train;
  t.reference.kind = reference_from_name(ini.get_str("train.reference", "state_value"));
  t.reference.nu0 = ini.get_double("train.nu0", 0.0);
  t.reference.sa_alpha0 = ini.get_double("train.sa_alpha0", t.reference.sa_alpha0);
  t.reference.sa_delta = ini.get_double("train.sa_delta", t.reference.sa_delta);
  t.penalty = penalty_from_name(ini.get_str("train.penalty", "risk_network"));
  t.gamma = ini.get_double("train.gamma", t.gamma);
  if (t.gamma < 0.0 || t.gamma > 1.0) throw ConfigError("train.gamma must be in [0,1]");
  t.tau = ini.get_int("train.tau", g.max_episode_len);
  t.episodes = ini.get_int("train.episodes", t.episodes);
  t.batch_size = ini.get_int("train.batch_size", t.batch_size);
  t.actor_batch_episodes = ini.get_int("train.actor_batch_episodes", t.actor_batch_episodes);
  t.lr_actor = ini.get_double("train.lr", t.lr_actor);
  t.lr_actor = ini.get_double("train.lr_actor", t.lr_actor);
  t.lr_value = ini.get_double("train.lr", t.lr_value);
  t.lr_value = ini.get_double("train.lr_value", t.lr_value);
  t.lr_risk = ini.get_double("train.lr", t.lr_risk);
  t.lr_risk = ini.get_double("train.lr_risk", t.lr_risk);
  t.hidden_width = ini.get_int("train.hidden_width", t.hidden_width);
  t.replay_capacity = ini.get_int("train.replay_capacity", t.replay_capacity);
  t.grad_clip = ini.get_double("train.grad_clip", t.grad_clip);
  t.checkpoint_interval = ini.get_int("train.checkpoint_interval", t.checkpoint_interval);
  const std::string vm = ini.get_str("train.value_mode", "monte_carlo");
  if (vm == "monte_carlo")
    t.value_mode = ValueCriticMode::monte_carlo;
  else if (vm == "td")
    t.value_mode = ValueCriticMode::td;
  else
    throw ConfigError("unknown value_mode: '" + vm + "'");
  t.td_target_refresh = ini.get_int("train.td_target_refresh", t.td_target_refresh);
  const std::string gj = ini.get_str("train.gradj", "likelihood_ratio");
  if (gj == "likelihood_ratio")
    t.gradj = GradJPathway::likelihood_ratio;
  else if (gj == "critic")
    t.gradj = GradJPathway::critic;
  else
    throw ConfigError("unknown gradj pathway: '" + gj + "'");

  cfg.risk_kind = ini.get_str("risk.kind", cfg.risk_kind);
  cfg.d_abs = ini.get_double("risk.d", cfg.d_abs);
  cfg.d_abs_scale = ini.get_bool("risk.d_is_abs_scale", cfg.d_abs_scale);
  cfg.shaped_b = ini.get_double("risk.shaped_b", cfg.shaped_b);
  cfg.shaped_c = ini.get_double("risk.shaped_c", cfg.shaped_c);
  t.risk.lambda = ini.get_double("risk.lambda", t.risk.lambda);
  if (!(t.risk.lambda > 0.0)) throw ConfigError("risk.lambda must be > 0");
  t.risk = make_risk_spec(cfg, cfg.risk_kind);

  cfg.comparison_kinds = ini.get_str_list("risk_comparison.kinds", cfg.comparison_kinds);
  for (const auto& k : cfg.comparison_kinds) risk_kind_from_name(k);

  cfg.gammas = ini.get_double_list("reference_study.gammas", cfg.gammas);
  for (double gm : cfg.gammas)
    if (gm <= 0.0 || gm >= 1.0)
      throw ConfigError("reference_study.gammas must lie strictly inside (0,1)");
  cfg.eval_stationary_steps =
      ini.get_int("reference_study.eval_stationary_steps", cfg.eval_stationary_steps);
  cfg.eval_states = ini.get_int("reference_study.eval_states", cfg.eval_states);
  cfg.eval_episodes = ini.get_int("reference_study.eval_episodes", cfg.eval_episodes);

  auto& s = cfg.shaping;
  s.ruin.initial_fortune = ini.get_int("ruin.initial_fortune", s.ruin.initial_fortune);
  s.ruin.risk_lookahead = ini.get_int("ruin.k", s.ruin.risk_lookahead);
  s.ruin.t_max = ini.get_int("ruin.t_max", s.ruin.t_max);
  s.ruin.gamma = ini.get_double("ruin.gamma", s.ruin.gamma);
  s.fortune_lo = ini.get_int("shaping.fortune_lo", s.fortune_lo);
  s.fortune_hi = ini.get_int("shaping.fortune_hi", s.fortune_hi);
  s.n_per_state = ini.get_int("shaping.n_per_state", s.n_per_state);
  s.j_episodes = ini.get_int("shaping.j_episodes", s.j_episodes);
  s.empirical_targets = ini.get_bool("shaping.empirical_targets", s.empirical_targets);
  s.empirical_episodes = ini.get_int("shaping.empirical_episodes", s.empirical_episodes);
  cfg.shaping_synthetic = ini.get_bool("shaping.synthetic", cfg.shaping_synthetic);
  cfg.synthetic_b = ini.get_double("shaping.synthetic_b", cfg.synthetic_b);
  cfg.synthetic_c = ini.get_double("shaping.synthetic_c", cfg.synthetic_c);
  cfg.synthetic_noise = ini.get_double("shaping.synthetic_noise", cfg.synthetic_noise);
  cfg.synthetic_n = ini.get_int("shaping.synthetic_n", cfg.synthetic_n);
  if (cfg.kind == ExperimentKind::shaping) validate(s);

  validate(t);
  return cfg;
}

}  // namespace arcvc
