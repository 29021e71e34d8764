#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "arcvc/env.hpp"
#include "arcvc/shaping.hpp"
#include "arcvc/trainer.hpp"

namespace arcvc {

// Flat "[section] key = value" text config. Keys are stored as
// "section.key". '#' and ';' start comments.
class IniMap {
 public:
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;
  std::vector<std::uint64_t> get_u64_list(
      const std::string& key, const std::vector<std::uint64_t>& fallback) const;
  std::vector<std::string> get_str_list(const std::string& key,
                                        const std::vector<std::string>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

IniMap parse_ini(std::istream& in);
IniMap parse_ini_file(const std::string& path);
// "section.key=value" command-line override.
void apply_override(IniMap& ini, const std::string& assignment);

enum class ExperimentKind { risk_comparison, reference_study, penalty_study, shaping };
const char* to_string(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::risk_comparison;
  std::vector<std::uint64_t> seeds{1};
  std::string out_dir = "out";
  int workers = 1;
  std::size_t window = 100;  // trailing window for run metrics

  GridWorldConfig grid;
  ArcvcConfig train;  // risk spec filled from [risk] via make_risk_spec

  // [risk]
  std::string risk_kind = "abs";
  double d_abs = 0.1;        // constraint on the abs scale
  bool d_abs_scale = true;   // scale per kind for one-sided risks
  double shaped_b = 1.0;
  double shaped_c = 0.0;

  // [risk_comparison]
  std::vector<std::string> comparison_kinds{"var", "abs", "sqrt"};

  // [reference_study]
  std::vector<double> gammas{0.1, 0.3, 0.5, 0.7, 0.9, 0.99};
  int eval_stationary_steps = 20000;
  int eval_states = 30;
  int eval_episodes = 30;

  // [shaping]
  ShapingConfig shaping;
  bool shaping_synthetic = false;
  double synthetic_b = 2.0;
  double synthetic_c = -1.0;
  double synthetic_noise = 0.0;
  int synthetic_n = 200;
};

RiskKind risk_kind_from_name(const std::string& name);

// Risk spec for one run: one-sided kinds get D scaled from the abs-scale
// value; the shaped kind takes D as given.
RiskSpec make_risk_spec(const ExperimentConfig& cfg, const std::string& kind_name);

// Parses, applies overrides, validates. Throws ConfigError on anything
// malformed or out of range.
ExperimentConfig load_experiment_config(const IniMap& ini);

}  // namespace arcvc
