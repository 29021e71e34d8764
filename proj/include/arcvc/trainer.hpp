#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arcvc/env.hpp"
#include "arcvc/nn.hpp"
#include "arcvc/risk.hpp"
#include "arcvc/trajectory.hpp"

namespace arcvc {

enum class ReferenceKind { state_value, bootstrapped, global_mean, constant };
enum class PenaltyKind { risk_network, sample_based };
enum class ValueCriticMode { monte_carlo, td };
enum class GradJPathway { likelihood_ratio, critic };

const char* to_string(ReferenceKind k);
const char* to_string(PenaltyKind k);

struct ReferenceMethod {
  ReferenceKind kind = ReferenceKind::state_value;
  double nu0 = 0.0;          // constant reference
  double sa_alpha0 = 1.0;    // global-mean stochastic approximation step scale
  double sa_delta = 0.6;     // alpha_t = alpha0 / t^delta, clipped to (0,1]; 0 = constant step
};

struct ArcvcConfig {
  RiskSpec risk;
  ReferenceMethod reference;
  PenaltyKind penalty = PenaltyKind::risk_network;
  double gamma = 0.9;
  int tau = 500;                  // reward-to-go horizon
  int episodes = 1000;
  int batch_size = 100;           // replay minibatch for the value critic
  int actor_batch_episodes = 1;   // fresh episodes per actor update
  double lr_actor = 1e-3;
  double lr_value = 1e-3;
  double lr_risk = 1e-3;
  int hidden_width = 64;
  int replay_capacity = 10000;
  ValueCriticMode value_mode = ValueCriticMode::monte_carlo;
  int td_target_refresh = 100;    // frozen-target refresh period (TD mode)
  GradJPathway gradj = GradJPathway::likelihood_ratio;
  double grad_clip = 10.0;        // actor gradient norm clip
  double score_prob_floor = 1e-12;
  int checkpoint_interval = 0;    // episodes between snapshots; 0 = final only when a path is set
  std::uint64_t seed = 1;
};

void validate(const ArcvcConfig& cfg);

// The three-network agent. Critic presence follows the conditional
// initialization of the episodic algorithm: a value critic exists only for
// state-based references (state_value, bootstrapped), a risk critic only for
// the risk_network penalty.
class ArcvcAgent {
 public:
  ArcvcAgent(const ArcvcConfig& cfg, int feature_dim, int action_count,
             std::mt19937_64& init_rng);

  Mlp& actor() { return actor_; }
  const Mlp& actor() const { return actor_; }
  bool has_value_critic() const { return value_critic_.has_value(); }
  bool has_risk_critic() const { return risk_critic_.has_value(); }
  Mlp& value_critic() { return *value_critic_; }
  const Mlp& value_critic() const { return *value_critic_; }
  Mlp& risk_critic() { return *risk_critic_; }
  const Mlp& risk_critic() const { return *risk_critic_; }

  double global_mean() const { return global_mean_; }
  void seed_global_mean(double value) { global_mean_ = value; }
  void observe_reward(double reward, const ReferenceMethod& method);

  long score_clip_warnings() const { return score_clip_warnings_; }
  long& score_clip_warnings() { return score_clip_warnings_; }

  AdamState& actor_opt() { return actor_opt_; }
  AdamState& value_opt() { return value_opt_; }
  AdamState& risk_opt() { return risk_opt_; }

 private:
  Mlp actor_;
  std::optional<Mlp> value_critic_;
  std::optional<Mlp> risk_critic_;
  std::optional<Mlp> td_target_;  // frozen copy for TD mode
  AdamState actor_opt_, value_opt_, risk_opt_;
  double global_mean_ = 0.0;
  long global_mean_updates_ = 0;
  long score_clip_warnings_ = 0;

  friend double update_value_critic(ArcvcAgent&, const std::vector<const ReplayBuffer::Entry*>&,
                                    const ArcvcConfig&);
};

// d log policy(action | state) / d actor params. Actions whose probability
// falls below `prob_floor` bump the agent's warning counter (the gradient
// itself stays finite).
ParamVector score_function(const ArcvcAgent& agent, std::span<const double> state,
                           int action, double prob_floor, long* warn_counter);
ParamVector score_function(ArcvcAgent& agent, std::span<const double> state, int action);

// Reference value nu(x) per the active method.
double reference_value(const ArcvcAgent& agent, const ReferenceMethod& method,
                       std::span<const double> state);

// Scalar maps used by the estimator; tests may inject exact oracles.
using StateFn = std::function<double(std::span<const double>)>;

struct EstimatorStats {
  double mean_sample_risk = 0.0;
  double mean_penalty_weight = 0.0;
  long clipped_scores = 0;
};

// Ascent direction for the soft-constrained objective from a batch of fresh
// episodes. Per episode with return B and reference nu:
//
//   [B - lambda * w * f(B - nu)] * sum_t score_t
//     + lambda * w * f'(B - nu) * (dJ pathway)
//
// where w = g'(Rhat(x0) - D) under the risk_network penalty and
// w = g'(f(B - nu) - D) under the sample_based penalty. The dJ pathway is
// the likelihood-ratio estimate E[B * sum score] taken from the same batch,
// decoupled across episodes (pairwise U-statistic) so the batch estimate is
// exactly unbiased. References without a policy pathway (global_mean,
// constant) drop the correction term.
//
// The bootstrapped reference swaps the penalty for its sample-level form
// (f(B-nu)-D) * g(f(B-nu)-D), which vanishes when the constraint is met.
ParamVector policy_gradient_estimate(const std::vector<EpisodeBatch>& batch,
                                     const Mlp& actor, const ArcvcConfig& cfg,
                                     const StateFn& reference_fn,
                                     const StateFn& risk_fn,
                                     long* warn_counter = nullptr,
                                     EstimatorStats* stats = nullptr);

// Agent-bound overload: references and risk come from the agent's critics.
ParamVector policy_gradient_estimate(const std::vector<EpisodeBatch>& batch,
                                     ArcvcAgent& agent, const ArcvcConfig& cfg,
                                     EstimatorStats* stats = nullptr);

// One optimizer step of the value critic on a replay sample. Monte-Carlo
// mode regresses onto stored returns (for the bootstrapped reference, onto
// the penalized per-step objective sample); TD mode regresses onto
// r + gamma * J_frozen(x'). Returns the mean squared loss before the step.
double update_value_critic(ArcvcAgent& agent,
                           const std::vector<const ReplayBuffer::Entry*>& sample,
                           const ArcvcConfig& cfg);

// One optimizer step of the risk critic on a fresh episode: targets are the
// per-step risk samples rho_t = f(B_t - nu(x_t)). Risk-network penalty only.
double update_risk_critic(ArcvcAgent& agent, const EpisodeBatch& episode,
                          const ArcvcConfig& cfg);

// Per-episode training record. wall_ms is excluded from reproducibility
// comparisons.
struct RunRecord {
  int episode = 0;
  double total_reward = 0.0;
  double b0 = 0.0;
  bool violation = false;
  bool success = false;
  double sample_risk = 0.0;
  double reference = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  std::vector<RunRecord> records;
  bool failed = false;
  std::string fail_reason;
  std::optional<Mlp> actor;  // final policy, for post-training evaluation
};

struct CheckpointSink {
  std::string directory;  // empty = no checkpoints
  std::string prefix;
};

// The full episodic loop: per episode collect, annotate returns, push to
// replay, update actor / value critic / risk critic, emit one RunRecord.
// Deterministic per config seed. A divergent run stops early with
// failed = true.
TrainResult train(const ArcvcConfig& cfg, Environment& env,
                  const CheckpointSink& checkpoints = {});

}  // namespace arcvc
