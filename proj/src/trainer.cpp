#include "arcvc/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "arcvc/errors.hpp"
#include "arcvc/rng.hpp"

namespace arcvc {

const char* to_string(ReferenceKind k) {
  switch (k) {
    case ReferenceKind::state_value: return "state_value";
    case ReferenceKind::bootstrapped: return "bootstrapped";
    case ReferenceKind::global_mean: return "global_mean";
    case ReferenceKind::constant: return "constant";
  }
  return "?";
}

const char* to_string(PenaltyKind k) {
  return k == PenaltyKind::risk_network ? "risk_network" : "sample_based";
}

void validate(const ArcvcConfig& cfg) {
  validate(cfg.risk);
  if (cfg.gamma < 0.0 || cfg.gamma > 1.0) throw ConfigError("train: gamma in [0,1]");
  if (cfg.tau < 0) throw ConfigError("train: tau must be >= 0");
  if (cfg.episodes < 1) throw ConfigError("train: episodes must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (cfg.actor_batch_episodes < 1)
    throw ConfigError("train: actor_batch_episodes must be >= 1");
  if (cfg.hidden_width < 1) throw ConfigError("train: hidden_width must be >= 1");
  if (cfg.replay_capacity < 1) throw ConfigError("train: replay_capacity must be >= 1");
  if (cfg.grad_clip <= 0.0) throw ConfigError("train: grad_clip must be > 0");
  if (cfg.reference.kind == ReferenceKind::global_mean) {
    const auto& r = cfg.reference;
    if (!(r.sa_alpha0 > 0.0) || r.sa_alpha0 > 1.0)
      throw ConfigError("train: sa_alpha0 must be in (0,1]");
    if (r.sa_delta != 0.0 && (r.sa_delta < 0.5 || r.sa_delta > 1.0))
      throw ConfigError("train: sa_delta must be 0 or in [0.5,1]");
  }
}

namespace {

bool state_based(ReferenceKind k) {
  return k == ReferenceKind::state_value || k == ReferenceKind::bootstrapped;
}

}  // namespace

ArcvcAgent::ArcvcAgent(const ArcvcConfig& cfg, int feature_dim, int action_count,
                       std::mt19937_64& init_rng) {
  const int w = cfg.hidden_width;
  // Actor: two weight layers with a ReLU between them, softmax output.
  actor_ = Mlp({feature_dim, w, action_count}, Head::softmax);
  actor_.init_uniform(init_rng);
  actor_opt_ = AdamState(actor_.params().size(), {cfg.lr_actor});
  if (state_based(cfg.reference.kind)) {
    // Critics: three weight layers, ReLU on the first two, linear scalar out.
    value_critic_ = Mlp({feature_dim, w, w, 1}, Head::linear);
    value_critic_->init_uniform(init_rng);
    value_opt_ = AdamState(value_critic_->params().size(), {cfg.lr_value});
  }
  if (cfg.penalty == PenaltyKind::risk_network) {
    risk_critic_ = Mlp({feature_dim, w, w, 1}, Head::linear);
    risk_critic_->init_uniform(init_rng);
    risk_opt_ = AdamState(risk_critic_->params().size(), {cfg.lr_risk});
  }
}

void ArcvcAgent::observe_reward(double reward, const ReferenceMethod& method) {
  ++global_mean_updates_;
  double alpha = method.sa_alpha0;
  if (method.sa_delta > 0.0)
    alpha /= std::pow(static_cast<double>(global_mean_updates_), method.sa_delta);
  alpha = std::min(alpha, 1.0);
  global_mean_ += alpha * (reward - global_mean_);
}

ParamVector score_function(const ArcvcAgent& agent, std::span<const double> state,
                           int action, double prob_floor, long* warn_counter) {
  const auto probs = agent.actor().forward(state);
  if (probs[action] < prob_floor && warn_counter) ++(*warn_counter);
  return agent.actor().log_prob_gradient(state, action);
}

ParamVector score_function(ArcvcAgent& agent, std::span<const double> state, int action) {
  return score_function(agent, state, action, 1e-12, &agent.score_clip_warnings());
}

double reference_value(const ArcvcAgent& agent, const ReferenceMethod& method,
                       std::span<const double> state) {
  switch (method.kind) {
    case ReferenceKind::state_value:
    case ReferenceKind::bootstrapped:
      if (!agent.has_value_critic())
        throw UsageError("reference_value: no value critic for state-based reference");
      return agent.value_critic().scalar(state);
    case ReferenceKind::global_mean:
      return agent.global_mean();
    case ReferenceKind::constant:
      return method.nu0;
  }
  return 0.0;
}

namespace {

void axpy(ParamVector& acc, double a, const ParamVector& x) {
  for (std::size_t i = 0; i < acc.values.size(); ++i)
    acc.values[i] += a * x.values[i];
}

}  // namespace

ParamVector policy_gradient_estimate(const std::vector<EpisodeBatch>& batch,
                                     const Mlp& actor, const ArcvcConfig& cfg,
                                     const StateFn& reference_fn,
                                     const StateFn& risk_fn,
                                     long* warn_counter, EstimatorStats* stats) {
  if (batch.empty()) throw UsageError("policy_gradient_estimate: empty batch");
  const double lambda = cfg.risk.lambda;
  const double d = cfg.risk.constraint;
  const auto& f = cfg.risk.f;
  const auto& g = cfg.risk.g;
  const bool bootstrapped = cfg.reference.kind == ReferenceKind::bootstrapped;
  const bool has_ref_pathway = state_based(cfg.reference.kind);

  ParamVector main = {std::vector<double>(actor.params().size(), 0.0), actor.params().shapes};
  ParamVector sum_g = main;    // sum of B * scoresum  (dJ samples)
  ParamVector sum_ag = main;   // sum of a_i * B_i * scoresum_i
  double sum_a = 0.0;
  double sum_risk = 0.0, sum_weight = 0.0;
  long clips = 0;

  std::size_t n = 0;
  for (const auto& episode : batch) {
    if (episode.steps.empty()) continue;
    ++n;
    const double b = episode.b0();
    const double nu = reference_fn(episode.start_state());
    const double z = b - nu;
    const double fz = f(z);
    const double fpz = f.derivative(z);

    // Scores of the steps whose rewards enter B (at most tau+1 of them).
    const std::size_t score_steps =
        std::min(episode.steps.size(), static_cast<std::size_t>(cfg.tau) + 1);
    ParamVector scoresum = {std::vector<double>(actor.params().size(), 0.0),
                            actor.params().shapes};
    for (std::size_t t = 0; t < score_steps; ++t) {
      const auto& st = episode.steps[t];
      const auto probs = actor.forward(st.state);
      if (probs[st.action] < cfg.score_prob_floor) {
        ++clips;
        if (warn_counter) ++(*warn_counter);
      }
      axpy(scoresum, 1.0, actor.log_prob_gradient(st.state, st.action));
    }

    double main_coef, a;
    if (bootstrapped) {
      // Sample-level penalty (pa)*g(pa); vanishes when f(B-nu) == D.
      const double pa = fz - d;
      const double gv = g(pa);
      main_coef = b - lambda * pa * gv;
      a = (gv + pa * g.derivative(pa)) * fpz;
      sum_weight += gv + pa * g.derivative(pa);
    } else {
      const double pa = (cfg.penalty == PenaltyKind::risk_network)
                            ? risk_fn(episode.start_state()) - d
                            : fz - d;
      const double w = g.derivative(pa);
      main_coef = b - lambda * w * fz;
      a = w * fpz;
      sum_weight += w;
    }
    sum_risk += fz;

    axpy(main, main_coef, scoresum);
    if (has_ref_pathway && cfg.gradj == GradJPathway::likelihood_ratio) {
      axpy(sum_g, b, scoresum);
      axpy(sum_ag, a * b, scoresum);
    }
    sum_a += a;
  }
  if (n == 0) throw UsageError("policy_gradient_estimate: all episodes empty");

  const double inv_n = 1.0 / static_cast<double>(n);
  main *= inv_n;

  if (has_ref_pathway && lambda != 0.0) {
    if (cfg.gradj == GradJPathway::likelihood_ratio) {
      // Unbiased estimate of E[a] * E[B * scoresum]: pairwise U-statistic,
      // (n * mean(a) * mean(G) - mean(aG)) / (n - 1), which excludes the
      // same-episode coupling between a_i and G_i.
      const double m_a = sum_a * inv_n;
      if (n >= 2) {
        for (std::size_t i = 0; i < main.values.size(); ++i) {
          const double m_g = sum_g.values[i] * inv_n;
          const double m_ag = sum_ag.values[i] * inv_n;
          main.values[i] += lambda * (n * m_a * m_g - m_ag) / (n - 1.0);
        }
      } else {
        for (std::size_t i = 0; i < main.values.size(); ++i)
          main.values[i] += lambda * m_a * sum_g.values[i] * inv_n;
      }
    } else {
      throw ConfigError("critic dJ pathway requires the agent-bound overload");
    }
  }

  if (!main.finite())
    throw TrainingError("policy_gradient_estimate: non-finite estimate");
  if (stats) {
    stats->mean_sample_risk = sum_risk * inv_n;
    stats->mean_penalty_weight = sum_weight * inv_n;
    stats->clipped_scores = clips;
  }
  return main;
}

namespace {

// Critic-pathway dJ estimate: sum_t score_t * gamma^t * (r_t + gamma*J(x')).
ParamVector critic_grad_j(const std::vector<EpisodeBatch>& batch, ArcvcAgent& agent,
                          const ArcvcConfig& cfg) {
  ParamVector acc = {std::vector<double>(agent.actor().params().size(), 0.0),
                     agent.actor().params().shapes};
  std::size_t n = 0;
  for (const auto& episode : batch) {
    if (episode.steps.empty()) continue;
    ++n;
    double disc = 1.0;
    const std::size_t score_steps =
        std::min(episode.steps.size(), static_cast<std::size_t>(cfg.tau) + 1);
    for (std::size_t t = 0; t < score_steps; ++t) {
      const auto& st = episode.steps[t];
      const double bootstrap =
          st.terminal ? 0.0 : agent.value_critic().scalar(st.next_state);
      const double q = st.reward + cfg.gamma * bootstrap;
      axpy(acc, disc * q, agent.actor().log_prob_gradient(st.state, st.action));
      disc *= cfg.gamma;
    }
  }
  if (n > 0) acc *= 1.0 / static_cast<double>(n);
  return acc;
}

}  // namespace

ParamVector policy_gradient_estimate(const std::vector<EpisodeBatch>& batch,
                                     ArcvcAgent& agent, const ArcvcConfig& cfg,
                                     EstimatorStats* stats) {
  StateFn ref = [&](std::span<const double> s) {
    return reference_value(agent, cfg.reference, s);
  };
  StateFn risk = [&](std::span<const double> s) {
    return agent.has_risk_critic() ? agent.risk_critic().scalar(s) : 0.0;
  };
  if (state_based(cfg.reference.kind) && cfg.gradj == GradJPathway::critic) {
    // Same main term as the LR path; the reference-gradient correction is
    // taken from the critic-bootstrapped dJ estimate instead.
    ParamVector main = {std::vector<double>(agent.actor().params().size(), 0.0),
                        agent.actor().params().shapes};
    double sum_a = 0.0;
    std::size_t n = 0;
    const auto& f = cfg.risk.f;
    const auto& g = cfg.risk.g;
    const double d = cfg.risk.constraint;
    for (const auto& episode : batch) {
      if (episode.steps.empty()) continue;
      ++n;
      const double b = episode.b0();
      const double nu = ref(episode.start_state());
      const double z = b - nu;
      const double fz = f(z);
      const std::size_t score_steps =
          std::min(episode.steps.size(), static_cast<std::size_t>(cfg.tau) + 1);
      ParamVector scoresum = {std::vector<double>(agent.actor().params().size(), 0.0),
                              agent.actor().params().shapes};
      for (std::size_t t = 0; t < score_steps; ++t)
        axpy(scoresum, 1.0, agent.actor().log_prob_gradient(episode.steps[t].state,
                                                            episode.steps[t].action));
      double main_coef, a;
      if (cfg.reference.kind == ReferenceKind::bootstrapped) {
        const double pa = fz - d;
        const double gv = g(pa);
        main_coef = b - cfg.risk.lambda * pa * gv;
        a = (gv + pa * g.derivative(pa)) * f.derivative(z);
      } else {
        const double pa = (cfg.penalty == PenaltyKind::risk_network)
                              ? risk(episode.start_state()) - d
                              : fz - d;
        const double w = g.derivative(pa);
        main_coef = b - cfg.risk.lambda * w * fz;
        a = w * f.derivative(z);
      }
      axpy(main, main_coef, scoresum);
      sum_a += a;
    }
    if (n == 0) throw UsageError("policy_gradient_estimate: all episodes empty");
    main *= 1.0 / static_cast<double>(n);
    const auto grad_j = critic_grad_j(batch, agent, cfg);
    axpy(main, cfg.risk.lambda * sum_a / static_cast<double>(n), grad_j);
    if (!main.finite())
      throw TrainingError("policy_gradient_estimate: non-finite estimate");
    return main;
  }
  return policy_gradient_estimate(batch, agent.actor(), cfg, ref, risk,
                                  &agent.score_clip_warnings(), stats);
}

double update_value_critic(ArcvcAgent& agent,
                           const std::vector<const ReplayBuffer::Entry*>& sample,
                           const ArcvcConfig& cfg) {
  if (!agent.has_value_critic())
    throw UsageError("update_value_critic: agent has no value critic");
  if (sample.empty()) throw UsageError("update_value_critic: empty sample");
  auto& critic = agent.value_critic();

  if (cfg.value_mode == ValueCriticMode::td) {
    // Refresh the frozen target copy every td_target_refresh updates.
    if (!agent.td_target_ ||
        agent.value_opt().steps_taken() % std::max(1, cfg.td_target_refresh) == 0)
      agent.td_target_ = critic;
  }

  ParamVector grad = critic.zero_gradient();
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(sample.size());
  const double one = 1.0;
  for (const auto* e : sample) {
    double target;
    if (cfg.value_mode == ValueCriticMode::td) {
      const double next_v =
          e->terminal ? 0.0 : agent.td_target_->scalar(e->next_state);
      target = e->reward + cfg.gamma * next_v;
    } else if (cfg.reference.kind == ReferenceKind::bootstrapped) {
      // Per-step sample of the penalized objective; the critic's own current
      // output provides the (frozen) reference inside the sample.
      const double nu = critic.scalar(e->state);
      const double pa = cfg.risk.f(e->b - nu) - cfg.risk.constraint;
      target = e->b - cfg.risk.lambda * pa * cfg.risk.g(pa);
    } else {
      target = e->b;
    }
    const double pred = critic.scalar(e->state);
    const double err = pred - target;
    loss += err * err * inv_n;
    axpy(grad, 2.0 * err * inv_n, critic.backward(e->state, std::span(&one, 1)));
  }
  adam_step(agent.value_opt(), critic.params(), grad);
  return loss;
}

double update_risk_critic(ArcvcAgent& agent, const EpisodeBatch& episode,
                          const ArcvcConfig& cfg) {
  if (cfg.penalty != PenaltyKind::risk_network || !agent.has_risk_critic())
    throw UsageError("update_risk_critic: penalty method is not risk_network");
  if (episode.steps.empty()) throw UsageError("update_risk_critic: empty episode");
  auto& critic = agent.risk_critic();
  ParamVector grad = critic.zero_gradient();
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(episode.steps.size());
  const double one = 1.0;
  for (const auto& st : episode.steps) {
    const double nu = reference_value(agent, cfg.reference, st.state);
    const double rho = cfg.risk.f(st.reward_to_go - nu);
    const double pred = critic.scalar(st.state);
    const double err = pred - rho;
    loss += err * err * inv_n;
    axpy(grad, 2.0 * err * inv_n, critic.backward(st.state, std::span(&one, 1)));
  }
  adam_step(agent.risk_opt(), critic.params(), grad);
  return loss;
}

TrainResult train(const ArcvcConfig& cfg, Environment& env,
                  const CheckpointSink& checkpoints) {
  validate(cfg);
  auto init_rng = rng_stream(cfg.seed, "init");
  auto rollout_rng = rng_stream(cfg.seed, "rollout");
  auto replay_rng = rng_stream(cfg.seed, "replay");
  ArcvcAgent agent(cfg, env.feature_dim(), env.action_count(), init_rng);
  ReplayBuffer replay(static_cast<std::size_t>(cfg.replay_capacity));
  std::vector<EpisodeBatch> actor_batch;
  TrainResult result;
  constexpr int kHardStepCap = 1'000'000;  // envs define their own termination

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const auto t0 = std::chrono::steady_clock::now();
    env.reset(rollout_rng);
    EpisodeBatch episode;
    RunRecord rec;
    rec.episode = ep;
    try {
      episode = rollout(env, agent.actor(), rollout_rng, kHardStepCap, cfg.gamma, cfg.tau);
      if (!episode.steps.empty()) {
        const double nu = reference_value(agent, cfg.reference, episode.start_state());
        rec.b0 = episode.b0();
        rec.total_reward = episode.total_reward();
        rec.sample_risk = cfg.risk.f(rec.b0 - nu);
        rec.violation = rec.sample_risk > cfg.risk.constraint;
        rec.reference = nu;
      }
      rec.success = env.succeeded();

      replay.push_episode(episode);
      if (!episode.steps.empty()) actor_batch.push_back(episode);
      if (static_cast<int>(actor_batch.size()) >= cfg.actor_batch_episodes) {
        ParamVector grad = policy_gradient_estimate(actor_batch, agent, cfg);
        const double norm = grad.norm();
        if (norm > cfg.grad_clip) grad *= cfg.grad_clip / norm;
        grad *= -1.0;  // Adam descends; the objective is maximized
        adam_step(agent.actor_opt(), agent.actor().params(), grad);
        actor_batch.clear();
      }
      if (cfg.reference.kind == ReferenceKind::global_mean)
        for (const auto& st : episode.steps)
          agent.observe_reward(st.reward, cfg.reference);
      if (agent.has_value_critic() && replay.size() > 0) {
        const auto sample = replay.sample(
            static_cast<std::size_t>(cfg.batch_size), replay_rng);
        update_value_critic(agent, sample, cfg);
      }
      if (agent.has_risk_critic() && !episode.steps.empty())
        update_risk_critic(agent, episode, cfg);

      if (!agent.actor().params().finite() ||
          (agent.has_value_critic() && !agent.value_critic().params().finite()) ||
          (agent.has_risk_critic() && !agent.risk_critic().params().finite()))
        throw TrainingError("non-finite network parameters");
    } catch (const TrainingError& e) {
      result.failed = true;
      result.fail_reason = e.what();
      result.records.push_back(rec);
      break;
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    result.records.push_back(rec);

    if (!checkpoints.directory.empty() && cfg.checkpoint_interval > 0 &&
        (ep + 1) % cfg.checkpoint_interval == 0) {
      const std::string base =
          checkpoints.directory + "/" + checkpoints.prefix + "_ep" + std::to_string(ep + 1);
      save_params_file(agent.actor(), base + "_actor.txt");
      if (agent.has_value_critic())
        save_params_file(agent.value_critic(), base + "_value_critic.txt");
      if (agent.has_risk_critic())
        save_params_file(agent.risk_critic(), base + "_risk_critic.txt");
    }
  }

  if (!checkpoints.directory.empty()) {
    const std::string base = checkpoints.directory + "/" + checkpoints.prefix;
    save_params_file(agent.actor(), base + "_actor.txt");
    if (agent.has_value_critic())
      save_params_file(agent.value_critic(), base + "_value_critic.txt");
    if (agent.has_risk_critic())
      save_params_file(agent.risk_critic(), base + "_risk_critic.txt");
  }
  result.actor = agent.actor();
  return result;
}

}  // namespace arcvc
