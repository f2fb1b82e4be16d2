#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geotact/agent/policy.hpp"
#include "geotact/agent/ppo.hpp"
#include "geotact/app/config.hpp"
#include "geotact/app/metrics.hpp"
#include "geotact/core/error.hpp"
#include "geotact/core/random.hpp"
#include "geotact/env/env.hpp"

namespace geotact {

struct UpdateRecord {
  int update = 0;
  long env_steps = 0;
  long episodes = 0;
  double running_success = 0.0;
  LossReport loss;
};

struct TrainOutcome {
  ActorCritic net;
  MetricsSeries metrics;
  std::vector<UpdateRecord> updates;
  long env_steps = 0;
  long skipped_episodes = 0;
  bool aborted = false;
};

using UpdateCallback = std::function<void(const UpdateRecord&, const ActorCritic&)>;

namespace detail {

// Seed salts that keep the random streams of a run apart.
inline constexpr std::uint64_t kEpisodeStream = 0x6570697364650000ULL;
inline constexpr std::uint64_t kActionStream = 7;
inline constexpr std::uint64_t kShuffleStream = 8;

// One environment slot of the lockstep rollout.
struct EnvSlot {
  GraspEnv env;
  std::vector<double> obs;
  std::string object;
  std::uint64_t next_episode = 0;
  int length = 0;

  // Per-rollout transitions.
  std::vector<Eigen::VectorXd> inputs;
  std::vector<std::array<int, 4>> heads;
  std::vector<double> log_probs, values, rewards;
  std::vector<char> dones;

  void clear_rollout() {
    inputs.clear();
    heads.clear();
    log_probs.clear();
    values.clear();
    rewards.clear();
    dones.clear();
  }
};

}  // namespace detail

// Episode seed and object for the k-th episode started by environment slot `slot`.
inline std::pair<std::uint64_t, ShapeId> training_episode(const RunConfig& cfg, int slot, std::uint64_t k) {
  const std::uint64_t seed = mix_seed(cfg.seed, detail::kEpisodeStream + static_cast<std::uint64_t>(slot), k);
  const auto ids = cfg.object_ids();
  return {seed, ids[splitmix64(seed) % ids.size()]};
}

// PPO training from `net` for cfg.train.total_steps environment transitions.
// Uses cfg.env as given, so the caller picks tabletop or granular.
inline TrainOutcome train_policy(const RunConfig& cfg, ActorCritic net, const UpdateCallback& on_update = {}) {
  cfg.validate();
  if (!matches_architecture(net, cfg.agent)) throw ConfigError("initial network does not match the configured architecture");
  TrainOutcome out;
  out.metrics = MetricsSeries(cfg.train.metrics_window);
  const int num_envs = cfg.train.num_envs;
  Rng action_rng(mix_seed(cfg.seed, detail::kActionStream));
  Rng shuffle_rng(mix_seed(cfg.seed, detail::kShuffleStream));
  OptimizerState opt = OptimizerState::fresh(net);

  std::vector<detail::EnvSlot> slots;
  slots.reserve(num_envs);
  for (int i = 0; i < num_envs; ++i) slots.push_back(detail::EnvSlot{GraspEnv(cfg.env), {}, {}, 0, 0, {}, {}, {}, {}, {}, {}});

  auto start_episode = [&](int i) {
    detail::EnvSlot& s = slots[i];
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const auto [seed, object] = training_episode(cfg, i, s.next_episode++);
      if (auto obs = s.env.reset(object, seed)) {
        s.obs = std::move(*obs);
        s.object = shape(object).name;
        s.length = 0;
        return;
      }
      ++out.skipped_episodes;
    }
    throw ConfigError("every training episode is being skipped; check the object and approach settings");
  };

  long remaining = cfg.train.total_steps;
  if (remaining > 0) {
    for (int i = 0; i < num_envs; ++i) start_episode(i);
  }
  int update = 0;
  while (remaining > 0) {
    const long target = std::min<long>(cfg.ppo.rollout_steps, remaining);
    const long ticks = (target + num_envs - 1) / num_envs;
    for (auto& s : slots) s.clear_rollout();

    std::vector<const std::vector<double>*> obs_ptrs(num_envs);
    for (long t = 0; t < ticks; ++t) {
      for (int i = 0; i < num_envs; ++i) obs_ptrs[i] = &slots[i].obs;
      const Eigen::MatrixXd x = observation_matrix(obs_ptrs);
      const Eigen::MatrixXd logits = forward(net.actor, x);
      const Eigen::MatrixXd values = forward(net.critic, x);
      for (int i = 0; i < num_envs; ++i) {
        detail::EnvSlot& s = slots[i];
        const SampledAction a = sample_action(logits.col(i), action_rng);
        const StepResult r = s.env.step(a.action);
        ++out.env_steps;
        ++s.length;
        s.inputs.push_back(x.col(i));
        s.heads.push_back(a.action.heads());
        s.log_probs.push_back(a.log_prob);
        s.values.push_back(values(0, i));
        s.rewards.push_back(r.reward * cfg.ppo.reward_scale);
        s.dones.push_back(r.done ? 1 : 0);
        if (r.done) {
          out.metrics.add(out.env_steps, s.object, r.info.grasp_success, s.length);
          start_episode(i);
        } else {
          s.obs = r.observation;
        }
      }
    }
    remaining -= ticks * num_envs;

    for (int i = 0; i < num_envs; ++i) obs_ptrs[i] = &slots[i].obs;
    const Eigen::MatrixXd bootstrap = forward(net.critic, observation_matrix(obs_ptrs));
    const Eigen::Index n = static_cast<Eigen::Index>(ticks * num_envs);
    PpoBatch batch;
    batch.observations.resize(kObservationSize, n);
    batch.old_log_probs.resize(n);
    batch.advantages.resize(n);
    batch.returns.resize(n);
    Eigen::Index col = 0;
    for (int i = 0; i < num_envs; ++i) {
      const detail::EnvSlot& s = slots[i];
      const GaeResult g = gae(s.rewards, s.values, s.dones, bootstrap(0, i), cfg.ppo.gamma, cfg.ppo.gae_lambda);
      for (std::size_t t = 0; t < s.rewards.size(); ++t, ++col) {
        batch.observations.col(col) = s.inputs[t];
        batch.heads.push_back(s.heads[t]);
        batch.old_log_probs(col) = s.log_probs[t];
        batch.advantages(col) = g.advantages[t];
        batch.returns(col) = g.returns[t];
      }
    }
    normalize_advantages(batch.advantages);
    const LossReport loss = ppo_update(net, opt, batch, cfg.ppo, shuffle_rng);
    UpdateRecord rec{++update, out.env_steps, static_cast<long>(out.metrics.records().size()), out.metrics.final_running(), loss};
    out.updates.push_back(rec);
    if (loss.aborted) {
      out.aborted = true;
      break;
    }
    if (on_update) on_update(rec, net);
  }
  out.net = std::move(net);
  return out;
}

}  // namespace geotact
