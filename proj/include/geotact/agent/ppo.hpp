#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "geotact/agent/mlp.hpp"
#include "geotact/agent/policy.hpp"
#include "geotact/core/error.hpp"
#include "geotact/core/random.hpp"

namespace geotact {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  int epochs_per_batch = 4;
  int minibatch_size = 256;
  double learning_rate = 3e-4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  int rollout_steps = 4096;
  double grad_clip_norm = 0.5;
  // Rewards are multiplied by this before advantage estimation so value
  // targets stay O(1) next to the 800-point success bonus.
  double reward_scale = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-5;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo.gamma must lie in (0, 1]");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("ppo.gae_lambda must lie in [0, 1]");
    if (!(clip_epsilon > 0.0)) throw ConfigError("ppo.clip_epsilon must be positive");
    if (epochs_per_batch < 1 || minibatch_size < 1 || rollout_steps < 1) throw ConfigError("ppo epoch/minibatch/rollout sizes must be >= 1");
    if (!(learning_rate > 0.0) || !(grad_clip_norm > 0.0) || !(reward_scale > 0.0)) throw ConfigError("ppo rates must be positive");
    if (value_coef < 0.0 || entropy_coef < 0.0) throw ConfigError("ppo loss coefficients must be non-negative");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_epsilon > 0.0))
      throw ConfigError("ppo Adam parameters out of range");
  }
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over one environment's consecutive steps.
// `bootstrap` is the value of the state after the last step; it is ignored if
// that step ended an episode.
inline GaeResult gae(std::span<const double> rewards, std::span<const double> values, std::span<const char> dones, double bootstrap,
                     double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw UsageError("gae inputs differ in length");
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_value = bootstrap;
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double live = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * next_value * live - values[t];
    running = delta + gamma * lambda * live * running;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
    next_value = values[t];
  }
  return out;
}

// Training samples in network input space.
struct PpoBatch {
  Eigen::MatrixXd observations;  // 160 x N, already scaled
  std::vector<std::array<int, 4>> heads;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  Eigen::Index size() const { return observations.cols(); }

  PpoBatch select(std::span<const int> idx) const {
    PpoBatch b;
    const auto n = static_cast<Eigen::Index>(idx.size());
    b.observations.resize(observations.rows(), n);
    b.old_log_probs.resize(n);
    b.advantages.resize(n);
    b.returns.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const int i = idx[j];
      b.observations.col(j) = observations.col(i);
      b.heads.push_back(heads[i]);
      b.old_log_probs(j) = old_log_probs(i);
      b.advantages(j) = advantages(i);
      b.returns(j) = returns(i);
    }
    return b;
  }
};

// Shifts and scales advantages to zero mean and unit (population) deviation.
inline void normalize_advantages(Eigen::VectorXd& adv) {
  if (adv.size() == 0) return;
  const double mean = adv.mean();
  const double var = (adv.array() - mean).square().mean();
  adv = ((adv.array() - mean) / std::max(std::sqrt(var), 1e-8)).matrix();
}

// Clipped surrogate contribution of one sample (to be maximized).
inline double clipped_surrogate(double ratio, double advantage, double epsilon) {
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage);
}

struct LossReport {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double actor_grad_norm = 0.0;
  double critic_grad_norm = 0.0;
  bool aborted = false;
};

struct ActorCriticGrad {
  MlpGrad actor;
  MlpGrad critic;
};

// total = -mean(clipped surrogate) + value_coef * mean((V - R)^2)
//         - entropy_coef * mean(sum of head entropies)
// Fills `grad` (if given) with the exact gradient of `total`.
inline LossReport ppo_loss(const ActorCritic& net, const PpoBatch& batch, const PpoConfig& cfg, ActorCriticGrad* grad = nullptr) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw UsageError("empty PPO batch");
  MlpTape actor_tape, critic_tape;
  const Eigen::MatrixXd logits = forward(net.actor, batch.observations, grad ? &actor_tape : nullptr);
  const Eigen::MatrixXd values = forward(net.critic, batch.observations, grad ? &critic_tape : nullptr);
  Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(logits.rows(), n);
  Eigen::MatrixXd d_values(1, n);
  const double inv_n = 1.0 / static_cast<double>(n);

  LossReport rep;
  int clipped = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    std::array<Eigen::VectorXd, 4> logp;
    double new_lp = 0.0;
    double entropy = 0.0;
    std::array<double, 4> head_h{};
    for (int h = 0; h < 4; ++h) {
      logp[h] = log_softmax(head_logits(logits.col(j), h));
      new_lp += logp[h](batch.heads[j][h]);
      head_h[h] = -(logp[h].array().exp() * logp[h].array()).sum();
      entropy += head_h[h];
    }
    const double log_ratio = new_lp - batch.old_log_probs(j);
    const double ratio = std::exp(log_ratio);
    const double a = batch.advantages(j);
    const double eps = cfg.clip_epsilon;
    const double unclipped = ratio * a;
    const double clipped_term = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * a;
    rep.policy_loss -= std::min(unclipped, clipped_term) * inv_n;
    rep.entropy += entropy * inv_n;
    rep.approx_kl += ((ratio - 1.0) - log_ratio) * inv_n;
    if (std::abs(ratio - 1.0) > eps) ++clipped;
    const double v_err = values(0, j) - batch.returns(j);
    rep.value_loss += v_err * v_err * inv_n;

    if (!grad) continue;
    // The surrogate follows the unclipped branch whenever it is the minimum;
    // otherwise the clipped branch is flat in the ratio.
    const double d_lp = unclipped <= clipped_term ? -a * ratio * inv_n : 0.0;
    for (int h = 0; h < 4; ++h) {
      const Eigen::VectorXd p = logp[h].array().exp().matrix();
      for (int k = 0; k < kHeadSizes[h]; ++k) {
        const double onehot = k == batch.heads[j][h] ? 1.0 : 0.0;
        const double d_entropy = -p(k) * (logp[h](k) + head_h[h]);
        d_logits(kHeadOffsets[h] + k, j) = d_lp * (onehot - p(k)) - cfg.entropy_coef * inv_n * d_entropy;
      }
    }
    d_values(0, j) = 2.0 * cfg.value_coef * v_err * inv_n;
  }
  rep.clip_fraction = clipped * inv_n;
  rep.total = rep.policy_loss + cfg.value_coef * rep.value_loss - cfg.entropy_coef * rep.entropy;
  if (grad) {
    grad->actor = MlpGrad::zeros_like(net.actor);
    grad->critic = MlpGrad::zeros_like(net.critic);
    backward(net.actor, actor_tape, d_logits, grad->actor);
    backward(net.critic, critic_tape, d_values, grad->critic);
  }
  return rep;
}

// Adam moments for one network.
struct AdamMoments {
  MlpGrad m;
  MlpGrad v;
  long step = 0;

  static AdamMoments for_net(const Mlp& net) { return {MlpGrad::zeros_like(net), MlpGrad::zeros_like(net), 0}; }
};

struct OptimizerState {
  AdamMoments actor;
  AdamMoments critic;

  static OptimizerState fresh(const ActorCritic& net) { return {AdamMoments::for_net(net.actor), AdamMoments::for_net(net.critic)}; }
};

inline void adam_apply(Mlp& net, AdamMoments& st, const MlpGrad& g, const PpoConfig& cfg) {
  ++st.step;
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.step));
  auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    param.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.adam_epsilon);
  };
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    update(net.layers[i].w, st.m.w[i], st.v.w[i], g.w[i]);
    update(net.layers[i].b, st.m.b[i], st.v.b[i], g.b[i]);
  }
}

// Rescales a gradient so its global norm is at most `limit`; returns the
// norm before clipping.
inline double clip_global_norm(MlpGrad& g, double limit) {
  const double norm = std::sqrt(g.squared_norm());
  if (norm > limit) g.scale(limit / norm);
  return norm;
}

// One minibatch step. Actor and critic are clipped separately so the value
// gradient cannot crowd out the policy gradient. A non-finite loss or
// gradient leaves the parameters untouched.
inline LossReport ppo_step(ActorCritic& net, OptimizerState& opt, const PpoBatch& mb, const PpoConfig& cfg) {
  ActorCriticGrad g;
  LossReport rep = ppo_loss(net, mb, cfg, &g);
  const double an = std::sqrt(g.actor.squared_norm());
  const double cn = std::sqrt(g.critic.squared_norm());
  if (!std::isfinite(rep.total) || !std::isfinite(an) || !std::isfinite(cn)) {
    rep.aborted = true;
    return rep;
  }
  rep.actor_grad_norm = clip_global_norm(g.actor, cfg.grad_clip_norm);
  rep.critic_grad_norm = clip_global_norm(g.critic, cfg.grad_clip_norm);
  adam_apply(net.actor, opt.actor, g.actor, cfg);
  adam_apply(net.critic, opt.critic, g.critic, cfg);
  return rep;
}

// Several epochs of shuffled minibatch steps over a full rollout batch whose
// advantages are already normalized. Returns the mean report of the last epoch.
inline LossReport ppo_update(ActorCritic& net, OptimizerState& opt, const PpoBatch& batch, const PpoConfig& cfg, Rng& rng) {
  cfg.validate();
  const int n = static_cast<int>(batch.size());
  std::vector<int> order(n);
  LossReport mean;
  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.index(static_cast<std::size_t>(i) + 1)]);
    mean = LossReport{};
    int count = 0;
    for (int start = 0; start < n; start += cfg.minibatch_size) {
      const int len = std::min(cfg.minibatch_size, n - start);
      const PpoBatch mb = batch.select(std::span<const int>(order).subspan(start, len));
      const LossReport r = ppo_step(net, opt, mb, cfg);
      if (r.aborted) {
        mean.aborted = true;
        return mean;
      }
      mean.policy_loss += r.policy_loss;
      mean.value_loss += r.value_loss;
      mean.entropy += r.entropy;
      mean.total += r.total;
      mean.approx_kl += r.approx_kl;
      mean.clip_fraction += r.clip_fraction;
      mean.actor_grad_norm += r.actor_grad_norm;
      mean.critic_grad_norm += r.critic_grad_norm;
      ++count;
    }
    if (count > 0) {
      const double inv = 1.0 / count;
      for (double* f : {&mean.policy_loss, &mean.value_loss, &mean.entropy, &mean.total, &mean.approx_kl, &mean.clip_fraction,
                        &mean.actor_grad_norm, &mean.critic_grad_norm})
        *f *= inv;
    }
  }
  return mean;
}

}  // namespace geotact
