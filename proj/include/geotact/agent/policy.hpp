#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "geotact/agent/mlp.hpp"
#include "geotact/core/error.hpp"
#include "geotact/core/random.hpp"
#include "geotact/env/action.hpp"
#include "geotact/sensing/sensing.hpp"

namespace geotact {

inline constexpr int kObservationSize = static_cast<int>(ObservationWindow::kFlatSize);
inline constexpr int kLogitCount = 3 + 3 + 3 + 2;
inline constexpr std::array<int, 4> kHeadOffsets{0, 3, 6, 9};

struct PolicyConfig {
  int hidden_width = 256;
  int hidden_layers = 4;
  double hidden_gain = 1.0;
  double actor_output_gain = 0.01;
  double critic_output_gain = 1.0;

  void validate() const {
    if (hidden_width < 1 || hidden_layers < 1) throw ConfigError("agent.hidden_width and agent.hidden_layers must be >= 1");
    if (!(hidden_gain > 0.0) || !(actor_output_gain > 0.0) || !(critic_output_gain > 0.0))
      throw ConfigError("agent init gains must be positive");
  }
};

// Separate actor and critic networks; no weights are shared.
struct ActorCritic {
  Mlp actor;
  Mlp critic;

  friend bool operator==(const ActorCritic&, const ActorCritic&) = default;
};

inline std::vector<int> layer_sizes(const PolicyConfig& cfg, int output) {
  std::vector<int> sizes{kObservationSize};
  for (int i = 0; i < cfg.hidden_layers; ++i) sizes.push_back(cfg.hidden_width);
  sizes.push_back(output);
  return sizes;
}

inline ActorCritic init_params(std::uint64_t seed, const PolicyConfig& cfg = {}) {
  cfg.validate();
  Rng actor_rng(mix_seed(seed, 101));
  Rng critic_rng(mix_seed(seed, 102));
  return {make_mlp(layer_sizes(cfg, kLogitCount), cfg.hidden_gain, cfg.actor_output_gain, actor_rng),
          make_mlp(layer_sizes(cfg, 1), cfg.hidden_gain, cfg.critic_output_gain, critic_rng)};
}

// True when both networks have the layer shapes of `cfg`.
inline bool matches_architecture(const ActorCritic& net, const PolicyConfig& cfg) {
  auto check = [](const Mlp& m, const std::vector<int>& sizes) {
    if (m.layers.size() + 1 != sizes.size()) return false;
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
      if (m.layers[i].w.cols() != sizes[i] || m.layers[i].w.rows() != sizes[i + 1]) return false;
    }
    return true;
  };
  return check(net.actor, layer_sizes(cfg, kLogitCount)) && check(net.critic, layer_sizes(cfg, 1));
}

// Fixed affine input scaling: locations x10 (meters to decimeters), forces
// x0.25, previous actions unchanged.
inline double observation_scale(std::size_t slot) {
  const std::size_t k = slot % ObservationWindow::kRecordWidth;
  if (k >= 12) return 1.0;
  return (k % 6) < 3 ? 10.0 : 0.25;
}

inline Eigen::MatrixXd observation_matrix(const std::vector<const std::vector<double>*>& obs) {
  Eigen::MatrixXd x(kObservationSize, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t j = 0; j < obs.size(); ++j) {
    if (obs[j]->size() != static_cast<std::size_t>(kObservationSize)) throw UsageError("observation must have 160 entries");
    for (int i = 0; i < kObservationSize; ++i) x(i, static_cast<Eigen::Index>(j)) = (*obs[j])[i] * observation_scale(i);
  }
  return x;
}

inline Eigen::MatrixXd observation_matrix(const std::vector<double>& obs) { return observation_matrix(std::vector{&obs}); }

// Log-softmax of one head, computed stably.
inline Eigen::VectorXd log_softmax(const Eigen::VectorXd& z) {
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  return (z.array() - lse).matrix();
}

inline Eigen::VectorXd head_logits(const Eigen::Ref<const Eigen::VectorXd>& logits, int head) {
  return logits.segment(kHeadOffsets[head], kHeadSizes[head]);
}

inline double action_log_prob(const Eigen::Ref<const Eigen::VectorXd>& logits, const std::array<int, 4>& heads) {
  double lp = 0.0;
  for (int h = 0; h < 4; ++h) lp += log_softmax(head_logits(logits, h))(heads[h]);
  return lp;
}

inline double head_entropy(const Eigen::VectorXd& head) {
  const Eigen::VectorXd lp = log_softmax(head);
  return -(lp.array().exp() * lp.array()).sum();
}

struct SampledAction {
  Action action;
  double log_prob = 0.0;
};

// One independent categorical draw per head by inverse CDF; consumes exactly
// four uniforms.
inline SampledAction sample_action(const Eigen::Ref<const Eigen::VectorXd>& logits, Rng& rng) {
  if (!logits.allFinite()) throw NumericError("non-finite policy logits");
  std::array<int, 4> heads{};
  double lp = 0.0;
  for (int h = 0; h < 4; ++h) {
    const Eigen::VectorXd logp = log_softmax(head_logits(logits, h));
    const double u = rng.uniform();
    double cdf = 0.0;
    int pick = kHeadSizes[h] - 1;
    for (int k = 0; k < kHeadSizes[h]; ++k) {
      cdf += std::exp(logp(k));
      if (u < cdf) {
        pick = k;
        break;
      }
    }
    heads[h] = pick;
    lp += logp(pick);
  }
  return {Action::from_heads(heads), lp};
}

// Most likely action; ties go to the lowest index.
inline SampledAction greedy_action(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  if (!logits.allFinite()) throw NumericError("non-finite policy logits");
  std::array<int, 4> heads{};
  for (int h = 0; h < 4; ++h) head_logits(logits, h).maxCoeff(&heads[h]);
  return {Action::from_heads(heads), action_log_prob(logits, heads)};
}

}  // namespace geotact
