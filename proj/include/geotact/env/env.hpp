#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "geotact/core/error.hpp"
#include "geotact/core/random.hpp"
#include "geotact/env/action.hpp"
#include "geotact/sensing/sensing.hpp"
#include "geotact/world/world.hpp"

namespace geotact {

struct RewardConfig {
  double alpha = 20.0;
  double beta = 800.0;
  double offset = 0.1;  // meters

  void validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("reward.alpha and reward.beta must be positive");
    if (!(offset > 0.0)) throw ConfigError("reward.offset must be positive");
  }
};

struct EpisodeConfig {
  int max_steps = 100;
  double approach_step = 0.01;

  void validate() const {
    if (max_steps < 1) throw ConfigError("episode.max_steps must be >= 1");
    if (!(approach_step > 0.0) || approach_step > kTranslationPrimitive) throw ConfigError("episode.approach_step must lie in (0, 0.01]");
  }
};

struct EnvConfig {
  WorldConfig world;
  SensorConfig sensor;
  RewardConfig reward;
  EpisodeConfig episode;

  void validate() const {
    world.validate();
    sensor.validate();
    reward.validate();
    episode.validate();
  }
};

// Dense progress term plus the success bonus on a successful grasp step.
inline double compute_reward(double d_t, double d_prev, std::optional<bool> grasp_success, const RewardConfig& cfg) {
  double r = cfg.alpha * (1.0 / (d_t + cfg.offset) - 1.0 / (d_prev + cfg.offset));
  if (grasp_success.value_or(false)) r += cfg.beta;
  return r;
}

struct StepInfo {
  double d_t = 0.0;
  bool grasp_attempted = false;
  bool grasp_success = false;
  GraspFailure grasp_failure = GraspFailure::kNone;
  bool boundary_clamped = false;
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// The action executed while the gripper approaches before the episode starts.
inline constexpr Action kApproachAction{0, 1, 0, 0};

class GraspEnv {
 public:
  explicit GraspEnv(EnvConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  // Builds the world and advances straight ahead until the first pushing
  // contact. Returns nullopt when the gripper reaches the far boundary
  // without one; the episode is then skipped.
  std::optional<std::vector<double>> reset(ShapeId object, std::uint64_t seed) {
    Rng world_rng(mix_seed(seed, 0));
    sensor_rng_ = Rng(mix_seed(seed, 1));
    world_ = build_world(cfg_.world, object, world_rng);
    world_.seed = seed;
    window_ = ObservationWindow{};
    samples_ = {};
    steps_ = 0;
    approach_steps_ = 0;
    live_ = false;
    done_ = true;

    const Vec2 ahead = world_.gripper.forward() * cfg_.episode.approach_step;
    const int limit = static_cast<int>(cfg_.world.workspace_height / cfg_.episode.approach_step) + 2;
    for (int k = 0; k < limit; ++k) {
      StepOutcome out = step_world(world_, ahead, 0.0);
      ++approach_steps_;
      samples_ = sense(out.contacts, cfg_.sensor, cfg_.world.mode, cfg_.world.finger_radius, sensor_rng_);
      if (samples_[0].present || samples_[1].present) {
        window_ = push_step(window_, samples_[0], samples_[1], kApproachAction);
        d_prev_ = distance();
        live_ = true;
        done_ = false;
        return flatten(window_);
      }
      if (out.clamped) break;
    }
    return std::nullopt;
  }

  StepResult step(const Action& action) {
    if (done_) throw UsageError("step called on a finished or skipped episode");
    action.validate();
    StepResult res;
    ++steps_;
    std::optional<bool> success;
    if (action.grasp == 1) {
      const GraspOutcome g = close_gripper(world_);
      success = g.success;
      res.info.grasp_attempted = true;
      res.info.grasp_success = g.success;
      res.info.grasp_failure = g.failure;
      samples_ = sense(g.contacts, cfg_.sensor, cfg_.world.mode, cfg_.world.finger_radius, sensor_rng_);
      done_ = true;
    } else {
      const StepOutcome out = step_world(world_, action.translation(), action.rotation());
      res.info.boundary_clamped = out.clamped;
      samples_ = sense(out.contacts, cfg_.sensor, cfg_.world.mode, cfg_.world.finger_radius, sensor_rng_);
      if (steps_ >= cfg_.episode.max_steps) done_ = true;
    }
    window_ = push_step(window_, samples_[0], samples_[1], action);
    const double d = distance();
    res.reward = compute_reward(d, d_prev_, success, cfg_.reward);
    d_prev_ = d;
    res.info.d_t = d;
    res.done = done_;
    res.observation = flatten(window_);
    return res;
  }

  // Gripper center to true object centroid.
  double distance() const { return norm(world_.gripper.position - world_.object.position); }

  const EnvConfig& config() const { return cfg_; }
  const WorldState& world() const { return world_; }
  const ObservationWindow& window() const { return window_; }
  const std::array<FingerSample, 2>& samples() const { return samples_; }
  int steps() const { return steps_; }
  int approach_steps() const { return approach_steps_; }
  bool live() const { return live_; }
  bool done() const { return done_; }

 private:
  EnvConfig cfg_;
  WorldState world_;
  Rng sensor_rng_;
  ObservationWindow window_;
  std::array<FingerSample, 2> samples_{};
  double d_prev_ = 0.0;
  int steps_ = 0;
  int approach_steps_ = 0;
  bool live_ = false;
  bool done_ = true;
};

}  // namespace geotact
