#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "geotact/agent/policy.hpp"
#include "geotact/agent/ppo.hpp"
#include "geotact/core/error.hpp"
#include "geotact/env/env.hpp"
#include "geotact/world/shapes.hpp"

namespace geotact {

struct TrainConfig {
  long total_steps = 500000;
  int num_envs = 8;
  // Write an intermediate checkpoint every this many updates (0 = final only).
  int checkpoint_every = 0;
  int metrics_window = 1000;

  void validate() const {
    if (total_steps < 0) throw ConfigError("train.total_steps must be non-negative");
    if (num_envs < 1) throw ConfigError("train.num_envs must be >= 1");
    if (checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be non-negative");
    if (metrics_window < 1) throw ConfigError("train.metrics_window must be >= 1");
  }
};

struct EvalConfig {
  int trials = 200;
  // Skipped episodes are redrawn up to this multiple of `trials` attempts.
  int max_attempt_factor = 3;
  std::vector<double> noise_grid{0.2, 1.0, 2.0, 3.0};

  void validate() const {
    if (trials < 0) throw ConfigError("eval.trials must be non-negative");
    if (max_attempt_factor < 1) throw ConfigError("eval.max_attempt_factor must be >= 1");
    for (double x : noise_grid) {
      if (!(x >= 0.0)) throw ConfigError("eval.noise_grid values must be non-negative");
    }
  }
};

struct RunConfig {
  EnvConfig env;
  PolicyConfig agent;
  PpoConfig ppo;
  TrainConfig train;
  EvalConfig eval;
  std::uint64_t seed = 0;
  std::vector<std::string> objects{"square"};

  WorldMode mode() const { return env.world.mode; }

  std::vector<ShapeId> object_ids() const {
    std::vector<ShapeId> ids;
    for (const auto& o : objects) ids.push_back(shape_id(o));
    return ids;
  }

  void validate() const {
    env.validate();
    agent.validate();
    ppo.validate();
    train.validate();
    eval.validate();
    if (objects.empty()) throw ConfigError("objects must list at least one shape");
    object_ids();
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    std::string item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view text, std::string_view key) {
  const std::string t = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("invalid value '" + t + "' for " + std::string(key));
  return value;
}

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[40];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

}  // namespace detail

// Every tunable as a key bound to a field of one RunConfig. The order here is
// the order of the written snapshot.
class ConfigKeys {
 public:
  explicit ConfigKeys(RunConfig& c) {
    entry("mode", [&c](std::string_view v) { c.env.world.mode = parse_world_mode(detail::trim(v)); },
          [&c] { return std::string(to_string(c.env.world.mode)); });
    bind("seed", c.seed);
    entry(
        "objects",
        [&c](std::string_view v) {
          auto names = detail::split_list(v);
          for (const auto& n : names) shape_id(n);
          c.objects = std::move(names);
        },
        [&c] { return detail::join(c.objects); });

    WorldConfig& w = c.env.world;
    bind("world.particle_count", w.particle_count);
    bind("world.particle_radius", w.particle_radius);
    bind("world.workspace_width", w.workspace_width);
    bind("world.workspace_height", w.workspace_height);
    bind("world.contact_stiffness", w.contact_stiffness);
    bind("world.friction_mu", w.friction_mu);
    bind("world.substeps", w.substeps);
    bind("world.resolution_iterations", w.resolution_iterations);
    bind("world.particle_resistance", w.particle_resistance);
    bind("world.object_resistance", w.object_resistance);
    bind("world.finger_radius", w.finger_radius);
    bind("world.max_opening", w.max_opening);
    bind("world.approach_distance", w.approach_distance);
    bind("world.lateral_jitter", w.lateral_jitter);
    bind("world.close_decrement", w.close_decrement);
    bind("world.grip_block_force", w.grip_block_force);
    bind("world.interposed_force", w.interposed_force);
    bind("world.convergence_tolerance", w.convergence_tolerance);

    SensorConfig& s = c.env.sensor;
    bind("sensor.force_threshold", s.force_threshold);
    bind("sensor.loc_noise_halfwidth", s.loc_noise_halfwidth);
    bind("sensor.force_noise_halfwidth", s.force_noise_halfwidth);
    bind("sensor.spurious_rate", s.spurious_rate);
    bind("sensor.spurious_force_min", s.spurious_force_min);
    bind("sensor.spurious_force_max", s.spurious_force_max);

    bind("reward.alpha", c.env.reward.alpha);
    bind("reward.beta", c.env.reward.beta);
    bind("reward.offset", c.env.reward.offset);
    bind("episode.max_steps", c.env.episode.max_steps);
    bind("episode.approach_step", c.env.episode.approach_step);

    PpoConfig& p = c.ppo;
    bind("ppo.gamma", p.gamma);
    bind("ppo.gae_lambda", p.gae_lambda);
    bind("ppo.clip_epsilon", p.clip_epsilon);
    bind("ppo.epochs_per_batch", p.epochs_per_batch);
    bind("ppo.minibatch_size", p.minibatch_size);
    bind("ppo.learning_rate", p.learning_rate);
    bind("ppo.value_coef", p.value_coef);
    bind("ppo.entropy_coef", p.entropy_coef);
    bind("ppo.rollout_steps", p.rollout_steps);
    bind("ppo.grad_clip_norm", p.grad_clip_norm);
    bind("ppo.reward_scale", p.reward_scale);
    bind("ppo.adam_beta1", p.adam_beta1);
    bind("ppo.adam_beta2", p.adam_beta2);
    bind("ppo.adam_epsilon", p.adam_epsilon);

    bind("agent.hidden_width", c.agent.hidden_width);
    bind("agent.hidden_layers", c.agent.hidden_layers);
    bind("agent.hidden_gain", c.agent.hidden_gain);
    bind("agent.actor_output_gain", c.agent.actor_output_gain);
    bind("agent.critic_output_gain", c.agent.critic_output_gain);

    bind("train.total_steps", c.train.total_steps);
    bind("train.num_envs", c.train.num_envs);
    bind("train.checkpoint_every", c.train.checkpoint_every);
    bind("train.metrics_window", c.train.metrics_window);

    bind("eval.trials", c.eval.trials);
    bind("eval.max_attempt_factor", c.eval.max_attempt_factor);
    entry(
        "eval.noise_grid",
        [&c](std::string_view v) {
          c.eval.noise_grid.clear();
          for (const auto& x : detail::split_list(v)) c.eval.noise_grid.push_back(detail::parse_number<double>(x, "eval.noise_grid"));
        },
        [&c] {
          std::vector<std::string> items;
          for (double x : c.eval.noise_grid) items.push_back(detail::format_double(x));
          return detail::join(items);
        });
  }

  bool has(std::string_view key) const { return find(key) != nullptr; }

  void set(std::string_view key, std::string_view value) {
    const Entry* e = find(key);
    if (e == nullptr) throw ConfigError("unknown config key '" + std::string(key) + "'");
    e->set(value);
  }

  std::string get(std::string_view key) const {
    const Entry* e = find(key);
    if (e == nullptr) throw ConfigError("unknown config key '" + std::string(key) + "'");
    return e->get();
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.key);
    return out;
  }

 private:
  struct Entry {
    std::string key;
    std::function<void(std::string_view)> set;
    std::function<std::string()> get;
  };

  void entry(std::string key, std::function<void(std::string_view)> set, std::function<std::string()> get) {
    entries_.push_back({std::move(key), std::move(set), std::move(get)});
  }

  template <class T>
  void bind(std::string key, T& field) {
    const std::string k = key;
    if constexpr (std::is_same_v<T, double>) {
      entry(key, [&field, k](std::string_view v) { field = detail::parse_number<double>(v, k); },
            [&field] { return detail::format_double(field); });
    } else {
      entry(key, [&field, k](std::string_view v) { field = detail::parse_number<T>(v, k); }, [&field] { return std::to_string(field); });
    }
  }

  const Entry* find(std::string_view key) const {
    for (const auto& e : entries_) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }

  std::vector<Entry> entries_;
};

// Applies `key = value` lines; '#' starts a comment. Unknown keys and
// malformed lines are errors that name the line.
inline void apply_config_text(RunConfig& cfg, std::string_view text, std::string_view origin = "config") {
  ConfigKeys keys(cfg);
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    try {
      keys.set(detail::trim(std::string_view(t).substr(0, eq)), std::string_view(t).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  apply_config_text(base, ss.str(), path);
  return base;
}

// Every key with its resolved value, one per line.
inline std::string config_snapshot(const RunConfig& cfg) {
  RunConfig copy = cfg;
  ConfigKeys keys(copy);
  std::string out;
  for (const auto& k : keys.keys()) out += k + " = " + keys.get(k) + "\n";
  return out;
}

}  // namespace geotact
