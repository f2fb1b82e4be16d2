#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geotact/agent/checkpoint.hpp"
#include "geotact/agent/policy.hpp"
#include "geotact/app/config.hpp"
#include "geotact/app/episode_log.hpp"
#include "geotact/baselines/a2g.hpp"
#include "geotact/core/error.hpp"
#include "geotact/core/random.hpp"
#include "geotact/env/env.hpp"

namespace geotact {

// Number of consecutive same-finger contacts the push variant waits for.
inline constexpr int kA2gPushContacts = 5;

// What drives the gripper: a learned network (greedy actions) or one of the
// two heuristics.
class Controller {
 public:
  static Controller learned(std::shared_ptr<const ActorCritic> net, std::string name) {
    Controller c;
    c.net_ = std::move(net);
    c.name_ = std::move(name);
    return c;
  }

  static Controller a2g(int consecutive_required) {
    Controller c;
    c.required_ = consecutive_required;
    c.name_ = consecutive_required == 1 ? "a2g" : "a2g-push";
    return c;
  }

  // "a2g", "a2g-push" or a checkpoint path.
  static Controller from_ref(const std::string& ref, const PolicyConfig& arch) {
    if (ref == "a2g") return a2g(1);
    if (ref == "a2g-push") return a2g(kA2gPushContacts);
    auto net = std::make_shared<ActorCritic>(load_checkpoint(ref));
    if (!matches_architecture(*net, arch)) throw ConfigError("checkpoint " + ref + " does not match the configured architecture");
    return learned(std::move(net), ref);
  }

  void begin_episode() { a2g_ = a2g_reset(required_); }

  Action act(const GraspEnv& env, const std::vector<double>& obs) {
    if (net_) {
      const Eigen::MatrixXd logits = forward(net_->actor, observation_matrix(obs));
      return greedy_action(logits.col(0)).action;
    }
    auto [a, next] = a2g_step(a2g_, env.samples(), env.world().gripper);
    a2g_ = next;
    return a;
  }

  const std::string& name() const { return name_; }
  bool is_learned() const { return net_ != nullptr; }

 private:
  std::shared_ptr<const ActorCritic> net_;
  int required_ = 1;
  A2gState a2g_;
  std::string name_;
};

struct EpisodeOutcome {
  bool skipped = false;
  bool success = false;
  int steps = 0;
  double total_reward = 0.0;
};

// Runs one evaluation episode. When `log` is given it receives every step.
inline EpisodeOutcome run_episode(GraspEnv& env, Controller& ctl, ShapeId object, std::uint64_t seed,
                                  EpisodeLogWriter* log = nullptr) {
  EpisodeOutcome out;
  std::optional<std::vector<double>> obs = env.reset(object, seed);
  if (!obs) {
    out.skipped = true;
    return out;
  }
  if (log) log->approach(env);
  ctl.begin_episode();
  while (!env.done()) {
    const Action a = ctl.act(env, *obs);
    StepResult r = env.step(a);
    if (log) log->step(env, a, r);
    out.total_reward += r.reward;
    out.success = r.info.grasp_success;
    *obs = std::move(r.observation);
  }
  out.steps = env.steps();
  if (log) log->finish(env, out.success);
  return out;
}

inline std::uint64_t eval_episode_seed(std::uint64_t run_seed, const std::string& object, std::uint64_t k) {
  return mix_seed(run_seed, stable_hash(object), k);
}

struct ObjectEval {
  std::string object;
  int trials = 0;
  int successes = 0;
  int skipped = 0;

  double success_rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

struct EvalTable {
  std::string policy;
  double force_noise = 0.0;
  std::vector<ObjectEval> rows;
  // Episode logs kept on request: (file name, log text).
  std::vector<std::pair<std::string, std::string>> logs;

  // Mean of the per-object success rates.
  double average() const {
    if (rows.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : rows) s += r.success_rate();
    return s / static_cast<double>(rows.size());
  }
};

// Evaluates `ctl` on every configured object. Each object gets `trials`
// completed episodes; skipped episodes are redrawn with the next seed, up to
// max_attempt_factor * trials draws in total. The first `log_episodes`
// completed episodes of each object are logged.
inline EvalTable evaluate(const RunConfig& cfg, Controller ctl, int log_episodes = 0) {
  cfg.validate();
  EvalTable table;
  table.policy = ctl.name();
  table.force_noise = cfg.env.sensor.force_noise_halfwidth;
  GraspEnv env(cfg.env);
  const long max_draws = static_cast<long>(cfg.eval.trials) * cfg.eval.max_attempt_factor;
  for (const auto& name : cfg.objects) {
    const ShapeId id = shape_id(name);
    ObjectEval row;
    row.object = name;
    for (long k = 0; row.trials < cfg.eval.trials && k < max_draws; ++k) {
      const std::uint64_t seed = eval_episode_seed(cfg.seed, name, static_cast<std::uint64_t>(k));
      std::optional<EpisodeLogWriter> log;
      if (row.trials < log_episodes) log.emplace(cfg, name, seed, ctl.name());
      const EpisodeOutcome o = run_episode(env, ctl, id, seed, log ? &*log : nullptr);
      if (o.skipped) {
        ++row.skipped;
        continue;
      }
      if (log) table.logs.emplace_back(name + "_" + std::to_string(row.trials) + ".log", log->text());
      ++row.trials;
      row.successes += o.success ? 1 : 0;
    }
    table.rows.push_back(row);
  }
  return table;
}

inline constexpr const char* kEvalHeader = "object,trials,successes,success_rate,skipped";

inline std::string format_rate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// Per-object rows followed by an "average" row. With no trials requested the
// table holds only the header.
inline std::string eval_csv(const EvalTable& t) {
  std::string out = std::string(kEvalHeader) + "\n";
  int trials = 0, successes = 0, skipped = 0;
  bool any = false;
  for (const auto& r : t.rows) {
    if (r.trials == 0 && r.skipped == 0) continue;
    any = true;
    out += r.object + "," + std::to_string(r.trials) + "," + std::to_string(r.successes) + "," + format_rate(r.success_rate()) + "," +
           std::to_string(r.skipped) + "\n";
    trials += r.trials;
    successes += r.successes;
    skipped += r.skipped;
  }
  if (any) out += "average," + std::to_string(trials) + "," + std::to_string(successes) + "," + format_rate(t.average()) + "," +
                  std::to_string(skipped) + "\n";
  return out;
}

inline constexpr const char* kSweepHeader = "policy,force_noise,object,trials,successes,success_rate,skipped";

inline std::string sweep_csv(const std::vector<EvalTable>& cells) {
  std::string out = std::string(kSweepHeader) + "\n";
  for (const auto& t : cells) {
    const std::string prefix = t.policy + "," + detail::format_double(t.force_noise) + ",";
    int trials = 0, successes = 0, skipped = 0;
    for (const auto& r : t.rows) {
      out += prefix + r.object + "," + std::to_string(r.trials) + "," + std::to_string(r.successes) + "," + format_rate(r.success_rate()) +
             "," + std::to_string(r.skipped) + "\n";
      trials += r.trials;
      successes += r.successes;
      skipped += r.skipped;
    }
    if (!t.rows.empty())
      out += prefix + "average," + std::to_string(trials) + "," + std::to_string(successes) + "," + format_rate(t.average()) + "," +
             std::to_string(skipped) + "\n";
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc | std::ios::binary);
  if (!f) throw FormatError("cannot write " + path);
  f << text;
  if (!f) throw FormatError("failed writing " + path);
}

}  // namespace geotact
