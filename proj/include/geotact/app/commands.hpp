#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "geotact/agent/checkpoint.hpp"
#include "geotact/agent/policy.hpp"
#include "geotact/app/config.hpp"
#include "geotact/app/episode_log.hpp"
#include "geotact/app/evaluate.hpp"
#include "geotact/app/metrics.hpp"
#include "geotact/app/render.hpp"
#include "geotact/app/trainer.hpp"
#include "geotact/core/error.hpp"

namespace geotact {

// Everything a subcommand may read from the command line. Unset optionals
// leave the config file (or the built-in default) in charge.
struct CommandOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::vector<std::string> policies;  // eval uses the first, sweep-noise all
  std::optional<std::vector<std::string>> objects;
  std::optional<int> trials;
  std::optional<double> force_noise;
  std::optional<std::vector<double>> noise_grid;
  std::optional<long> steps;
  std::string from_checkpoint;  // finetune
  std::string input_path;       // replay log or metrics CSV
  int log_episodes = 1;         // eval: episode logs kept per object
  std::vector<std::string> overrides;  // extra key=value pairs
};

inline constexpr const char* kConfigSnapshotName = "config.txt";
inline constexpr const char* kCheckpointName = "policy.ckpt";
inline constexpr const char* kMetricsName = "metrics.csv";
inline constexpr const char* kEvalName = "eval.csv";
inline constexpr const char* kSweepName = "sweep.csv";

// Defaults, then the config file, then --set overrides, then dedicated flags.
inline RunConfig resolve_config(const CommandOptions& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = load_config_file(o.config_path);
  for (const auto& kv : o.overrides) apply_config_text(cfg, kv, "--set");
  if (o.seed) cfg.seed = *o.seed;
  if (o.objects) cfg.objects = *o.objects;
  if (o.trials) cfg.eval.trials = *o.trials;
  if (o.force_noise) cfg.env.sensor.force_noise_halfwidth = *o.force_noise;
  if (o.noise_grid) cfg.eval.noise_grid = *o.noise_grid;
  if (o.steps) cfg.train.total_steps = *o.steps;
  cfg.validate();
  return cfg;
}

inline std::filesystem::path prepare_out_dir(const std::string& dir, const RunConfig& cfg) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  write_text_file((p / kConfigSnapshotName).string(), config_snapshot(cfg));
  return p;
}

namespace detail {

inline TrainOutcome run_training(const RunConfig& cfg, ActorCritic init, const std::filesystem::path& out, std::ostream& log) {
  const TrainOutcome res = train_policy(cfg, std::move(init), [&](const UpdateRecord& r, const ActorCritic& net) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "update %d  steps %ld  episodes %ld  running_success %.3f  entropy %.3f\n", r.update, r.env_steps,
                  r.episodes, r.running_success, r.loss.entropy);
    log << buf << std::flush;
    if (cfg.train.checkpoint_every > 0 && r.update % cfg.train.checkpoint_every == 0) {
      char name[48];
      std::snprintf(name, sizeof name, "policy_update%05d.ckpt", r.update);
      save_checkpoint((out / name).string(), net);
    }
  });
  save_checkpoint((out / kCheckpointName).string(), res.net);
  write_metrics_csv((out / kMetricsName).string(), res.metrics);
  if (res.aborted) throw NumericError("non-finite loss; training aborted with partial artifacts in " + out.string());
  return res;
}

}  // namespace detail

// PPO from freshly initialized weights in the configured mode.
inline TrainOutcome cmd_train(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const auto out = prepare_out_dir(out_dir, cfg);
  return detail::run_training(cfg, init_params(cfg.seed, cfg.agent), out, log);
}

// Continues training a saved policy in granular mode with a fresh optimizer.
inline TrainOutcome cmd_finetune(const std::string& from_checkpoint, RunConfig cfg, const std::string& out_dir, std::ostream& log) {
  if (from_checkpoint.empty()) throw UsageError("finetune needs --from CHECKPOINT");
  cfg.env.world.mode = WorldMode::kGranular;
  ActorCritic init = load_checkpoint(from_checkpoint);
  if (!matches_architecture(init, cfg.agent)) throw ConfigError("checkpoint " + from_checkpoint + " does not match the configured architecture");
  const auto out = prepare_out_dir(out_dir, cfg);
  return detail::run_training(cfg, std::move(init), out, log);
}

inline EvalTable cmd_eval(const std::string& policy_ref, const RunConfig& cfg, const std::string& out_dir, int log_episodes = 1) {
  Controller ctl = Controller::from_ref(policy_ref, cfg.agent);
  const auto out = prepare_out_dir(out_dir, cfg);
  EvalTable t = evaluate(cfg, std::move(ctl), log_episodes);
  write_text_file((out / kEvalName).string(), eval_csv(t));
  if (!t.logs.empty()) {
    std::filesystem::create_directories(out / "logs");
    for (const auto& [name, text] : t.logs) write_text_file((out / "logs" / name).string(), text);
  }
  return t;
}

inline std::vector<EvalTable> cmd_sweep_noise(const std::vector<std::string>& policy_refs, const RunConfig& cfg, const std::string& out_dir) {
  if (policy_refs.empty()) throw UsageError("sweep-noise needs at least one --policy");
  std::vector<Controller> controllers;
  for (const auto& ref : policy_refs) controllers.push_back(Controller::from_ref(ref, cfg.agent));
  const auto out = prepare_out_dir(out_dir, cfg);
  std::vector<EvalTable> cells;
  for (const auto& ctl : controllers) {
    for (double noise : cfg.eval.noise_grid) {
      RunConfig c = cfg;
      c.env.sensor.force_noise_halfwidth = noise;
      cells.push_back(evaluate(c, ctl));
    }
  }
  write_text_file((out / kSweepName).string(), sweep_csv(cells));
  return cells;
}

// Re-simulates a log and writes one frame for the initial state and one per
// step. Returns the number of frames.
inline int cmd_replay(const std::string& log_path, const std::string& frames_dir) {
  const ParsedLog log = read_episode_log(log_path);
  std::vector<Image> frames;
  try {
    replay_episode(log, [&](const GraspEnv& env) { frames.push_back(render_frame(env.world(), env.samples())); });
  } catch (const FormatError& e) {
    throw FormatError(log_path + ": " + e.what());
  }
  std::filesystem::create_directories(frames_dir);
  for (std::size_t i = 0; i < frames.size(); ++i) frames[i].save((std::filesystem::path(frames_dir) / frame_name(static_cast<int>(i))).string());
  return static_cast<int>(frames.size());
}

struct MetricsSummary {
  long episodes = 0;
  double final_running = 0.0;
  double best_running = 0.0;
  double best_full_window = -1.0;
  long last_env_steps = 0;
  std::vector<std::pair<std::string, std::pair<long, long>>> per_object;  // (name, (successes, episodes))
};

// Recomputes the running statistics of a training metrics file.
inline MetricsSummary summarize_metrics(const std::vector<EpisodeRecord>& records, int window) {
  MetricsSeries m(window);
  MetricsSummary s;
  for (const auto& r : records) {
    m.add(r.env_steps, r.object, r.success, r.length);
    auto it = std::find_if(s.per_object.begin(), s.per_object.end(), [&](const auto& e) { return e.first == r.object; });
    if (it == s.per_object.end()) {
      s.per_object.push_back({r.object, {0, 0}});
      it = s.per_object.end() - 1;
    }
    it->second.first += r.success ? 1 : 0;
    it->second.second += 1;
    s.last_env_steps = r.env_steps;
  }
  s.episodes = static_cast<long>(records.size());
  s.final_running = m.final_running();
  s.best_running = m.best();
  s.best_full_window = m.best_full_window();
  return s;
}

inline std::string metrics_summary_text(const MetricsSummary& s) {
  char buf[200];
  std::string out;
  std::snprintf(buf, sizeof buf, "episodes %ld\nenv_steps %ld\nfinal_running_success %.4f\nbest_running_success %.4f\n", s.episodes,
                s.last_env_steps, s.final_running, s.best_running);
  out += buf;
  if (s.best_full_window >= 0.0) {
    std::snprintf(buf, sizeof buf, "best_full_window_success %.4f\n", s.best_full_window);
  } else {
    std::snprintf(buf, sizeof buf, "best_full_window_success n/a\n");
  }
  out += buf;
  for (const auto& [name, counts] : s.per_object) {
    std::snprintf(buf, sizeof buf, "object %s %ld/%ld\n", name.c_str(), counts.first, counts.second);
    out += buf;
  }
  return out;
}

inline MetricsSummary cmd_metrics(const std::string& metrics_path, const RunConfig& cfg, std::ostream& os) {
  const MetricsSummary s = summarize_metrics(read_metrics_csv(metrics_path), cfg.train.metrics_window);
  os << metrics_summary_text(s);
  return s;
}

}  // namespace geotact
