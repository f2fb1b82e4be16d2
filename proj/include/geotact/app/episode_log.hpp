#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "geotact/app/config.hpp"
#include "geotact/core/error.hpp"
#include "geotact/env/env.hpp"

namespace geotact {

// Text episode log. Layout:
//
//   geotact-episode-log 1
//   config <key> = <value>          one line per config key
//   episode object=<name> seed=<u64> policy=<ref> approach_steps=<n>
//   step <k> <fields...>            k = 0 is the state right after the approach
//   end steps=<n> success=<0|1>
//
// A step line reads
//   step k pose x y angle opening action dx dy dtheta grasp
//   left present lx ly fx fy right present lx ly fx fy reward r d d_t done 0|1 success 0|1
// with every real printed as %.17g so that a re-simulation can be compared
// byte for byte.
inline constexpr const char* kEpisodeLogMagic = "geotact-episode-log 1";

namespace detail {

inline void append_real(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, " %.17g", v);
  out += buf;
}

}  // namespace detail

inline std::string format_step_line(int k, const GraspEnv& env, const Action& a, double reward, bool done, bool success) {
  const GripperState& g = env.world().gripper;
  std::string s = "step " + std::to_string(k) + " pose";
  detail::append_real(s, g.position.x);
  detail::append_real(s, g.position.y);
  detail::append_real(s, g.angle);
  detail::append_real(s, g.opening);
  s += " action " + std::to_string(a.dx) + " " + std::to_string(a.dy) + " " + std::to_string(a.dtheta) + " " + std::to_string(a.grasp);
  for (int side = 0; side < 2; ++side) {
    const FingerSample& f = env.samples()[side];
    s += side == 0 ? " left " : " right ";
    s += f.present ? "1" : "0";
    detail::append_real(s, f.location[0]);
    detail::append_real(s, f.location[1]);
    detail::append_real(s, f.net_force[0]);
    detail::append_real(s, f.net_force[1]);
  }
  s += " reward";
  detail::append_real(s, reward);
  s += " d";
  detail::append_real(s, env.distance());
  s += std::string(" done ") + (done ? "1" : "0") + " success " + (success ? "1" : "0");
  return s;
}

// Accumulates the lines of one episode.
class EpisodeLogWriter {
 public:
  EpisodeLogWriter(const RunConfig& cfg, const std::string& object, std::uint64_t seed, const std::string& policy) {
    lines_.push_back(kEpisodeLogMagic);
    std::istringstream snap(config_snapshot(cfg));
    std::string line;
    while (std::getline(snap, line)) lines_.push_back("config " + line);
    std::string tag = policy;
    std::replace(tag.begin(), tag.end(), ' ', '_');
    lines_.push_back("episode object=" + object + " seed=" + std::to_string(seed) + " policy=" + tag);
  }

  void approach(const GraspEnv& env) {
    lines_.back() += " approach_steps=" + std::to_string(env.approach_steps());
    lines_.push_back(format_step_line(0, env, kApproachAction, 0.0, false, false));
  }

  void step(const GraspEnv& env, const Action& a, const StepResult& r) {
    lines_.push_back(format_step_line(env.steps(), env, a, r.reward, r.done, r.info.grasp_success));
  }

  void finish(const GraspEnv& env, bool success) {
    lines_.push_back("end steps=" + std::to_string(env.steps()) + " success=" + (success ? "1" : "0"));
  }

  std::string text() const {
    std::string out;
    for (const auto& l : lines_) out += l + "\n";
    return out;
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::trunc | std::ios::binary);
    if (!f) throw FormatError("cannot write episode log " + path);
    f << text();
  }

 private:
  std::vector<std::string> lines_;
};

struct ParsedStep {
  int line = 0;  // 1-based line number in the file
  std::string text;
  Action action;
};

struct ParsedLog {
  RunConfig config;
  std::string object;
  std::uint64_t seed = 0;
  std::string policy;
  int approach_steps = 0;
  std::vector<ParsedStep> steps;  // includes step 0
  int end_line = 0;
  std::string end_text;
};

namespace detail {

inline std::string field_value(const std::string& line, const std::string& key, int lineno) {
  const std::string tag = " " + key + "=";
  const auto p = line.find(tag);
  if (p == std::string::npos) throw FormatError("line " + std::to_string(lineno) + ": missing " + key);
  const auto b = p + tag.size();
  const auto e = line.find(' ', b);
  return line.substr(b, e == std::string::npos ? std::string::npos : e - b);
}

}  // namespace detail

inline ParsedLog parse_episode_log(const std::string& text) {
  ParsedLog log;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) { throw FormatError("line " + std::to_string(lineno) + ": " + what); };

  ++lineno;
  if (!std::getline(in, line) || line != kEpisodeLogMagic) fail("not an episode log");
  bool have_episode = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("config ", 0) == 0) {
      if (have_episode) fail("config line after the episode header");
      try {
        apply_config_text(log.config, line.substr(7));
      } catch (const ConfigError& e) {
        fail(e.what());
      }
    } else if (line.rfind("episode ", 0) == 0) {
      if (have_episode) fail("second episode header");
      have_episode = true;
      try {
        const std::string l = " " + line.substr(8);
        log.object = detail::field_value(l, "object", lineno);
        log.seed = std::stoull(detail::field_value(l, "seed", lineno));
        log.policy = detail::field_value(l, "policy", lineno);
        log.approach_steps = std::stoi(detail::field_value(l, "approach_steps", lineno));
        find_shape(log.object).value();
      } catch (const FormatError&) {
        throw;
      } catch (const std::exception&) {
        fail("malformed episode header");
      }
    } else if (line.rfind("step ", 0) == 0) {
      if (!have_episode) fail("step before the episode header");
      std::istringstream ss(line);
      std::string word, pose, act;
      int k = -1;
      double ignore = 0.0;
      Action a;
      ss >> word >> k >> pose >> ignore >> ignore >> ignore >> ignore >> act >> a.dx >> a.dy >> a.dtheta >> a.grasp;
      if (!ss || pose != "pose" || act != "action") fail("malformed step line");
      if (k != static_cast<int>(log.steps.size())) fail("step index out of sequence");
      try {
        a.validate();
      } catch (const UsageError&) {
        fail("action out of range");
      }
      log.steps.push_back({lineno, line, a});
    } else if (line.rfind("end ", 0) == 0) {
      if (log.steps.empty()) fail("end before any step");
      log.end_line = lineno;
      log.end_text = line;
      if (std::getline(in, line) && !line.empty()) {
        ++lineno;
        fail("content after the end line");
      }
      break;
    } else {
      fail("unrecognized line");
    }
  }
  if (!have_episode || log.steps.empty()) fail("log has no episode");
  if (log.end_line == 0) fail("log is truncated (no end line)");
  try {
    log.config.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("logged config is invalid: ") + e.what());
  }
  return log;
}

inline ParsedLog read_episode_log(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open episode log " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_episode_log(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

// Re-runs a logged episode from its seed and actions. `on_state` sees the
// environment after the approach and after every step. Any divergence from
// the logged text is reported with its line number.
template <class OnState>
void replay_episode(const ParsedLog& log, OnState&& on_state) {
  GraspEnv env(log.config.env);
  if (!env.reset(shape_id(log.object), log.seed)) throw FormatError("logged episode is skipped on re-simulation");
  auto check = [](const ParsedStep& st, const std::string& got) {
    if (got != st.text) throw FormatError("line " + std::to_string(st.line) + ": re-simulation diverges from the log");
  };
  if (env.approach_steps() != log.approach_steps) throw FormatError("approach length differs from the log");
  check(log.steps[0], format_step_line(0, env, kApproachAction, 0.0, false, false));
  on_state(env);
  bool success = false;
  for (std::size_t k = 1; k < log.steps.size(); ++k) {
    if (env.done()) throw FormatError("line " + std::to_string(log.steps[k].line) + ": step after the episode ended");
    const Action& a = log.steps[k].action;
    const StepResult r = env.step(a);
    success = r.info.grasp_success;
    check(log.steps[k], format_step_line(env.steps(), env, a, r.reward, r.done, r.info.grasp_success));
    on_state(env);
  }
  const std::string end = "end steps=" + std::to_string(env.steps()) + " success=" + (success ? "1" : "0");
  if (end != log.end_text) throw FormatError("line " + std::to_string(log.end_line) + ": end record differs from re-simulation");
}

}  // namespace geotact
