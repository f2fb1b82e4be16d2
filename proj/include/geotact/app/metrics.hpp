#pragma once

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "geotact/core/error.hpp"

namespace geotact {

// Mean of the last `window` success flags; partial windows average whatever
// is available.
class RunningSuccess {
 public:
  explicit RunningSuccess(int window = 1000) : window_(window) {
    if (window < 1) throw UsageError("running-success window must be >= 1");
  }

  double push(bool success) {
    recent_.push_back(success);
    hits_ += success ? 1 : 0;
    if (static_cast<int>(recent_.size()) > window_) {
      hits_ -= recent_.front() ? 1 : 0;
      recent_.pop_front();
    }
    return rate();
  }

  double rate() const { return recent_.empty() ? 0.0 : static_cast<double>(hits_) / static_cast<double>(recent_.size()); }
  bool full() const { return static_cast<int>(recent_.size()) == window_; }
  int window() const { return window_; }

 private:
  int window_;
  std::deque<bool> recent_;
  long hits_ = 0;
};

struct EpisodeRecord {
  long episode = 0;     // 1-based completion order
  long env_steps = 0;   // total transitions when the episode finished
  std::string object;
  bool success = false;
  int length = 0;
  double running = 0.0;
  double best = 0.0;     // best running rate so far
  bool window_full = false;
};

class MetricsSeries {
 public:
  explicit MetricsSeries(int window = 1000) : running_(window) {}

  const EpisodeRecord& add(long env_steps, const std::string& object, bool success, int length) {
    EpisodeRecord r;
    r.episode = static_cast<long>(records_.size()) + 1;
    r.env_steps = env_steps;
    r.object = object;
    r.success = success;
    r.length = length;
    r.running = running_.push(success);
    r.window_full = running_.full();
    best_ = std::max(best_, r.running);
    r.best = best_;
    records_.push_back(r);
    return records_.back();
  }

  const std::vector<EpisodeRecord>& records() const { return records_; }
  double best() const { return best_; }
  int window() const { return running_.window(); }

  // Best running rate among points where the window was full.
  double best_full_window() const {
    double b = -1.0;
    for (const auto& r : records_) {
      if (r.window_full) b = std::max(b, r.running);
    }
    return b;
  }

  double final_running() const { return records_.empty() ? 0.0 : records_.back().running; }

 private:
  RunningSuccess running_;
  std::vector<EpisodeRecord> records_;
  double best_ = 0.0;
};

inline constexpr const char* kMetricsHeader = "episode,env_steps,object,success,length,running_success,best_running_success,window_full";

inline void write_metrics_csv(const std::string& path, const MetricsSeries& m) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("cannot write metrics " + path);
  f << kMetricsHeader << "\n";
  char buf[64];
  for (const auto& r : m.records()) {
    f << r.episode << ',' << r.env_steps << ',' << r.object << ',' << (r.success ? 1 : 0) << ',' << r.length << ',';
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", r.running, r.best);
    f << buf << ',' << (r.window_full ? 1 : 0) << "\n";
  }
}

// Reads back the episode list of a metrics CSV (running columns are ignored
// and recomputed by the caller if needed).
inline std::vector<EpisodeRecord> read_metrics_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open metrics " + path);
  std::string line;
  if (!std::getline(f, line) || line != kMetricsHeader) throw FormatError(path + ": unexpected metrics header");
  std::vector<EpisodeRecord> out;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    if (cols.size() != 8) throw FormatError(path + ":" + std::to_string(lineno) + ": expected 8 columns");
    try {
      EpisodeRecord r;
      r.episode = std::stol(cols[0]);
      r.env_steps = std::stol(cols[1]);
      r.object = cols[2];
      r.success = cols[3] == "1";
      r.length = std::stoi(cols[4]);
      r.running = std::stod(cols[5]);
      r.best = std::stod(cols[6]);
      r.window_full = cols[7] == "1";
      out.push_back(r);
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": malformed metrics row");
    }
  }
  return out;
}

}  // namespace geotact
