#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "geotact/core/error.hpp"
#include "geotact/core/random.hpp"
#include "geotact/env/action.hpp"
#include "geotact/world/types.hpp"

namespace geotact {

struct SensorConfig {
  double force_threshold = 3.0;  // newtons; the physical rig uses 4.0
  double loc_noise_halfwidth = 0.01;
  double force_noise_halfwidth = 0.2;
  // False pushing contacts per finger per step, granular mode only.
  double spurious_rate = 0.02;
  double spurious_force_min = 3.0;
  double spurious_force_max = 3.5;

  double effective_spurious_rate(WorldMode mode) const { return mode == WorldMode::kGranular ? spurious_rate : 0.0; }

  void validate() const {
    if (force_threshold < 0.0 || loc_noise_halfwidth < 0.0 || force_noise_halfwidth < 0.0)
      throw ConfigError("sensor thresholds and noise halfwidths must be non-negative");
    if (spurious_rate < 0.0 || spurious_rate > 1.0) throw ConfigError("sensor.spurious_rate must lie in [0, 1]");
    if (spurious_force_min < 0.0 || spurious_force_max < spurious_force_min)
      throw ConfigError("sensor.spurious_force_min/max must satisfy 0 <= min <= max");
  }
};

using Vec3 = std::array<double, 3>;

// Contact summary of one finger in the finger frame. The third component is
// out of plane and always zero here.
struct FingerSample {
  Vec3 location{};
  Vec3 net_force{};
  bool present = false;

  friend bool operator==(const FingerSample&, const FingerSample&) = default;
};

inline FingerSample make_sample(Vec2 location, Vec2 force) { return {{location.x, location.y, 0.0}, {force.x, force.y, 0.0}, true}; }

// Keeps events strictly above the threshold. The surviving forces are summed
// and the location is that of the strongest survivor.
inline FingerSample filter_and_select(std::span<const ContactEvent> contacts, FingerSide side, const SensorConfig& cfg) {
  const ContactEvent* strongest = nullptr;
  Vec2 net;
  for (const auto& e : contacts) {
    if (e.side != side || !(e.force_magnitude > cfg.force_threshold)) continue;
    net += e.normal * e.force_magnitude;
    if (strongest == nullptr || e.force_magnitude > strongest->force_magnitude) strongest = &e;
  }
  if (strongest == nullptr) return {};
  return make_sample(strongest->location, net);
}

// Adds independent uniform noise to the in-plane components of a present
// sample, drawing location x, location y, force x, force y in that order.
// `Source` needs `double uniform(double lo, double hi)`.
template <class Source>
FingerSample apply_noise(FingerSample sample, const SensorConfig& cfg, Source& source) {
  if (!sample.present) return sample;
  const double lw = cfg.loc_noise_halfwidth;
  const double fw = cfg.force_noise_halfwidth;
  sample.location[0] += source.uniform(-lw, lw);
  sample.location[1] += source.uniform(-lw, lw);
  sample.net_force[0] += source.uniform(-fw, fw);
  sample.net_force[1] += source.uniform(-fw, fw);
  return sample;
}

// With probability `rate`, turns an absent sample into a plausible pushing
// contact: a point on the finger rim and an inward force just above the filter.
inline FingerSample inject_spurious(FingerSample sample, double rate, double finger_radius, const SensorConfig& cfg, Rng& rng) {
  if (sample.present || rate <= 0.0 || !rng.bernoulli(rate)) return sample;
  const Vec2 outward = unit_from_angle(rng.uniform(0.0, 2.0 * M_PI));
  const double magnitude = rng.uniform(cfg.spurious_force_min, cfg.spurious_force_max);
  return make_sample(outward * finger_radius, outward * -magnitude);
}

// Full per-step pipeline for both fingers: filter, spurious injection, noise.
inline std::array<FingerSample, 2> sense(std::span<const ContactEvent> contacts, const SensorConfig& cfg, WorldMode mode,
                                         double finger_radius, Rng& rng) {
  std::array<FingerSample, 2> out;
  for (int side = 0; side < 2; ++side) {
    FingerSample s = filter_and_select(contacts, static_cast<FingerSide>(side), cfg);
    s = inject_spurious(s, cfg.effective_spurious_rate(mode), finger_radius, cfg, rng);
    out[side] = apply_noise(s, cfg, rng);
  }
  return out;
}

struct StepRecord {
  FingerSample left;
  FingerSample right;
  std::array<double, 4> prev_action{};

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

inline std::array<double, 4> action_vector(const Action& a) {
  return {static_cast<double>(a.dx), static_cast<double>(a.dy), static_cast<double>(a.dtheta), static_cast<double>(a.grasp)};
}

// The last ten step records, oldest first.
class ObservationWindow {
 public:
  static constexpr std::size_t kCapacity = 10;
  static constexpr std::size_t kRecordWidth = 2 * (3 + 3) + 4;
  static constexpr std::size_t kFlatSize = kCapacity * kRecordWidth;

  const StepRecord& at(std::size_t age_order) const { return records_[(head_ + age_order) % kCapacity]; }

  ObservationWindow pushed(const StepRecord& r) const {
    ObservationWindow w = *this;
    w.records_[w.head_] = r;
    w.head_ = (w.head_ + 1) % kCapacity;
    return w;
  }

  friend bool operator==(const ObservationWindow& a, const ObservationWindow& b) {
    for (std::size_t i = 0; i < kCapacity; ++i) {
      if (!(a.at(i) == b.at(i))) return false;
    }
    return true;
  }

 private:
  std::array<StepRecord, kCapacity> records_{};
  std::size_t head_ = 0;
};

inline ObservationWindow push_step(const ObservationWindow& w, const FingerSample& left, const FingerSample& right, const Action& prev) {
  return w.pushed(StepRecord{left, right, action_vector(prev)});
}

// Layout per record, oldest to newest:
//   [left.loc(3), left.force(3), right.loc(3), right.force(3), prev_action(4)]
inline std::vector<double> flatten(const ObservationWindow& w) {
  std::vector<double> out;
  out.reserve(ObservationWindow::kFlatSize);
  for (std::size_t i = 0; i < ObservationWindow::kCapacity; ++i) {
    const StepRecord& r = w.at(i);
    for (const FingerSample* s : {&r.left, &r.right}) {
      out.insert(out.end(), s->location.begin(), s->location.end());
      out.insert(out.end(), s->net_force.begin(), s->net_force.end());
    }
    out.insert(out.end(), r.prev_action.begin(), r.prev_action.end());
  }
  return out;
}

}  // namespace geotact
