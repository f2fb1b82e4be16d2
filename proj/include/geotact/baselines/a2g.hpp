#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "geotact/core/error.hpp"
#include "geotact/env/action.hpp"
#include "geotact/sensing/sensing.hpp"
#include "geotact/world/types.hpp"
#include "geotact/world/world.hpp"

namespace geotact {

enum class A2gPhase { kApproach, kAlign, kGrasp };

inline const char* to_string(A2gPhase p) {
  switch (p) {
    case A2gPhase::kApproach:
      return "approach";
    case A2gPhase::kAlign:
      return "align";
    case A2gPhase::kGrasp:
      return "grasp";
  }
  return "?";
}

inline constexpr double kAlignTolerance = 7.5 * M_PI / 180.0;
// Up to 12 turns of 15 degrees plus a few steps for the center to catch up
// with the pivot.
inline constexpr int kMaxAlignSteps = 16;

// Align-to-grasp state machine. After `consecutive_required` pushing contacts
// in a row on one finger it turns the closing axis toward the contact force,
// pivoting about that finger so the object ends up between the fingers, then
// closes.
struct A2gState {
  A2gPhase phase = A2gPhase::kApproach;
  double target_angle = 0.0;
  int consecutive_required = 1;
  int consecutive_count = 0;
  std::optional<FingerSide> counted_finger;
  int align_steps = 0;
  // Finger center held fixed while aligning, world frame.
  Vec2 pivot;

  friend bool operator==(const A2gState&, const A2gState&) = default;
};

inline A2gState a2g_reset(int consecutive_required = 1) {
  if (consecutive_required < 1) throw UsageError("A2G needs at least one contact to trigger");
  A2gState s;
  s.consecutive_required = consecutive_required;
  return s;
}

inline int round_to_grid(double meters) { return std::clamp(static_cast<int>(std::lround(meters / kTranslationPrimitive)), -1, 1); }

// Closing-axis heading that points from the contacting finger toward the
// object, given the force on that finger in the world frame.
inline double a2g_target_angle(FingerSide side, Vec2 world_force) {
  const Vec2 toward = side == FingerSide::kLeft ? -world_force : world_force;
  return std::atan2(toward.y, toward.x);
}

inline std::pair<Action, A2gState> a2g_step(A2gState s, const std::array<FingerSample, 2>& samples, const GripperState& gripper) {
  if (s.phase == A2gPhase::kApproach) {
    std::optional<FingerSide> touching;
    double best = -1.0;
    for (int side = 0; side < 2; ++side) {
      const FingerSample& f = samples[side];
      if (!f.present) continue;
      const double mag = std::hypot(f.net_force[0], f.net_force[1]);
      if (mag > best) {
        best = mag;
        touching = static_cast<FingerSide>(side);
      }
    }
    if (!touching) {
      s.consecutive_count = 0;
      s.counted_finger.reset();
    } else if (s.counted_finger == touching) {
      s.consecutive_count = std::min(s.consecutive_count + 1, s.consecutive_required);
    } else {
      s.counted_finger = touching;
      s.consecutive_count = 1;
    }
    if (s.consecutive_count >= s.consecutive_required) {
      const FingerSample& f = samples[static_cast<int>(*touching)];
      const Vec2 world_force = rotate({f.net_force[0], f.net_force[1]}, gripper.angle);
      s.target_angle = a2g_target_angle(*touching, world_force);
      s.pivot = fingers(gripper, 0.0)[static_cast<int>(*touching)].center;
      s.phase = A2gPhase::kAlign;
    } else {
      const Vec2 fwd = gripper.forward();
      return {Action{static_cast<int>(std::lround(fwd.x)), static_cast<int>(std::lround(fwd.y)), 0, 0}, s};
    }
  }

  if (s.phase == A2gPhase::kAlign) {
    const double error = wrap_angle(s.target_angle - gripper.angle);
    int turn = 0;
    if (std::abs(error) > kAlignTolerance) turn = error > 0.0 ? 1 : -1;
    const double next_angle = gripper.angle + turn * kRotationPrimitive;
    const double sign = *s.counted_finger == FingerSide::kLeft ? -1.0 : 1.0;
    const Vec2 desired = s.pivot - unit_from_angle(next_angle) * (sign * 0.5 * gripper.opening);
    const Vec2 gap = desired - gripper.position;
    const int dx = round_to_grid(gap.x);
    const int dy = round_to_grid(gap.y);
    if ((turn != 0 || dx != 0 || dy != 0) && s.align_steps < kMaxAlignSteps) {
      ++s.align_steps;
      return {Action{dx, dy, turn, 0}, s};
    }
    s.phase = A2gPhase::kGrasp;
  }
  return {Action{0, 0, 0, 1}, s};
}

}  // namespace geotact
