#pragma once

#include <array>
#include <string>

#include "geotact/core/error.hpp"
#include "geotact/world/vec2.hpp"
#include "geotact/world/world.hpp"

namespace geotact {

// One of the 54 discrete actions. Motion components are grid steps in
// {-1, 0, +1}: one unit is 0.01 m for dx/dy (world frame) and 15 degrees for
// dtheta. grasp = 1 closes the gripper and ends the episode; the motion
// components are then ignored.
struct Action {
  int dx = 0;
  int dy = 0;
  int dtheta = 0;
  int grasp = 0;

  friend bool operator==(const Action&, const Action&) = default;

  Vec2 translation() const { return {dx * kTranslationPrimitive, dy * kTranslationPrimitive}; }
  double rotation() const { return dtheta * kRotationPrimitive; }

  // Head indices of the factored policy: (dx+1, dy+1, dtheta+1, grasp).
  std::array<int, 4> heads() const { return {dx + 1, dy + 1, dtheta + 1, grasp}; }

  static Action from_heads(const std::array<int, 4>& h) {
    Action a{h[0] - 1, h[1] - 1, h[2] - 1, h[3]};
    a.validate();
    return a;
  }

  // Joint index in [0, 54).
  int index() const { return ((heads()[0] * 3 + heads()[1]) * 3 + heads()[2]) * 2 + grasp; }

  static Action from_index(int i) {
    if (i < 0 || i >= 54) throw UsageError("action index out of range: " + std::to_string(i));
    return from_heads({i / 18, (i / 6) % 3, (i / 2) % 3, i % 2});
  }

  void validate() const {
    auto unit = [](int v) { return v >= -1 && v <= 1; };
    if (!unit(dx) || !unit(dy) || !unit(dtheta) || (grasp != 0 && grasp != 1)) throw UsageError("action component out of range");
  }
};

inline constexpr std::array<int, 4> kHeadSizes{3, 3, 3, 2};
inline constexpr int kActionCount = 54;

}  // namespace geotact
