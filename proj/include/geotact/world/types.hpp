#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "geotact/core/error.hpp"
#include "geotact/world/shapes.hpp"
#include "geotact/world/vec2.hpp"

namespace geotact {

enum class WorldMode { kTabletop, kGranular };

inline const char* to_string(WorldMode m) { return m == WorldMode::kTabletop ? "tabletop" : "granular"; }

inline WorldMode parse_world_mode(const std::string& s) {
  if (s == "tabletop") return WorldMode::kTabletop;
  if (s == "granular") return WorldMode::kGranular;
  throw ConfigError("unknown mode '" + s + "' (expected tabletop|granular)");
}

// Physical parameters of the planar world. Lengths in meters, forces in newtons.
struct WorldConfig {
  WorldMode mode = WorldMode::kTabletop;
  int particle_count = 600;  // ignored in tabletop mode
  double particle_radius = 0.007;
  double workspace_width = 0.5;
  double workspace_height = 0.5;
  // Pseudo-force law: force = contact_stiffness * penetration.
  double contact_stiffness = 1.0e5;
  double friction_mu = 0.4;
  int substeps = 8;
  int resolution_iterations = 64;
  // Quasi-static sliding resistance of a free body. A body only moves once the
  // net contact load on it exceeds this value.
  double particle_resistance = 0.25;
  double object_resistance = 4.0;
  double finger_radius = 0.0125;
  double max_opening = 0.143;
  double approach_distance = 0.15;
  double lateral_jitter = 0.02;
  double close_decrement = 0.002;
  // Closing stops once both fingers carry at least this load along the closing axis.
  double grip_block_force = 8.0;
  // A particle touching both a finger and the object with at least this force
  // on the finger counts as lodged between them.
  double interposed_force = 1.0;
  // Resolution stops early once no body wants to move more than this (meters).
  double convergence_tolerance = 1.0e-7;

  int effective_particle_count() const { return mode == WorldMode::kGranular ? particle_count : 0; }

  // Gripper centers are kept this far from every wall so a finger can never
  // pinch a single particle against it.
  double gripper_margin() const { return 0.5 * max_opening + finger_radius + 2.0 * particle_radius + 0.001; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw ConfigError(std::string("world.") + name + " must be positive");
    };
    if (particle_count < 0) throw ConfigError("world.particle_count must be non-negative");
    positive(particle_radius, "particle_radius");
    positive(workspace_width, "workspace_width");
    positive(workspace_height, "workspace_height");
    positive(contact_stiffness, "contact_stiffness");
    positive(friction_mu, "friction_mu");
    positive(finger_radius, "finger_radius");
    positive(max_opening, "max_opening");
    positive(approach_distance, "approach_distance");
    positive(close_decrement, "close_decrement");
    positive(grip_block_force, "grip_block_force");
    positive(convergence_tolerance, "convergence_tolerance");
    if (substeps < 1) throw ConfigError("world.substeps must be >= 1");
    if (resolution_iterations < 1) throw ConfigError("world.resolution_iterations must be >= 1");
    if (particle_resistance < 0.0 || object_resistance < 0.0) throw ConfigError("world resistances must be non-negative");
    if (lateral_jitter < 0.0) throw ConfigError("world.lateral_jitter must be non-negative");
    if (interposed_force < 0.0) throw ConfigError("world.interposed_force must be non-negative");
    if (max_opening <= 2.0 * finger_radius) throw ConfigError("world.max_opening must exceed the finger diameter");
    if (2.0 * gripper_margin() >= std::min(workspace_width, workspace_height))
      throw ConfigError("workspace too small for the gripper");
  }
};

enum class FingerSide { kLeft = 0, kRight = 1 };

inline const char* to_string(FingerSide s) { return s == FingerSide::kLeft ? "left" : "right"; }

struct Finger {
  Vec2 center;
  double radius = 0.0;
  FingerSide side = FingerSide::kLeft;
};

// Pose of the gripper center; `angle` is the heading of the closing axis
// (left finger -> right finger). The approach direction is perp(axis).
struct GripperState {
  Vec2 position;
  double angle = 0.0;
  double opening = 0.143;

  Vec2 closing_axis() const { return unit_from_angle(angle); }
  Vec2 forward() const { return perp(closing_axis()); }
};

inline std::array<Finger, 2> fingers(const GripperState& g, double radius) {
  const Vec2 half = g.closing_axis() * (0.5 * g.opening);
  return {Finger{g.position - half, radius, FingerSide::kLeft}, Finger{g.position + half, radius, FingerSide::kRight}};
}

struct ObjectState {
  ShapeId shape = 0;
  Vec2 position;
  double angle = 0.0;
};

enum class ContactSource { kParticle, kObject, kWall };

inline const char* to_string(ContactSource s) {
  switch (s) {
    case ContactSource::kParticle:
      return "particle";
    case ContactSource::kObject:
      return "object";
    case ContactSource::kWall:
      return "wall";
  }
  return "?";
}

// One overlapping pair that involves a finger. `location` and `normal` are in
// the finger frame (x along the closing axis, y along the approach direction,
// origin at the finger center); `normal` is the direction of the force on the
// finger.
struct ContactEvent {
  FingerSide side = FingerSide::kLeft;
  Vec2 location;
  Vec2 normal;
  double penetration = 0.0;
  double force_magnitude = 0.0;
  ContactSource source = ContactSource::kParticle;
  int body = -1;  // particle index, or -1
  Vec2 world_point;
};

struct WorldState {
  WorldConfig config;
  std::vector<Vec2> particles;
  ObjectState object;
  GripperState gripper;
  std::uint64_t seed = 0;
  // Offset of the object from the targeted finger line, perpendicular to the approach.
  double lateral_offset = 0.0;
  FingerSide targeted_finger = FingerSide::kLeft;
};

}  // namespace geotact
