#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "geotact/core/error.hpp"
#include "geotact/core/random.hpp"
#include "geotact/world/shapes.hpp"
#include "geotact/world/solver.hpp"
#include "geotact/world/types.hpp"
#include "geotact/world/vec2.hpp"

namespace geotact {

inline constexpr double kTranslationPrimitive = 0.01;                // meters
inline constexpr double kRotationPrimitive = 15.0 * M_PI / 180.0;    // radians

// Every overlapping pair that involves a finger, left finger first.
inline std::vector<ContactEvent> detect_contacts(const WorldState& s) {
  const WorldConfig& c = s.config;
  const Shape& sh = shape(s.object.shape);
  const double k = c.contact_stiffness;
  const double r = c.particle_radius;
  std::vector<ContactEvent> events;
  for (const Finger& f : fingers(s.gripper, c.finger_radius)) {
    // n: unit force direction on the finger, world frame.
    auto emit = [&](Vec2 n, double penetration, ContactSource source, int body) {
      ContactEvent e;
      e.side = f.side;
      e.world_point = f.center - n * f.radius;
      e.location = rotate(e.world_point - f.center, -s.gripper.angle);
      e.normal = rotate(n, -s.gripper.angle);
      e.penetration = penetration;
      e.force_magnitude = k * penetration;
      e.source = source;
      e.body = body;
      events.push_back(e);
    };
    const double reach = r + f.radius;
    for (std::size_t i = 0; i < s.particles.size(); ++i) {
      const Vec2 d = f.center - s.particles[i];
      const double d2 = norm_squared(d);
      if (d2 >= reach * reach) continue;
      const double dist = std::sqrt(d2);
      emit(dist > 1e-12 ? d / dist : s.gripper.forward() * -1.0, reach - dist, ContactSource::kParticle, static_cast<int>(i));
    }
    if (auto oc = circle_shape_contact(sh, s.object.position, s.object.angle, f.center, f.radius))
      emit(oc->normal, oc->overlap, ContactSource::kObject, -1);
    const Vec2 p = f.center;
    const double fr = f.radius;
    if (p.x - fr < 0.0) emit({1.0, 0.0}, fr - p.x, ContactSource::kWall, -1);
    if (p.x + fr > c.workspace_width) emit({-1.0, 0.0}, p.x + fr - c.workspace_width, ContactSource::kWall, -1);
    if (p.y - fr < 0.0) emit({0.0, 1.0}, fr - p.y, ContactSource::kWall, -1);
    if (p.y + fr > c.workspace_height) emit({0.0, -1.0}, p.y + fr - c.workspace_height, ContactSource::kWall, -1);
  }
  return events;
}

// Deepest overlap over every body pair (particles, object, fingers, walls).
inline double max_penetration(const WorldState& s) {
  const WorldConfig& c = s.config;
  const Shape& sh = shape(s.object.shape);
  const double r = c.particle_radius;
  ParticleGrid grid;
  grid.build(s.particles, detail::grid_cell(c), c.workspace_width, c.workspace_height);
  double worst = 0.0;
  const auto fs = fingers(s.gripper, c.finger_radius);
  for (std::size_t i = 0; i < s.particles.size(); ++i) {
    const Vec2 p = s.particles[i];
    grid.for_each_near(p, 2.0 * r, [&](int j) {
      if (static_cast<std::size_t>(j) <= i) return;
      worst = std::max(worst, 2.0 * r - norm(p - s.particles[j]));
    });
    detail::PlanarLoad walls;
    detail::add_disc_walls(p, r, c, walls);
    worst = std::max(worst, walls.max_overlap);
    for (const Finger& f : fs) worst = std::max(worst, r + f.radius - norm(p - f.center));
    if (auto oc = circle_shape_contact(sh, s.object.position, s.object.angle, p, r)) worst = std::max(worst, oc->overlap);
  }
  for (const Finger& f : fs) {
    if (auto oc = circle_shape_contact(sh, s.object.position, s.object.angle, f.center, f.radius)) worst = std::max(worst, oc->overlap);
  }
  detail::for_each_object_wall_contact(s, [&](Vec2, double overlap, Vec2) { worst = std::max(worst, overlap); });
  return worst;
}

inline std::array<Vec2, 2> finger_loads(const std::vector<ContactEvent>& contacts, double gripper_angle) {
  std::array<Vec2, 2> load{};
  for (const auto& e : contacts) load[static_cast<int>(e.side)] += rotate(e.normal, gripper_angle) * e.force_magnitude;
  return load;
}

inline ResolveReport resolve_penetrations(WorldState& s, int iterations) {
  if (iterations < 1) throw UsageError("resolve_penetrations needs at least one iteration");
  ResolveReport report = detail::relax(s, iterations);
  report.max_penetration = max_penetration(s);
  report.finger_load = finger_loads(detect_contacts(s), s.gripper.angle);
  return report;
}

struct FingerReading {
  Vec2 location;
  Vec2 net_force;
};

// Net force is the vector sum over the finger's events; the location is that
// of the single strongest event.
inline std::optional<FingerReading> finger_reading(std::span<const ContactEvent> contacts, FingerSide side) {
  const ContactEvent* strongest = nullptr;
  Vec2 net;
  for (const auto& e : contacts) {
    if (e.side != side) continue;
    net += e.normal * e.force_magnitude;
    if (strongest == nullptr || e.force_magnitude > strongest->force_magnitude) strongest = &e;
  }
  if (strongest == nullptr) return std::nullopt;
  return FingerReading{strongest->location, net};
}

// Places the gripper at the start of its approach, the object ahead of one
// finger with a uniform lateral offset and orientation, and (granular mode)
// particles by random sequential addition so nothing overlaps.
inline WorldState build_world(const WorldConfig& config, ShapeId object_shape, Rng& rng) {
  config.validate();
  const Shape& sh = shape(object_shape);
  WorldState s;
  s.config = config;
  const double margin = config.gripper_margin();
  s.gripper.position = {0.5 * config.workspace_width, margin};
  s.gripper.angle = 0.0;
  s.gripper.opening = config.max_opening;

  s.targeted_finger = rng.uniform() < 0.5 ? FingerSide::kLeft : FingerSide::kRight;
  s.lateral_offset = rng.uniform(-config.lateral_jitter, config.lateral_jitter);
  const double finger_x = s.targeted_finger == FingerSide::kLeft ? -0.5 * config.max_opening : 0.5 * config.max_opening;
  s.object.shape = object_shape;
  s.object.position = s.gripper.position + Vec2{finger_x + s.lateral_offset, config.approach_distance};
  s.object.angle = rng.uniform(0.0, 2.0 * M_PI);
  const Vec2 op = s.object.position;
  const double br = sh.bounding_radius;
  if (op.x - br < 0.0 || op.x + br > config.workspace_width || op.y - br < 0.0 || op.y + br > config.workspace_height)
    throw ConfigError("object '" + sh.name + "' does not fit in the workspace");
  for (const Finger& f : fingers(s.gripper, config.finger_radius)) {
    if (circle_shape_contact(sh, op, s.object.angle, f.center, f.radius))
      throw ConfigError("object '" + sh.name + "' overlaps the gripper at its start pose");
  }

  const int count = config.effective_particle_count();
  if (count > 0) {
    const double r = config.particle_radius;
    const double cell = 2.0 * r;
    const int nx = std::max(1, static_cast<int>(std::ceil(config.workspace_width / cell)));
    const int ny = std::max(1, static_cast<int>(std::ceil(config.workspace_height / cell)));
    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(nx) * ny);
    auto bucket_of = [&](Vec2 p) {
      const int cx = std::clamp(static_cast<int>(p.x / cell), 0, nx - 1);
      const int cy = std::clamp(static_cast<int>(p.y / cell), 0, ny - 1);
      return std::pair{cx, cy};
    };
    const auto fs = fingers(s.gripper, config.finger_radius);
    s.particles.reserve(count);
    const long max_attempts = 400L * count;
    long attempts = 0;
    while (static_cast<int>(s.particles.size()) < count) {
      if (++attempts > max_attempts) throw ConfigError("could not place " + std::to_string(count) + " particles without overlap");
      const Vec2 p{rng.uniform(r, config.workspace_width - r), rng.uniform(r, config.workspace_height - r)};
      bool ok = !circle_shape_contact(sh, op, s.object.angle, p, r);
      for (const Finger& f : fs) ok = ok && norm(p - f.center) >= r + f.radius;
      if (!ok) continue;
      const auto [cx, cy] = bucket_of(p);
      for (int y = std::max(0, cy - 1); ok && y <= std::min(ny - 1, cy + 1); ++y) {
        for (int x = std::max(0, cx - 1); ok && x <= std::min(nx - 1, cx + 1); ++x) {
          for (int j : buckets[static_cast<std::size_t>(y) * nx + x]) {
            if (norm_squared(p - s.particles[j]) < 4.0 * r * r) {
              ok = false;
              break;
            }
          }
        }
      }
      if (!ok) continue;
      buckets[static_cast<std::size_t>(cy) * nx + cx].push_back(static_cast<int>(s.particles.size()));
      s.particles.push_back(p);
    }
  }
  return s;
}

struct StepOutcome {
  std::vector<ContactEvent> contacts;
  bool clamped = false;
  ResolveReport report;
};

// Moves the gripper kinematically over `substeps` equal increments, relaxing
// the world after each one. Commands that would leave the reachable box are
// clamped at the boundary.
inline StepOutcome step_world(WorldState& s, Vec2 delta, double dtheta) {
  constexpr double kEps = 1e-12;
  if (std::abs(delta.x) > kTranslationPrimitive + kEps || std::abs(delta.y) > kTranslationPrimitive + kEps ||
      std::abs(dtheta) > kRotationPrimitive + kEps)
    throw UsageError("step_world delta exceeds one action primitive");
  const WorldConfig& c = s.config;
  const double m = c.gripper_margin();
  const GripperState start = s.gripper;
  StepOutcome out;
  for (int k = 1; k <= c.substeps; ++k) {
    const double t = static_cast<double>(k) / c.substeps;
    Vec2 target = start.position + delta * t;
    const Vec2 clamped{std::clamp(target.x, m, c.workspace_width - m), std::clamp(target.y, m, c.workspace_height - m)};
    if (clamped != target) out.clamped = true;
    s.gripper.position = clamped;
    s.gripper.angle = start.angle + dtheta * t;
    out.report = detail::relax(s, c.resolution_iterations, true);
  }
  s.gripper.angle = wrap_angle(s.gripper.angle);
  out.contacts = detect_contacts(s);
  return out;
}

enum class GraspFailure { kNone, kNoDirectContact, kInterposedParticle, kOutsideFrictionCone, kCentroidOutside };

inline const char* to_string(GraspFailure f) {
  switch (f) {
    case GraspFailure::kNone:
      return "none";
    case GraspFailure::kNoDirectContact:
      return "no-direct-contact";
    case GraspFailure::kInterposedParticle:
      return "interposed-particle";
    case GraspFailure::kOutsideFrictionCone:
      return "outside-friction-cone";
    case GraspFailure::kCentroidOutside:
      return "centroid-outside";
  }
  return "?";
}

struct GraspOutcome {
  bool success = false;
  GraspFailure failure = GraspFailure::kNone;
  std::vector<ContactEvent> contacts;
};

// Pinch test on a closed gripper.
inline GraspOutcome evaluate_grasp(const WorldState& s, std::vector<ContactEvent> contacts) {
  const WorldConfig& c = s.config;
  const Shape& sh = shape(s.object.shape);
  GraspOutcome out;
  std::array<const ContactEvent*, 2> direct{nullptr, nullptr};
  for (const auto& e : contacts) {
    const int side = static_cast<int>(e.side);
    if (e.source == ContactSource::kObject) direct[side] = &e;
    if (e.source == ContactSource::kParticle && e.force_magnitude >= c.interposed_force &&
        circle_shape_contact(sh, s.object.position, s.object.angle, s.particles[e.body], c.particle_radius)) {
      out.failure = GraspFailure::kInterposedParticle;
    }
  }
  if (out.failure == GraspFailure::kNone && (direct[0] == nullptr || direct[1] == nullptr)) out.failure = GraspFailure::kNoDirectContact;
  if (out.failure == GraspFailure::kNone) {
    // Finger frame: the left finger closes along +x, so a pinching force on it points along -x.
    const double cone = std::atan(c.friction_mu) + 1e-12;
    const double left_angle = std::acos(std::clamp(-direct[0]->normal.x, -1.0, 1.0));
    const double right_angle = std::acos(std::clamp(direct[1]->normal.x, -1.0, 1.0));
    if (left_angle > cone || right_angle > cone) out.failure = GraspFailure::kOutsideFrictionCone;
  }
  if (out.failure == GraspFailure::kNone) {
    const Vec2 axis = s.gripper.closing_axis();
    auto along = [&](Vec2 p) { return dot(p - s.gripper.position, axis); };
    const double centroid = along(s.object.position);
    if (!(along(direct[0]->world_point) < centroid && centroid < along(direct[1]->world_point))) out.failure = GraspFailure::kCentroidOutside;
  }
  out.success = out.failure == GraspFailure::kNone;
  out.contacts = std::move(contacts);
  return out;
}

// Closes the fingers symmetrically in fixed decrements, relaxing after each.
// Closing stops as soon as both fingers touch the object, when both are
// blocked by whatever lies in between, or when the fingers meet.
inline GraspOutcome close_gripper(WorldState& s) {
  const WorldConfig& c = s.config;
  const double min_opening = 2.0 * c.finger_radius;
  std::vector<ContactEvent> contacts = detect_contacts(s);
  while (s.gripper.opening > min_opening) {
    s.gripper.opening = std::max(min_opening, s.gripper.opening - c.close_decrement);
    detail::relax(s, c.resolution_iterations, true);
    contacts = detect_contacts(s);
    std::array<bool, 2> on_object{false, false};
    std::array<double, 2> load{0.0, 0.0};
    for (const auto& e : contacts) {
      const int side = static_cast<int>(e.side);
      if (e.source == ContactSource::kObject) on_object[side] = true;
      // Finger frame x is the closing axis; the left finger is resisted along -x.
      load[side] += e.force_magnitude * std::max(0.0, side == 0 ? -e.normal.x : e.normal.x);
    }
    if (on_object[0] && on_object[1]) break;
    if (load[0] >= c.grip_block_force && load[1] >= c.grip_block_force) break;
  }
  return evaluate_grasp(s, std::move(contacts));
}

}  // namespace geotact
