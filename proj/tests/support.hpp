#pragma once

// Independent reference computations used as test oracles. Nothing here
// calls into the solver or the contact code under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "geotact/sensing/sensing.hpp"
#include "geotact/world/shapes.hpp"
#include "geotact/world/types.hpp"

namespace geotact::testing {

inline double seg_distance(Vec2 q, Vec2 a, Vec2 b) {
  const double abx = b.x - a.x, aby = b.y - a.y;
  double t = ((q.x - a.x) * abx + (q.y - a.y) * aby) / (abx * abx + aby * aby);
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(q.x - (a.x + t * abx), q.y - (a.y + t * aby));
}

// Even-odd rule by counting edge crossings of a ray toward +x.
inline bool inside_polygon(Vec2 q, const std::vector<Vec2>& v) {
  int crossings = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i], b = v[(i + 1) % v.size()];
    if ((a.y <= q.y && b.y > q.y) || (b.y <= q.y && a.y > q.y)) {
      const double x = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (x > q.x) ++crossings;
    }
  }
  return crossings % 2 == 1;
}

// Overlap depth of a circle with the posed object (<= 0 when apart).
inline double object_overlap(const WorldState& s, Vec2 c, double r) {
  const Shape& sh = shape(s.object.shape);
  if (sh.kind == ShapeKind::kDisc) return sh.radius + r - std::hypot(c.x - s.object.position.x, c.y - s.object.position.y);
  std::vector<Vec2> v;
  const double cs = std::cos(s.object.angle), sn = std::sin(s.object.angle);
  for (const Vec2& p : sh.vertices) v.push_back({s.object.position.x + cs * p.x - sn * p.y, s.object.position.y + sn * p.x + cs * p.y});
  double d = INFINITY;
  for (std::size_t i = 0; i < v.size(); ++i) d = std::min(d, seg_distance(c, v[i], v[(i + 1) % v.size()]));
  return inside_polygon(c, v) ? r + d : r - d;
}

// Deepest overlap among all body pairs by exhaustive O(n^2) scan.
inline double brute_force_penetration(const WorldState& s) {
  const WorldConfig& c = s.config;
  const double r = c.particle_radius;
  const double fr = c.finger_radius;
  const double half = 0.5 * s.gripper.opening;
  const Vec2 axis{std::cos(s.gripper.angle), std::sin(s.gripper.angle)};
  const std::array<Vec2, 2> fingers_at{Vec2{s.gripper.position.x - axis.x * half, s.gripper.position.y - axis.y * half},
                                       Vec2{s.gripper.position.x + axis.x * half, s.gripper.position.y + axis.y * half}};
  double worst = 0.0;
  const std::size_t n = s.particles.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = s.particles[i];
    for (std::size_t j = i + 1; j < n; ++j) worst = std::max(worst, 2.0 * r - std::hypot(p.x - s.particles[j].x, p.y - s.particles[j].y));
    worst = std::max({worst, r - p.x, p.x + r - c.workspace_width, r - p.y, p.y + r - c.workspace_height});
    for (const Vec2& f : fingers_at) worst = std::max(worst, r + fr - std::hypot(p.x - f.x, p.y - f.y));
    worst = std::max(worst, object_overlap(s, p, r));
  }
  for (const Vec2& f : fingers_at) worst = std::max(worst, object_overlap(s, f, fr));
  return worst;
}

// Inverse of flatten() following the documented layout.
inline ObservationWindow unflatten(const std::vector<double>& flat) {
  ObservationWindow w;
  for (std::size_t rec = 0; rec < ObservationWindow::kCapacity; ++rec) {
    const double* p = flat.data() + rec * ObservationWindow::kRecordWidth;
    StepRecord r;
    for (FingerSample* s : {&r.left, &r.right}) {
      for (int k = 0; k < 3; ++k) s->location[k] = *p++;
      for (int k = 0; k < 3; ++k) s->net_force[k] = *p++;
      s->present = std::any_of(s->location.begin(), s->location.end(), [](double x) { return x != 0.0; }) ||
                   std::any_of(s->net_force.begin(), s->net_force.end(), [](double x) { return x != 0.0; });
    }
    for (int k = 0; k < 4; ++k) r.prev_action[k] = *p++;
    w = w.pushed(r);
  }
  return w;
}

// A world with no particles and the object parked in a corner, for building
// hand-made scenes.
inline WorldState empty_world(WorldMode mode = WorldMode::kGranular, const std::string& object = "square") {
  WorldState s;
  s.config.mode = mode;
  s.object.shape = shape_id(object);
  s.object.position = {0.45, 0.45};
  s.gripper.position = {0.25, 0.1};
  s.gripper.opening = s.config.max_opening;
  return s;
}

}  // namespace geotact::testing
