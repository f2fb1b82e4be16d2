#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geotact/core/error.hpp"
#include "geotact/world/vec2.hpp"

namespace geotact {

enum class ShapeKind { kPolygon, kDisc };

// Rigid object outline in its body frame, centered on the area centroid.
// Polygons are simple (not necessarily convex) with counter-clockwise vertices.
struct Shape {
  std::string name;
  ShapeKind kind = ShapeKind::kPolygon;
  std::vector<Vec2> vertices;
  double radius = 0.0;  // discs only
  double area = 0.0;
  double gyration_radius = 0.0;
  double bounding_radius = 0.0;
};

using ShapeId = std::size_t;

namespace detail {

inline double signed_area(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) a += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * a;
}

inline Shape finalize_polygon(std::string name, std::vector<Vec2> v) {
  if (signed_area(v) < 0.0) std::reverse(v.begin(), v.end());
  // Area centroid and polar second moment about the origin.
  double area = 0.0;
  Vec2 centroid;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i];
    const Vec2 b = v[(i + 1) % v.size()];
    const double w = cross(a, b);
    area += 0.5 * w;
    centroid += (a + b) * (w / 6.0);
  }
  centroid = centroid / area;
  for (auto& p : v) p -= centroid;
  double polar = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i];
    const Vec2 b = v[(i + 1) % v.size()];
    polar += cross(a, b) * (dot(a, a) + dot(a, b) + dot(b, b)) / 12.0;
  }
  Shape s;
  s.name = std::move(name);
  s.kind = ShapeKind::kPolygon;
  s.vertices = std::move(v);
  s.area = area;
  s.gyration_radius = std::sqrt(polar / area);
  for (const auto& p : s.vertices) s.bounding_radius = std::max(s.bounding_radius, norm(p));
  return s;
}

inline Shape make_rectangle(std::string name, double width, double height) {
  const double hx = 0.5 * width;
  const double hy = 0.5 * height;
  return finalize_polygon(std::move(name), {{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}});
}

inline Shape make_disc(std::string name, double radius) {
  Shape s;
  s.name = std::move(name);
  s.kind = ShapeKind::kDisc;
  s.radius = radius;
  s.area = M_PI * radius * radius;
  s.gyration_radius = radius / std::sqrt(2.0);
  s.bounding_radius = radius;
  return s;
}

// Regular {5/2} star outline: 10 vertices alternating outer and inner radius.
inline Shape make_star(std::string name, double circumradius) {
  const double inner = circumradius * std::cos(2.0 * M_PI / 5.0) / std::cos(M_PI / 5.0);
  std::vector<Vec2> v;
  for (int k = 0; k < 10; ++k) {
    const double r = (k % 2 == 0) ? circumradius : inner;
    const double a = M_PI / 2.0 + k * M_PI / 5.0;
    v.push_back(unit_from_angle(a) * r);
  }
  return finalize_polygon(std::move(name), std::move(v));
}

inline Shape make_l_shape(std::string name, double arm, double thickness) {
  return finalize_polygon(std::move(name), {{0.0, 0.0}, {arm, 0.0}, {arm, thickness}, {thickness, thickness}, {thickness, arm}, {0.0, arm}});
}

}  // namespace detail

// The seven training-object analogs. Dimensions in meters.
inline const std::vector<Shape>& shape_registry() {
  static const std::vector<Shape> registry = [] {
    std::vector<Shape> r;
    r.push_back(detail::make_rectangle("square", 0.04, 0.04));
    r.push_back(detail::make_rectangle("long-bar", 0.12, 0.03));
    r.push_back(detail::make_disc("disc", 0.03));
    r.push_back(detail::make_star("pentagram", 0.04));
    r.push_back(detail::make_l_shape("L-shape", 0.08, 0.035));
    r.push_back(detail::make_disc("small-disc", 0.026));
    r.push_back(detail::make_rectangle("rectangle", 0.08, 0.05));
    return r;
  }();
  return registry;
}

inline std::optional<ShapeId> find_shape(std::string_view name) {
  const auto& reg = shape_registry();
  for (std::size_t i = 0; i < reg.size(); ++i) {
    if (reg[i].name == name) return i;
  }
  return std::nullopt;
}

inline ShapeId shape_id(std::string_view name) {
  if (auto id = find_shape(name)) return *id;
  throw ConfigError("unknown object shape '" + std::string(name) + "'");
}

inline const Shape& shape(ShapeId id) { return shape_registry().at(id); }

inline bool point_in_polygon(Vec2 q, const std::vector<Vec2>& v) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > q.y) != (v[j].y > q.y)) {
      const double x = v[j].x + (q.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (q.x < x) inside = !inside;
    }
  }
  return inside;
}

struct BoundaryPoint {
  Vec2 point;
  double distance = 0.0;
  std::size_t edge = 0;
};

inline BoundaryPoint closest_boundary_point(Vec2 q, const std::vector<Vec2>& v) {
  BoundaryPoint best;
  double best_d2 = INFINITY;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i];
    const Vec2 ab = v[(i + 1) % v.size()] - a;
    const double t = std::clamp(dot(q - a, ab) / norm_squared(ab), 0.0, 1.0);
    const Vec2 p = a + ab * t;
    const double d2 = norm_squared(q - p);
    if (d2 < best_d2) {
      best_d2 = d2;
      best.point = p;
      best.edge = i;
    }
  }
  best.distance = std::sqrt(best_d2);
  return best;
}

// Overlap of a circle with a posed shape. `normal` points from the shape
// toward the circle (the direction the circle must move to separate) and
// `point` lies on the shape boundary, both in world coordinates.
struct ShapeContact {
  double overlap = 0.0;
  Vec2 normal;
  Vec2 point;
};

inline std::optional<ShapeContact> circle_shape_contact(const Shape& s, Vec2 position, double angle, Vec2 center, double radius) {
  const Vec2 rel = center - position;
  const double reach = s.bounding_radius + radius;
  if (norm_squared(rel) >= reach * reach) return std::nullopt;
  const Vec2 q = rotate(rel, -angle);
  if (s.kind == ShapeKind::kDisc) {
    const double d = norm(q);
    const double overlap = s.radius + radius - d;
    if (overlap <= 0.0) return std::nullopt;
    const Vec2 n_body = d > 1e-12 ? q / d : Vec2{1.0, 0.0};
    const Vec2 n = rotate(n_body, angle);
    return ShapeContact{overlap, n, position + n * s.radius};
  }
  const BoundaryPoint b = closest_boundary_point(q, s.vertices);
  const bool inside = point_in_polygon(q, s.vertices);
  const double overlap = inside ? radius + b.distance : radius - b.distance;
  if (overlap <= 0.0) return std::nullopt;
  Vec2 n_body;
  if (b.distance > 1e-12) {
    n_body = (inside ? b.point - q : q - b.point) / b.distance;
  } else {
    // Center exactly on the boundary: use the outward edge normal (CCW winding).
    const Vec2 e = s.vertices[(b.edge + 1) % s.vertices.size()] - s.vertices[b.edge];
    n_body = Vec2{e.y, -e.x} / norm(e);
  }
  return ShapeContact{overlap, rotate(n_body, angle), position + rotate(b.point, angle)};
}

inline std::vector<Vec2> world_vertices(const Shape& s, Vec2 position, double angle) {
  std::vector<Vec2> out;
  out.reserve(s.vertices.size());
  for (const auto& v : s.vertices) out.push_back(position + rotate(v, angle));
  return out;
}

}  // namespace geotact
