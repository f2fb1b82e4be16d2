#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "geotact/core/error.hpp"
#include "geotact/sensing/sensing.hpp"
#include "geotact/world/shapes.hpp"
#include "geotact/world/types.hpp"

namespace geotact {

using Rgb = std::array<std::uint8_t, 3>;

// Top-down RGB raster with the workspace origin at the bottom-left corner.
class Image {
 public:
  Image(int width, int height, Rgb fill) : w_(width), h_(height), px_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return w_; }
  int height() const { return h_; }
  Rgb at(int x, int y) const { return px_[static_cast<std::size_t>(y) * w_ + x]; }
  void set(int x, int y, Rgb c) {
    if (x >= 0 && y >= 0 && x < w_ && y < h_) px_[static_cast<std::size_t>(y) * w_ + x] = c;
  }

  // Binary P6 bytes.
  std::string ppm() const {
    std::string out = "P6\n" + std::to_string(w_) + " " + std::to_string(h_) + "\n255\n";
    out.reserve(out.size() + px_.size() * 3);
    for (const Rgb& c : px_) out.append(reinterpret_cast<const char*>(c.data()), 3);
    return out;
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot write frame " + path);
    f << ppm();
  }

 private:
  int w_, h_;
  std::vector<Rgb> px_;
};

struct RenderStyle {
  double pixels_per_meter = 1000.0;
  Rgb background{245, 240, 228};
  Rgb particle{176, 160, 130};
  Rgb object{52, 101, 164};
  Rgb finger{204, 0, 0};
  Rgb contact{20, 170, 60};
};

namespace detail {

// Paints every pixel whose center satisfies `inside`, scanning only the
// given world-space bounding box.
template <class Inside>
void fill_region(Image& img, const RenderStyle& st, Vec2 lo, Vec2 hi, Rgb color, Inside&& inside) {
  const double s = st.pixels_per_meter;
  const int x0 = std::max(0, static_cast<int>(std::floor(lo.x * s)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(hi.x * s)));
  const int y0 = std::max(0, static_cast<int>(std::floor(lo.y * s)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(hi.y * s)));
  for (int py = y0; py <= y1; ++py) {
    for (int px = x0; px <= x1; ++px) {
      const Vec2 p{(px + 0.5) / s, (py + 0.5) / s};
      if (inside(p)) img.set(px, img.height() - 1 - py, color);
    }
  }
}

inline void fill_circle(Image& img, const RenderStyle& st, Vec2 c, double r, Rgb color) {
  fill_region(img, st, c - Vec2{r, r}, c + Vec2{r, r}, color, [&](Vec2 p) { return norm_squared(p - c) <= r * r; });
}

}  // namespace detail

// Particles, object, fingers and a marker at each present contact sample.
inline Image render_frame(const WorldState& s, const std::array<FingerSample, 2>& samples, const RenderStyle& st = {}) {
  const WorldConfig& c = s.config;
  const int w = std::max(1, static_cast<int>(std::lround(c.workspace_width * st.pixels_per_meter)));
  const int h = std::max(1, static_cast<int>(std::lround(c.workspace_height * st.pixels_per_meter)));
  Image img(w, h, st.background);
  for (const Vec2& p : s.particles) detail::fill_circle(img, st, p, c.particle_radius, st.particle);

  const Shape& sh = shape(s.object.shape);
  const double br = sh.bounding_radius;
  const Vec2 op = s.object.position;
  if (sh.kind == ShapeKind::kDisc) {
    detail::fill_circle(img, st, op, sh.radius, st.object);
  } else {
    const std::vector<Vec2> verts = world_vertices(sh, op, s.object.angle);
    detail::fill_region(img, st, op - Vec2{br, br}, op + Vec2{br, br}, st.object, [&](Vec2 p) { return point_in_polygon(p, verts); });
  }

  const auto fs = fingers(s.gripper, c.finger_radius);
  for (const Finger& f : fs) detail::fill_circle(img, st, f.center, f.radius, st.finger);
  const double marker = 0.35 * c.finger_radius;
  for (int side = 0; side < 2; ++side) {
    if (!samples[side].present) continue;
    const Vec2 local{samples[side].location[0], samples[side].location[1]};
    detail::fill_circle(img, st, fs[side].center + rotate(local, s.gripper.angle), marker, st.contact);
  }
  return img;
}

inline std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%05d.ppm", index);
  return buf;
}

}  // namespace geotact
