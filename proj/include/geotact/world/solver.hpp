#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "geotact/world/shapes.hpp"
#include "geotact/world/types.hpp"
#include "geotact/world/vec2.hpp"

namespace geotact {

// Uniform bucket grid over the workspace. Buckets keep particle indices in
// ascending order so every traversal is deterministic.
class ParticleGrid {
 public:
  void build(const std::vector<Vec2>& points, double cell, double width, double height) {
    cell_ = cell;
    nx_ = std::max(1, static_cast<int>(std::ceil(width / cell)));
    ny_ = std::max(1, static_cast<int>(std::ceil(height / cell)));
    start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
    cell_of_.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      cell_of_[i] = cell_index(points[i]);
      ++start_[cell_of_[i] + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    indices_.resize(points.size());
    cursor_.assign(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) indices_[cursor_[cell_of_[i]]++] = static_cast<int>(i);
  }

  template <class F>
  void for_each_in_box(Vec2 lo, Vec2 hi, F&& f) const {
    const int x0 = clamp_x(lo.x), x1 = clamp_x(hi.x);
    const int y0 = clamp_y(lo.y), y1 = clamp_y(hi.y);
    for (int cy = y0; cy <= y1; ++cy) {
      for (int cx = x0; cx <= x1; ++cx) {
        const std::size_t c = static_cast<std::size_t>(cy) * nx_ + cx;
        for (int k = start_[c]; k < start_[c + 1]; ++k) f(indices_[k]);
      }
    }
  }

  template <class F>
  void for_each_near(Vec2 p, double reach, F&& f) const {
    for_each_in_box({p.x - reach, p.y - reach}, {p.x + reach, p.y + reach}, std::forward<F>(f));
  }

 private:
  int clamp_x(double x) const { return std::clamp(static_cast<int>(std::floor(x / cell_)), 0, nx_ - 1); }
  int clamp_y(double y) const { return std::clamp(static_cast<int>(std::floor(y / cell_)), 0, ny_ - 1); }
  std::size_t cell_index(Vec2 p) const { return static_cast<std::size_t>(clamp_y(p.y)) * nx_ + clamp_x(p.x); }

  double cell_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<int> start_;
  std::vector<int> cursor_;
  std::vector<std::size_t> cell_of_;
  std::vector<int> indices_;
};

struct ResolveReport {
  int iterations = 0;
  bool converged = false;
  // Largest displacement any body asked for in the final iteration.
  double max_step = 0.0;
  // Deepest overlap left anywhere (filled by resolve_penetrations only).
  double max_penetration = 0.0;
  // Net contact force on each finger after resolution, world frame.
  std::array<Vec2, 2> finger_load{};
};

namespace detail {

struct PlanarLoad {
  Vec2 g;
  double hxx = 0.0, hxy = 0.0, hyy = 0.0;
  double max_overlap = 0.0;
  int contacts = 0;

  void add(Vec2 n, double overlap, double kappa) {
    g += n * overlap;
    hxx += kappa * n.x * n.x;
    hxy += kappa * n.x * n.y;
    hyy += kappa * n.y * n.y;
    max_overlap = std::max(max_overlap, overlap);
    ++contacts;
  }
};

// Newton step for a translating body: shrink the load by the sliding
// resistance, then apply the pseudo-inverse of the contact stiffness.
inline Vec2 planar_step(const PlanarLoad& load, double slack) {
  const double gn = norm(load.g);
  if (load.contacts == 0 || gn <= slack) return {};
  const Vec2 g = load.g * ((gn - slack) / gn);
  const double half_tr = 0.5 * (load.hxx + load.hyy);
  const double disc = std::sqrt(0.25 * (load.hxx - load.hyy) * (load.hxx - load.hyy) + load.hxy * load.hxy);
  const double l1 = half_tr + disc;
  const double l2 = half_tr - disc;
  Vec2 step;
  if (l2 > 1e-3 * l1) {
    const double det = load.hxx * load.hyy - load.hxy * load.hxy;
    step = Vec2{load.hyy * g.x - load.hxy * g.y, -load.hxy * g.x + load.hxx * g.y} / det;
  } else {
    Vec2 u = std::abs(load.hxy) > 1e-15 ? Vec2{l1 - load.hyy, load.hxy} : (load.hxx >= load.hyy ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0});
    u = u / norm(u);
    step = u * (dot(u, g) / l1);
  }
  const double sn = norm(step);
  if (sn > load.max_overlap) step = step * (load.max_overlap / sn);
  return step;
}

// Generalized load on the rigid object in scaled coordinates
// (dx, dy, gyration_radius * dtheta).
struct RigidLoad {
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  double max_overlap = 0.0;
  int contacts = 0;

  void add(Vec2 n, double lever, double overlap, double kappa, double gyration) {
    const Eigen::Vector3d j(n.x, n.y, lever / gyration);
    g += overlap * j;
    h += kappa * j * j.transpose();
    max_overlap = std::max(max_overlap, overlap);
    ++contacts;
  }
};

struct RigidStep {
  Vec2 translation;
  double rotation = 0.0;
};

// Translation is resisted by `slack`; rotation by friction_mu * slack.
inline RigidStep rigid_step(const RigidLoad& load, double slack, double mu, double gyration) {
  if (load.contacts == 0) return {};
  Eigen::Vector3d g = load.g;
  const double gt = std::hypot(g(0), g(1));
  if (gt <= slack) {
    g(0) = g(1) = 0.0;
  } else {
    g(0) *= (gt - slack) / gt;
    g(1) *= (gt - slack) / gt;
  }
  const double rot_slack = mu * slack;
  g(2) = std::abs(g(2)) <= rot_slack ? 0.0 : g(2) - std::copysign(rot_slack, g(2));
  if (g.isZero(0.0)) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(load.h);
  const Eigen::Vector3d lambda = eig.eigenvalues();
  const double cutoff = 1e-3 * lambda.maxCoeff();
  const Eigen::Vector3d proj = eig.eigenvectors().transpose() * g;
  Eigen::Vector3d scaled = Eigen::Vector3d::Zero();
  for (int k = 0; k < 3; ++k) {
    if (lambda(k) > cutoff) scaled(k) = proj(k) / lambda(k);
  }
  Eigen::Vector3d q = eig.eigenvectors() * scaled;
  const double qn = q.norm();
  if (qn > load.max_overlap) q *= load.max_overlap / qn;
  return {Vec2{q(0), q(1)}, q(2) / gyration};
}

struct SolverScratch {
  ParticleGrid grid;
  std::vector<Vec2> built_at;
  std::vector<int> order;
  std::vector<double> key;
  std::vector<int> queued;
  std::vector<char> next_active;
};

inline SolverScratch& solver_scratch() {
  thread_local SolverScratch scratch;
  return scratch;
}

inline double grid_cell(const WorldConfig& c) { return 2.0 * c.particle_radius + 0.002; }

// Adds wall contacts for a disc to `load`.
inline void add_disc_walls(Vec2 p, double r, const WorldConfig& c, PlanarLoad& load) {
  if (p.x - r < 0.0) load.add({1.0, 0.0}, r - p.x, 1.0);
  if (p.x + r > c.workspace_width) load.add({-1.0, 0.0}, p.x + r - c.workspace_width, 1.0);
  if (p.y - r < 0.0) load.add({0.0, 1.0}, r - p.y, 1.0);
  if (p.y + r > c.workspace_height) load.add({0.0, -1.0}, p.y + r - c.workspace_height, 1.0);
}

template <class F>
void for_each_object_wall_contact(const WorldState& s, F&& f) {
  const Shape& sh = shape(s.object.shape);
  const WorldConfig& c = s.config;
  auto check = [&](Vec2 p, double r) {
    if (p.x - r < 0.0) f(Vec2{1.0, 0.0}, r - p.x, Vec2{p.x - r, p.y});
    if (p.x + r > c.workspace_width) f(Vec2{-1.0, 0.0}, p.x + r - c.workspace_width, Vec2{p.x + r, p.y});
    if (p.y - r < 0.0) f(Vec2{0.0, 1.0}, r - p.y, Vec2{p.x, p.y - r});
    if (p.y + r > c.workspace_height) f(Vec2{0.0, -1.0}, p.y + r - c.workspace_height, Vec2{p.x, p.y + r});
  };
  if (sh.kind == ShapeKind::kDisc) {
    check(s.object.position, sh.radius);
  } else {
    for (const Vec2& v : world_vertices(sh, s.object.position, s.object.angle)) check(v, 0.0);
  }
}

// Deterministic separation direction for coincident centers.
inline Vec2 fallback_normal(std::size_t i) { return unit_from_angle(2.399963229728653 * static_cast<double>(i)); }

// Quasi-static relaxation by Gauss-Seidel sweeps. Each free body in turn takes
// a friction-limited Newton step against its current overlaps, with every
// other body held where it is. Fingers and walls are kinematic. A sweep visits
// bodies nearest the fingers first and appends the neighbors of anything that
// moved, so a push travels through a chain within one sweep. Later sweeps only
// visit bodies next to something that moved. With `local_start` the first
// sweep is seeded from the bodies touching the fingers, which is enough when
// the world was at rest before the fingers moved; otherwise it visits all.
inline ResolveReport relax(WorldState& s, int iterations, bool local_start = false) {
  const WorldConfig& c = s.config;
  const double r = c.particle_radius;
  const double k = c.contact_stiffness;
  const double particle_slack = c.particle_resistance / k;
  const double object_slack = c.object_resistance / k;
  const Shape& sh = shape(s.object.shape);
  const double gyr = sh.gyration_radius;
  const auto fs = fingers(s.gripper, c.finger_radius);
  const int n = static_cast<int>(s.particles.size());
  const int object_index = n;
  // Grid buckets go stale as particles move; queries widen by `drift_budget`
  // and the grid is rebuilt before any particle drifts further than that.
  constexpr double drift_budget = 0.001;
  const double object_reach = sh.bounding_radius + r + drift_budget;

  SolverScratch& sc = solver_scratch();
  auto rebuild_grid = [&] {
    sc.grid.build(s.particles, grid_cell(c), c.workspace_width, c.workspace_height);
    sc.built_at = s.particles;
  };
  rebuild_grid();
  sc.queued.assign(n + 1, -1);
  sc.key.resize(n + 1);

  auto finger_distance = [&](Vec2 p) {
    double d = norm(p - fs[0].center);
    d = std::min(d, norm(p - fs[1].center));
    return d;
  };
  if (local_start) {
    sc.next_active.assign(n + 1, 0);
    for (const Finger& f : fs) {
      const double reach = r + f.radius + drift_budget;
      sc.grid.for_each_near(f.center, reach, [&](int j) { sc.next_active[j] = 1; });
      if (circle_shape_contact(sh, s.object.position, s.object.angle, f.center, f.radius + drift_budget)) sc.next_active[object_index] = 1;
    }
  } else {
    sc.next_active.assign(n + 1, 1);
  }

  ResolveReport report;
  for (int it = 0; it < iterations; ++it) {
    sc.order.clear();
    for (int i = 0; i <= n; ++i) {
      if (!sc.next_active[i]) continue;
      sc.order.push_back(i);
      sc.key[i] = i == object_index ? std::max(0.0, finger_distance(s.object.position) - sh.bounding_radius)
                                    : finger_distance(s.particles[i]);
    }
    std::stable_sort(sc.order.begin(), sc.order.end(), [&](int a, int b) { return sc.key[a] < sc.key[b]; });
    for (int i : sc.order) sc.queued[i] = it;
    std::fill(sc.next_active.begin(), sc.next_active.end(), 0);

    auto activate = [&](int j) {
      sc.next_active[j] = 1;
      if (sc.queued[j] != it) {
        sc.queued[j] = it;
        sc.order.push_back(j);
      }
    };
    auto activate_near = [&](Vec2 p, double reach) {
      sc.grid.for_each_near(p, reach + drift_budget, [&](int j) {
        if (norm_squared(s.particles[j] - p) < (reach + drift_budget) * (reach + drift_budget)) activate(j);
      });
    };

    double max_step = 0.0;
    bool stale = false;
    for (std::size_t q = 0; q < sc.order.size(); ++q) {
      const int i = sc.order[q];
      if (stale) {
        rebuild_grid();
        stale = false;
      }
      if (i == object_index) {
        RigidLoad load;
        auto add = [&](Vec2 push_dir, Vec2 point, double overlap) {
          load.add(push_dir, cross(point - s.object.position, push_dir), overlap, 1.0, gyr);
        };
        for (const Finger& f : fs) {
          if (auto oc = circle_shape_contact(sh, s.object.position, s.object.angle, f.center, f.radius)) add(-oc->normal, oc->point, oc->overlap);
        }
        sc.grid.for_each_near(s.object.position, object_reach + drift_budget, [&](int j) {
          if (auto oc = circle_shape_contact(sh, s.object.position, s.object.angle, s.particles[j], r)) add(-oc->normal, oc->point, oc->overlap);
        });
        for_each_object_wall_contact(s, [&](Vec2 nrm, double overlap, Vec2 point) { add(nrm, point, overlap); });
        const RigidStep step = rigid_step(load, object_slack, c.friction_mu, gyr);
        if (step.translation.x == 0.0 && step.translation.y == 0.0 && step.rotation == 0.0) continue;
        max_step = std::max({max_step, norm(step.translation), std::abs(step.rotation) * gyr});
        s.object.position += step.translation;
        s.object.angle = wrap_angle(s.object.angle + step.rotation);
        sc.next_active[object_index] = 1;
        activate_near(s.object.position, object_reach);
        continue;
      }

      const Vec2 p = s.particles[i];
      PlanarLoad load;
      sc.grid.for_each_near(p, 2.0 * r + drift_budget, [&](int j) {
        if (j == i) return;
        const Vec2 d = p - s.particles[j];
        const double d2 = norm_squared(d);
        if (d2 >= 4.0 * r * r) return;
        const double dist = std::sqrt(d2);
        load.add(dist > 1e-12 ? d / dist : fallback_normal(i), 2.0 * r - dist, 1.0);
      });
      add_disc_walls(p, r, c, load);
      for (const Finger& f : fs) {
        const Vec2 d = p - f.center;
        const double reach = r + f.radius;
        const double d2 = norm_squared(d);
        if (d2 >= reach * reach) continue;
        const double dist = std::sqrt(d2);
        load.add(dist > 1e-12 ? d / dist : fallback_normal(i), reach - dist, 1.0);
      }
      if (auto oc = circle_shape_contact(sh, s.object.position, s.object.angle, p, r)) load.add(oc->normal, oc->overlap, 1.0);
      const Vec2 step = planar_step(load, particle_slack);
      if (step.x == 0.0 && step.y == 0.0) continue;
      max_step = std::max(max_step, norm(step));
      s.particles[i] = p + step;
      if (norm_squared(s.particles[i] - sc.built_at[i]) > drift_budget * drift_budget) stale = true;
      sc.next_active[i] = 1;
      activate_near(s.particles[i], 2.0 * r);
      if (norm(s.particles[i] - s.object.position) < object_reach) activate(object_index);
    }

    report.iterations = it + 1;
    report.max_step = max_step;
    if (max_step <= c.convergence_tolerance) {
      report.converged = true;
      break;
    }
  }
  return report;
}

}  // namespace detail
}  // namespace geotact
