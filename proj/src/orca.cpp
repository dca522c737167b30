#include "socnav/orca.hpp"

#include <algorithm>
#include <cmath>

namespace socnav {

namespace {

constexpr double kEps = 1e-9;

/// Directed boundary line; the permitted side is to the left of `direction`.
struct Line {
  Vec2 point;
  Vec2 direction;
};

Line to_line(const HalfPlane& h) { return {h.point, Vec2{h.normal.y, -h.normal.x}}; }

Vec2 normalized(Vec2 v) { return v / norm(v); }

bool outside(const Line& l, Vec2 v) { return det(l.direction, l.point - v) > 0.0; }

/// Optimizes along line `index` subject to lines [0, index) and the speed disc.
bool solve_on_line(std::span<const Line> lines, std::size_t index, double radius, Vec2 target,
                   bool direction_opt, Vec2& result) {
  const Line& line = lines[index];
  const double along = dot(line.point, line.direction);
  const double discriminant = along * along + radius * radius - norm_sq(line.point);
  if (discriminant < 0.0) return false;  // the disc lies entirely outside this line
  const double root = std::sqrt(discriminant);
  double t_left = -along - root;
  double t_right = -along + root;

  for (std::size_t i = 0; i < index; ++i) {
    const double denominator = det(line.direction, lines[i].direction);
    const double numerator = det(lines[i].direction, line.point - lines[i].point);
    if (std::abs(denominator) <= kEps) {
      if (numerator < 0.0) return false;  // parallel and fully excluded
      continue;
    }
    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }

  if (direction_opt) {
    result = line.point + line.direction * (dot(target, line.direction) > 0.0 ? t_right : t_left);
  } else {
    const double t = std::clamp(dot(line.direction, target - line.point), t_left, t_right);
    result = line.point + line.direction * t;
  }
  return true;
}

/// Incremental 2D LP. Returns lines.size() on success, otherwise the index that failed.
std::size_t solve_2d(std::span<const Line> lines, double radius, Vec2 target, bool direction_opt,
                     Vec2& result) {
  if (direction_opt) {
    result = target * radius;
  } else if (norm_sq(target) > radius * radius) {
    result = normalized(target) * radius;
  } else {
    result = target;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!outside(lines[i], result)) continue;
    const Vec2 previous = result;
    if (!solve_on_line(lines, i, radius, target, direction_opt, result)) {
      result = previous;
      return i;
    }
  }
  return lines.size();
}

/// Minimizes the largest violation over lines [begin, end) given a partial solution.
void solve_minimax(std::span<const Line> lines, std::size_t begin, double radius, Vec2& result) {
  double worst = 0.0;
  for (std::size_t i = begin; i < lines.size(); ++i) {
    if (det(lines[i].direction, lines[i].point - result) <= worst) continue;
    std::vector<Line> projected;
    projected.reserve(i);
    for (std::size_t j = 0; j < i; ++j) {
      Line bisector;
      const double determinant = det(lines[i].direction, lines[j].direction);
      if (std::abs(determinant) <= kEps) {
        if (dot(lines[i].direction, lines[j].direction) > 0.0) continue;  // same direction
        bisector.point = (lines[i].point + lines[j].point) * 0.5;
      } else {
        bisector.point =
            lines[i].point +
            lines[i].direction *
                (det(lines[j].direction, lines[i].point - lines[j].point) / determinant);
      }
      bisector.direction = normalized(lines[j].direction - lines[i].direction);
      projected.push_back(bisector);
    }
    const Vec2 previous = result;
    if (solve_2d(projected, radius, perp(lines[i].direction), true, result) < projected.size()) {
      result = previous;  // numerical edge case; keep the best so far
    }
    worst = det(lines[i].direction, lines[i].point - result);
  }
}

}  // namespace

HalfPlane orca_halfplane(const AgentState& robot, const AgentState& other, double horizon,
                         double responsibility, double dt, double extra_radius) {
  if (!(horizon > 0.0) || !(dt > 0.0)) throw UsageError("horizon and dt must be positive");
  const Vec2 rel_pos = other.position() - robot.position();
  const Vec2 rel_vel = robot.velocity - other.velocity;
  const double dist_sq = norm_sq(rel_pos);
  const double r = robot.radius + other.radius + extra_radius;
  const double r_sq = r * r;
  if (dist_sq == 0.0) throw UsageError("ORCA undefined for coincident agents");

  Vec2 direction;
  Vec2 u;
  if (dist_sq > r_sq) {
    const double inv_horizon = 1.0 / horizon;
    const Vec2 w = rel_vel - rel_pos * inv_horizon;  // from cutoff-disc center
    const double w_len_sq = norm_sq(w);
    const double w_dot_p = dot(w, rel_pos);
    if (w_dot_p < 0.0 && w_dot_p * w_dot_p > r_sq * w_len_sq) {
      // Closest boundary point is on the cutoff disc.
      const double w_len = std::sqrt(w_len_sq);
      const Vec2 unit_w = w / w_len;
      direction = {unit_w.y, -unit_w.x};
      u = unit_w * (r * inv_horizon - w_len);
    } else {
      // Closest boundary point is on one of the legs.
      const double leg = std::sqrt(dist_sq - r_sq);
      if (det(rel_pos, w) > 0.0) {
        direction = Vec2{rel_pos.x * leg - rel_pos.y * r, rel_pos.x * r + rel_pos.y * leg} / dist_sq;
      } else {
        direction = -Vec2{rel_pos.x * leg + rel_pos.y * r, -rel_pos.x * r + rel_pos.y * leg} / dist_sq;
      }
      u = direction * dot(rel_vel, direction) - rel_vel;
    }
  } else {
    // Already overlapping: push apart within one tick.
    const double inv_dt = 1.0 / dt;
    const Vec2 w = rel_vel - rel_pos * inv_dt;
    const double w_len = norm(w);
    const Vec2 unit_w = w / w_len;
    direction = {unit_w.y, -unit_w.x};
    u = unit_w * (r * inv_dt - w_len);
  }
  return {robot.velocity + u * responsibility, perp(direction)};
}

Vec2 solve_velocity_lp(std::span<const HalfPlane> planes, Vec2 preferred, double v_max) {
  if (!(v_max > 0.0)) throw UsageError("v_max must be positive");
  std::vector<Line> lines;
  lines.reserve(planes.size());
  for (const auto& p : planes) lines.push_back(to_line(p));
  Vec2 result;
  const std::size_t failed = solve_2d(lines, v_max, preferred, false, result);
  if (failed < lines.size()) solve_minimax(lines, failed, v_max, result);
  return result;
}

bool satisfies_all(std::span<const HalfPlane> planes, Vec2 v, double tolerance) {
  return std::all_of(planes.begin(), planes.end(),
                     [&](const HalfPlane& p) { return p.violation(v) <= tolerance; });
}

}  // namespace socnav
