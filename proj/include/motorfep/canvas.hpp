#pragma once

// Drawing environment: a planar two-link arm whose joint velocities move a pen
// that is always down, over a 64x64 binary canvas.
//
// Canvas units: the unit square [0,1]^2 with y pointing up. It is projected
// onto pixel coordinates [0,63]^2 with row 0 at the top.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <span>
#include <vector>

#include "errors.hpp"
#include "reservoir.hpp"

namespace motorfep {

inline constexpr int kCanvasSide = 64;
inline constexpr std::size_t kPixels = kCanvasSide * kCanvasSide;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Pixel {
  long row = 0;
  long col = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Row-major 64x64 grid of {0,1}.
struct Canvas {
  std::vector<std::uint8_t> cells = std::vector<std::uint8_t>(kPixels, 0);

  std::uint8_t at(long row, long col) const { return cells[row * kCanvasSide + col]; }
  void mark(long row, long col) {
    if (row >= 0 && row < kCanvasSide && col >= 0 && col < kCanvasSide)
      cells[row * kCanvasSide + col] = 1;
  }
  std::size_t ink() const {
    std::size_t n = 0;
    for (auto c : cells) n += c;
    return n;
  }

  friend bool operator==(const Canvas&, const Canvas&) = default;
};

/// Flattened canvas, one value in {0,1} per pixel.
struct Observation {
  std::vector<double> pixels = std::vector<double>(kPixels, 0.0);

  std::span<const double> view() const { return pixels; }
  double sum() const {
    double s = 0.0;
    for (double p : pixels) s += p;
    return s;
  }

  friend bool operator==(const Observation&, const Observation&) = default;
};

using JointAngles = std::array<double, 2>;

struct ArmConfig {
  double l1 = 0.5;
  double l2 = 0.5;
  Vec2 base{0.5, 0.0};
  JointAngles theta0{};
  double gain = 0.02;  // rad per unit command per step

  /// Elbow-up angles placing the pen at `target`; throws if unreachable.
  static JointAngles solve_ik(const Vec2& base, double l1, double l2, const Vec2& target) {
    const double dx = target.x - base.x;
    const double dy = target.y - base.y;
    const double d2 = dx * dx + dy * dy;
    const double c2 = (d2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    if (c2 < -1.0 || c2 > 1.0) throw ConfigError("arm cannot reach the canvas center");
    const double t2 = std::acos(c2);
    const double t1 = std::atan2(dy, dx) - std::atan2(l2 * std::sin(t2), l1 + l2 * std::cos(t2));
    return {t1, t2};
  }

  /// Geometry with theta0 solved so that the pen starts at the canvas center.
  static ArmConfig centered(double l1 = 0.5, double l2 = 0.5, Vec2 base = {0.5, 0.0},
                            double gain = 0.02) {
    ArmConfig c{l1, l2, base, {}, gain};
    c.theta0 = solve_ik(base, l1, l2, {0.5, 0.5});
    return c;
  }

  void validate() const;

  friend bool operator==(const ArmConfig&, const ArmConfig&) = default;
};

inline Vec2 forward_kinematics(const JointAngles& theta, const ArmConfig& cfg) {
  return {cfg.base.x + cfg.l1 * std::cos(theta[0]) + cfg.l2 * std::cos(theta[0] + theta[1]),
          cfg.base.y + cfg.l1 * std::sin(theta[0]) + cfg.l2 * std::sin(theta[0] + theta[1])};
}

inline void ArmConfig::validate() const {
  if (!(l1 > 0.0) || !(l2 > 0.0)) throw ConfigError("arm link lengths must be > 0");
  if (!std::isfinite(gain)) throw ConfigError("arm.gain must be finite");
  const Vec2 p = forward_kinematics(theta0, *this);
  if (std::abs(p.x - 0.5) > 1e-9 || std::abs(p.y - 0.5) > 1e-9)
    throw ConfigError("arm.theta0 does not place the pen at the canvas center");
}

inline Pixel project(const Vec2& p) {
  constexpr double kScale = kCanvasSide - 1;
  // Far-off points only need to stay far off; clamp to keep integer math sane.
  auto to_index = [](double v) {
    return std::lround(std::clamp(v, -1.0e6, 1.0e6));
  };
  return {to_index((1.0 - p.y) * kScale), to_index(p.x * kScale)};
}

/// Bresenham line between two pixel centers, both endpoints included.
/// Cells outside the grid are skipped, so a line may leave and re-enter.
inline void draw_line(Canvas& canvas, Pixel from, Pixel to) {
  long r = from.row, c = from.col;
  const long dr = std::labs(to.row - r), dc = std::labs(to.col - c);
  const long sr = r < to.row ? 1 : -1, sc = c < to.col ? 1 : -1;
  long err = dc - dr;
  for (;;) {
    canvas.mark(r, c);
    if (r == to.row && c == to.col) break;
    const long e2 = 2 * err;
    if (e2 > -dr) {
      err -= dr;
      c += sc;
    }
    if (e2 < dc) {
      err += dc;
      r += sr;
    }
  }
}

inline void rasterize_segment(Canvas& canvas, const Vec2& from, const Vec2& to) {
  draw_line(canvas, project(from), project(to));
}

struct EnvState {
  JointAngles theta{};
  Canvas canvas;
  Vec2 pen;

  static EnvState fresh(const ArmConfig& cfg) {
    EnvState s;
    s.theta = cfg.theta0;
    s.pen = forward_kinematics(cfg.theta0, cfg);
    return s;
  }

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

/// Forward-Euler integration of joint velocities, one command per step.
inline void apply_actions_inplace(EnvState& env, const ActionSequence& actions,
                                  const ArmConfig& cfg) {
  if (actions.dim != 2) throw ShapeError("arm commands must be two-dimensional");
  for (std::size_t t = 0; t < actions.steps; ++t) {
    env.theta[0] += cfg.gain * actions.at(t, 0);
    env.theta[1] += cfg.gain * actions.at(t, 1);
    const Vec2 next = forward_kinematics(env.theta, cfg);
    rasterize_segment(env.canvas, env.pen, next);
    env.pen = next;
  }
}

inline EnvState apply_actions(EnvState env, const ActionSequence& actions, const ArmConfig& cfg) {
  apply_actions_inplace(env, actions, cfg);
  return env;
}

inline Observation observe(const Canvas& canvas) {
  Observation o;
  for (std::size_t i = 0; i < kPixels; ++i) o.pixels[i] = canvas.cells[i];
  return o;
}

inline Observation observe(const EnvState& env) { return observe(env.canvas); }

/// Saved environment; restoring yields a state indistinguishable from the original.
struct EnvSnapshot {
  EnvState state;
};

inline EnvSnapshot snapshot(const EnvState& env) { return {env}; }
inline EnvState restore(const EnvSnapshot& snap) { return snap.state; }

}  // namespace motorfep
