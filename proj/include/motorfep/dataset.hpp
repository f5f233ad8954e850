#pragma once

// Handwriting trajectories: a plain-text interchange format, rendering onto
// the drawing canvas, and class-mean filters for the chaining classifier.
//
// File format (UTF-8, LF line endings):
//
//   s              <- record header: the label
//   0.81,0.79      <- one "x,y" point per line
//   0.62,0.88
//                  <- blank line ends the record
//   c
//   ...
//
// Lines starting with '#' are comments. In `velocities` mode each point is a
// pen-tip velocity and positions are recovered by cumulative summation.

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "canvas.hpp"
#include "chaining.hpp"
#include "errors.hpp"
#include "free_energy.hpp"
#include "rng.hpp"

namespace motorfep {

struct PenTrajectory {
  std::string label;
  std::vector<Vec2> points;

  friend bool operator==(const PenTrajectory&, const PenTrajectory&) = default;
};

enum class TrajectoryFormat { positions, velocities };

inline constexpr double kMarginLow = 0.1;
inline constexpr double kMarginHigh = 0.9;

/// Per-axis min-max scaling into [0.1, 0.9]; a constant axis maps to 0.5.
inline void normalize(PenTrajectory& t) {
  if (t.points.empty()) return;
  auto rescale = [&](auto get) {
    double lo = get(t.points.front()), hi = lo;
    for (auto& p : t.points) {
      lo = std::min(lo, get(p));
      hi = std::max(hi, get(p));
    }
    for (auto& p : t.points) {
      double& v = get(p);
      v = hi > lo ? kMarginLow + (kMarginHigh - kMarginLow) * (v - lo) / (hi - lo) : 0.5;
    }
  };
  rescale([](Vec2& p) -> double& { return p.x; });
  rescale([](Vec2& p) -> double& { return p.y; });
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

using WarningSink = std::function<void(const std::string&)>;

inline void warn_to_stderr(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

inline std::vector<PenTrajectory> parse_trajectories(std::istream& in, TrajectoryFormat format,
                                                     const WarningSink& warn = warn_to_stderr) {
  std::vector<PenTrajectory> out;
  PenTrajectory current;
  bool open = false;
  std::size_t header_line = 0;

  auto finish = [&] {
    if (!open) return;
    open = false;
    if (current.points.size() < 2) {
      if (warn)
        warn("record '" + current.label + "' at line " + std::to_string(header_line) + " has " +
             std::to_string(current.points.size()) + " point(s); skipped");
      return;
    }
    if (format == TrajectoryFormat::velocities) {
      Vec2 acc{};
      for (auto& p : current.points) {
        acc.x += p.x;
        acc.y += p.y;
        p = acc;
      }
    }
    normalize(current);
    out.push_back(std::move(current));
  };

  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = detail::trim(raw);
    if (!line.empty() && line.front() == '#') continue;
    if (line.empty()) {
      finish();
      continue;
    }
    if (!open) {
      if (line.find(',') != std::string_view::npos)
        throw ParseError(lineno, "expected a label line, got '" + std::string(line) + "'");
      current = PenTrajectory{std::string(line), {}};
      open = true;
      header_line = lineno;
      continue;
    }
    const auto comma = line.find(',');
    Vec2 p;
    if (comma == std::string_view::npos || !detail::parse_double(line.substr(0, comma), p.x) ||
        !detail::parse_double(line.substr(comma + 1), p.y))
      throw ParseError(lineno, "expected 'x,y', got '" + std::string(line) + "'");
    current.points.push_back(p);
  }
  finish();
  return out;
}

inline std::vector<PenTrajectory> load_trajectories(const std::string& path,
                                                    TrajectoryFormat format,
                                                    const WarningSink& warn = warn_to_stderr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file '" + path + "'");
  return parse_trajectories(in, format, warn);
}

inline void write_trajectories(std::ostream& os, std::span<const PenTrajectory> trajs) {
  char buf[64];
  auto put = [&](double v) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, ptr - buf);
  };
  for (const auto& t : trajs) {
    os << t.label << '\n';
    for (const auto& p : t.points) {
      put(p.x);
      os << ',';
      put(p.y);
      os << '\n';
    }
    os << '\n';
  }
}

inline Observation render_trajectory(const PenTrajectory& traj) {
  Canvas canvas;
  if (traj.points.size() == 1) rasterize_segment(canvas, traj.points[0], traj.points[0]);
  for (std::size_t i = 1; i < traj.points.size(); ++i)
    rasterize_segment(canvas, traj.points[i - 1], traj.points[i]);
  return observe(canvas);
}

/// Pixel-wise mean of the rendered trajectories of each requested label.
inline ClassFilterSet build_class_filters(std::span<const PenTrajectory> trajs,
                                          const std::vector<std::string>& labels,
                                          double eps = kDefaultEps) {
  std::vector<std::vector<double>> filters;
  for (const auto& label : labels) {
    std::vector<double> sum(kPixels, 0.0);
    std::size_t count = 0;
    for (const auto& t : trajs) {
      if (t.label != label) continue;
      const Observation o = render_trajectory(t);
      for (std::size_t l = 0; l < kPixels; ++l) sum[l] += o.pixels[l];
      ++count;
    }
    if (count == 0) throw ConfigError("no trajectories for label '" + label + "'");
    for (auto& v : sum) v /= static_cast<double>(count);
    filters.push_back(std::move(sum));
  }
  return ClassFilterSet(labels, std::move(filters), eps);
}

// ---------------------------------------------------------------------------
// Synthetic corpus. Stands in for recorded handwriting when none is supplied:
// single-stroke glyph skeletons with random slant, rotation and wobble.

namespace detail {

using Polyline = std::vector<Vec2>;

inline void append_arc(Polyline& out, Vec2 center, double rx, double ry, double from_deg,
                       double to_deg, int samples) {
  for (int i = 0; i <= samples; ++i) {
    const double a = (from_deg + (to_deg - from_deg) * i / samples) * std::numbers::pi / 180.0;
    out.push_back({center.x + rx * std::cos(a), center.y + ry * std::sin(a)});
  }
}

inline void append_line(Polyline& out, Vec2 from, Vec2 to, int samples) {
  for (int i = 0; i <= samples; ++i) {
    const double s = static_cast<double>(i) / samples;
    out.push_back({from.x + (to.x - from.x) * s, from.y + (to.y - from.y) * s});
  }
}

inline Polyline glyph_skeleton(const std::string& label) {
  Polyline p;
  if (label == "c") {
    append_arc(p, {0.55, 0.5}, 0.35, 0.4, 40, 320, 40);
  } else if (label == "s") {
    append_arc(p, {0.5, 0.7}, 0.25, 0.2, 20, 270, 25);
    append_arc(p, {0.5, 0.3}, 0.25, 0.2, 90, -160, 25);
  } else if (label == "i") {
    append_line(p, {0.35, 0.55}, {0.5, 0.85}, 8);
    append_line(p, {0.5, 0.85}, {0.5, 0.2}, 15);
    append_arc(p, {0.6, 0.2}, 0.1, 0.08, 180, 330, 8);
  } else if (label == "h") {
    append_line(p, {0.3, 0.95}, {0.3, 0.05}, 20);
    append_line(p, {0.3, 0.05}, {0.3, 0.4}, 8);
    append_arc(p, {0.5, 0.4}, 0.2, 0.2, 180, 0, 15);
    append_line(p, {0.7, 0.4}, {0.72, 0.05}, 8);
  } else if (label == "r") {
    append_line(p, {0.35, 0.7}, {0.35, 0.1}, 15);
    append_line(p, {0.35, 0.1}, {0.35, 0.45}, 8);
    append_arc(p, {0.55, 0.45}, 0.2, 0.2, 180, 45, 12);
  } else {
    throw ConfigError("no synthetic skeleton for label '" + label + "'");
  }
  return p;
}

}  // namespace detail

inline const std::vector<std::string>& default_letters() {
  static const std::vector<std::string> letters{"c", "h", "i", "s", "r"};
  return letters;
}

/// `per_class` jittered, normalized renditions of each label.
inline std::vector<PenTrajectory> synthesize_letters(const std::vector<std::string>& labels,
                                                     std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed, Stream::dataset);
  std::vector<PenTrajectory> out;
  for (const auto& label : labels) {
    const auto skeleton = detail::glyph_skeleton(label);
    for (std::size_t r = 0; r < per_class; ++r) {
      const double rot = rng.normal(0.0, 0.08);
      const double shear = rng.normal(0.0, 0.12);
      const double amp = rng.uniform(0.0, 0.025);
      const double freq = rng.uniform(1.0, 3.0);
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      PenTrajectory t{label, {}};
      const double cr = std::cos(rot), sr = std::sin(rot);
      for (std::size_t i = 0; i < skeleton.size(); ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(skeleton.size() - 1);
        double x = skeleton[i].x - 0.5, y = skeleton[i].y - 0.5;
        x += shear * y;
        const double wobble = amp * std::sin(2.0 * std::numbers::pi * freq * s + phase);
        x += wobble + rng.normal(0.0, 0.004);
        y += 0.5 * wobble + rng.normal(0.0, 0.004);
        t.points.push_back({0.5 + cr * x - sr * y, 0.5 + sr * x + cr * y});
      }
      normalize(t);
      out.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace motorfep
