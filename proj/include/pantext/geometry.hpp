/* Copyright (c) 2026 The PanText Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "pantext/error.hpp"

namespace pantext {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned rectangle, (x1, y1) top-left and (x2, y2) bottom-right.
struct AxisRect {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }
  bool valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
           x2 > x1 && y2 > y1;
  }
  friend bool operator==(const AxisRect&, const AxisRect&) = default;
};

// Four vertices ordered top-left, top-right, bottom-right, bottom-left.
struct Quad {
  std::array<Point, 4> v{};

  Point& operator[](std::size_t i) { return v[i]; }
  const Point& operator[](std::size_t i) const { return v[i]; }
  friend bool operator==(const Quad&, const Quad&) = default;

  static Quad from_rect(const AxisRect& r) {
    return Quad{{Point{r.x1, r.y1}, Point{r.x2, r.y1}, Point{r.x2, r.y2}, Point{r.x1, r.y2}}};
  }
};

// Offsets (dx1, dy1, ..., dx4, dy4) of quad vertices from proposal corners,
// normalised by proposal width (x) and height (y).
using QuadDelta = std::array<double, 8>;

// Centre/size regression (dx, dy, dw, dh).
using RectDelta = std::array<double, 4>;

namespace detail {

inline void require_valid(const AxisRect& r, const char* what) {
  if (!r.valid()) {
    throw GeometryError(std::string(what) + ": degenerate rectangle (" + std::to_string(r.x1) +
                        ", " + std::to_string(r.y1) + ", " + std::to_string(r.x2) + ", " +
                        std::to_string(r.y2) + ")");
  }
}

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace detail

// Proposal corner matched with quad vertex i: 0 -> (x1,y1), 1 -> (x2,y1),
// 2 -> (x2,y2), 3 -> (x1,y2).
inline Point rect_corner(const AxisRect& p, std::size_t i) {
  switch (i) {
    case 0: return {p.x1, p.y1};
    case 1: return {p.x2, p.y1};
    case 2: return {p.x2, p.y2};
    default: return {p.x1, p.y2};
  }
}

inline QuadDelta quad_encode(const Quad& g, const AxisRect& p) {
  detail::require_valid(p, "quad_encode");
  QuadDelta d{};
  for (std::size_t i = 0; i < 4; ++i) {
    const Point c = rect_corner(p, i);
    d[2 * i] = (g[i].x - c.x) / p.width();
    d[2 * i + 1] = (g[i].y - c.y) / p.height();
  }
  return d;
}

inline Quad quad_decode(const QuadDelta& d, const AxisRect& p) {
  detail::require_valid(p, "quad_decode");
  Quad q;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point c = rect_corner(p, i);
    q[i] = Point{c.x + d[2 * i] * p.width(), c.y + d[2 * i + 1] * p.height()};
  }
  return q;
}

inline RectDelta rect_encode(const AxisRect& g, const AxisRect& p) {
  detail::require_valid(g, "rect_encode (target)");
  detail::require_valid(p, "rect_encode (reference)");
  return {(g.center_x() - p.center_x()) / p.width(), (g.center_y() - p.center_y()) / p.height(),
          std::log(g.width() / p.width()), std::log(g.height() / p.height())};
}

inline AxisRect rect_decode(const RectDelta& d, const AxisRect& p) {
  detail::require_valid(p, "rect_decode");
  const double cx = p.center_x() + d[0] * p.width();
  const double cy = p.center_y() + d[1] * p.height();
  const double w = p.width() * std::exp(d[2]);
  const double h = p.height() * std::exp(d[3]);
  return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

inline double rect_iou(const AxisRect& a, const AxisRect& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

inline double signed_area(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

inline double polygon_area(std::span<const Point> poly) { return std::abs(signed_area(poly)); }
inline double polygon_area(const Quad& q) { return polygon_area(std::span<const Point>(q.v)); }

inline AxisRect quad_to_bounding_rect(const Quad& q) {
  AxisRect r{q[0].x, q[0].y, q[0].x, q[0].y};
  for (const Point& p : q.v) {
    r.x1 = std::min(r.x1, p.x);
    r.y1 = std::min(r.y1, p.y);
    r.x2 = std::max(r.x2, p.x);
    r.y2 = std::max(r.y2, p.y);
  }
  return r;
}

// Strictly convex or with collinear vertices, either winding, non-zero area.
inline bool is_convex(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (const Point& p : poly) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  }
  const double area = signed_area(poly);
  if (area == 0.0) return false;
  double scale = 0.0;
  for (const Point& p : poly) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double tol = 1e-12 * std::max(1.0, scale * scale);
  const double sign = area > 0.0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = detail::cross(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]);
    if (sign * c < -tol) return false;
  }
  // Reject self-overlapping windings (e.g. a pentagram-like vertex order):
  // total turning of a simple convex polygon is exactly one revolution.
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    const Point& c = poly[(i + 2) % n];
    const double a1 = std::atan2(b.y - a.y, b.x - a.x);
    const double a2 = std::atan2(c.y - b.y, c.x - b.x);
    double d = a2 - a1;
    while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
    while (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
    turning += d;
  }
  return std::abs(std::abs(turning) - 2.0 * std::numbers::pi) < 1e-6;
}

inline bool is_convex(const Quad& q) { return is_convex(std::span<const Point>(q.v)); }

// Sutherland-Hodgman: clips `subject` against the convex counter-clockwise
// polygon `clip` (counter-clockwise in a y-up sense, i.e. positive signed area).
inline std::vector<Point> clip_polygon(std::span<const Point> subject,
                                       std::span<const Point> clip) {
  std::vector<Point> output(subject.begin(), subject.end());
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !output.empty(); ++e) {
    const Point& a = clip[e];
    const Point& b = clip[(e + 1) % m];
    std::vector<Point> input;
    input.swap(output);
    auto side = [&](const Point& p) { return detail::cross(a, b, p); };
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Point& cur = input[i];
      const Point& prev = input[(i + input.size() - 1) % input.size()];
      const double sc = side(cur);
      const double sp = side(prev);
      if (sc >= 0.0) {
        if (sp < 0.0) {
          const double t = sp / (sp - sc);
          output.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
        }
        output.push_back(cur);
      } else if (sp >= 0.0) {
        const double t = sp / (sp - sc);
        output.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
      }
    }
  }
  return output;
}

// Copy of the quad with positive signed area.
inline std::array<Point, 4> ccw_vertices(const Quad& q) {
  std::array<Point, 4> v = q.v;
  if (signed_area(std::span<const Point>(v)) < 0.0) std::reverse(v.begin(), v.end());
  return v;
}

// IoU of two convex quads by convex clipping. Throws GeometryError on
// non-convex or degenerate input.
inline double quad_iou(const Quad& a, const Quad& b) {
  if (!is_convex(a)) throw GeometryError("quad_iou: first quad is not convex");
  if (!is_convex(b)) throw GeometryError("quad_iou: second quad is not convex");
  const auto va = ccw_vertices(a);
  const auto vb = ccw_vertices(b);
  const std::vector<Point> inter_poly =
      clip_polygon(std::span<const Point>(va), std::span<const Point>(vb));
  const double inter = inter_poly.size() < 3 ? 0.0 : polygon_area(inter_poly);
  const double uni = polygon_area(a) + polygon_area(b) - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// Even-odd test; points on an edge count as inside.
inline bool point_in_polygon(const Point& p, std::span<const Point> poly) {
  const std::size_t n = poly.size();
  double scale = 1.0;
  for (const Point& v : poly) scale = std::max({scale, std::abs(v.x), std::abs(v.y)});
  const double tol = 1e-12 * scale * scale;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[j];
    const Point& b = poly[i];
    if (std::abs(detail::cross(a, b, p)) <= tol && p.x >= std::min(a.x, b.x) - 1e-12 * scale &&
        p.x <= std::max(a.x, b.x) + 1e-12 * scale && p.y >= std::min(a.y, b.y) - 1e-12 * scale &&
        p.y <= std::max(a.y, b.y) + 1e-12 * scale) {
      return true;
    }
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xi = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xi) inside = !inside;
    }
  }
  return inside;
}

}  // namespace pantext
