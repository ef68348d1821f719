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

#include <gtest/gtest.h>

#include <cmath>

#include "pantext/geometry.hpp"
#include "pantext/verify/oracles.hpp"

using namespace pantext;

namespace {

Quad square(double x, double y, double s) { return Quad::from_rect({x, y, x + s, y + s}); }

Quad translate(Quad q, double dx, double dy) {
  for (Point& p : q.v) p = {p.x + dx, p.y + dy};
  return q;
}

// Fan triangulation from vertex 0, independent of the shoelace sum.
double fan_area(const Quad& q) {
  double a = 0.0;
  for (std::size_t i = 1; i + 1 < 4; ++i) {
    const double ux = q[i].x - q[0].x, uy = q[i].y - q[0].y;
    const double vx = q[i + 1].x - q[0].x, vy = q[i + 1].y - q[0].y;
    a += 0.5 * std::abs(ux * vy - uy * vx);
  }
  return a;
}

}  // namespace

TEST(QuadEncode, CoincidentCornersGiveZero) {
  const AxisRect p{3, 4, 30, 17};
  for (double d : quad_encode(Quad::from_rect(p), p)) EXPECT_EQ(d, 0.0);
}

TEST(QuadEncode, HandSubstitution) {
  const AxisRect p{0, 0, 100, 50};
  const Quad g{{{{10, 5}, {110, 5}, {110, 55}, {10, 55}}}};
  for (double d : quad_encode(g, p)) EXPECT_NEAR(d, 0.1, 1e-15);
}

TEST(QuadDecode, ZeroAndHandInverse) {
  const AxisRect p{0, 0, 100, 50};
  const Quad z = quad_decode(QuadDelta{}, p);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(z[i].x, rect_corner(p, i).x);
    EXPECT_EQ(z[i].y, rect_corner(p, i).y);
  }
  QuadDelta d;
  d.fill(0.1);
  const Quad q = quad_decode(d, p);
  const double want[4][2] = {{10, 5}, {110, 5}, {110, 55}, {10, 55}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(q[i].x, want[i][0], 1e-12);
    EXPECT_NEAR(q[i].y, want[i][1], 1e-12);
  }
}

TEST(QuadEncode, CornerCorrespondence) {
  EXPECT_EQ(rect_corner({1, 2, 3, 4}, 0).x, 1);
  EXPECT_EQ(rect_corner({1, 2, 3, 4}, 1).x, 3);
  EXPECT_EQ(rect_corner({1, 2, 3, 4}, 1).y, 2);
  EXPECT_EQ(rect_corner({1, 2, 3, 4}, 2).y, 4);
  EXPECT_EQ(rect_corner({1, 2, 3, 4}, 3).x, 1);
  EXPECT_EQ(rect_corner({1, 2, 3, 4}, 3).y, 4);
}

TEST(QuadEncode, DegenerateProposalThrows) {
  EXPECT_THROW(quad_encode(square(0, 0, 1), {0, 0, 0, 5}), GeometryError);
  EXPECT_THROW(quad_decode(QuadDelta{}, {0, 0, 5, -1}), GeometryError);
}

TEST(QuadEncode, RoundTripFuzz) {
  Rng rng(21);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const AxisRect p = verify::random_rect(rng, 500);
    Quad g;
    for (Point& v : g.v) v = {rng.uniform(-100, 600), rng.uniform(-100, 600)};
    const Quad b = quad_decode(quad_encode(g, p), p);
    for (std::size_t k = 0; k < 4; ++k) worst = std::max({worst, std::abs(b[k].x - g[k].x), std::abs(b[k].y - g[k].y)});
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(RectEncode, HandCasesAndRoundTrip) {
  for (double d : rect_encode({2, 3, 7, 9}, {2, 3, 7, 9})) EXPECT_EQ(d, 0.0);
  const RectDelta d = rect_encode({0, 0, 20, 20}, {0, 0, 10, 10});
  EXPECT_NEAR(d[0], 0.5, 1e-15);
  EXPECT_NEAR(d[1], 0.5, 1e-15);
  EXPECT_NEAR(d[2], std::log(2.0), 1e-15);
  EXPECT_NEAR(d[3], std::log(2.0), 1e-15);
  EXPECT_THROW(rect_encode({0, 0, 0, 1}, {0, 0, 1, 1}), GeometryError);
  Rng rng(22);
  for (int i = 0; i < 10000; ++i) {
    const AxisRect g = verify::random_rect(rng, 300), p = verify::random_rect(rng, 300);
    const AxisRect b = rect_decode(rect_encode(g, p), p);
    EXPECT_NEAR(b.x1, g.x1, 1e-9);
    EXPECT_NEAR(b.y1, g.y1, 1e-9);
    EXPECT_NEAR(b.x2, g.x2, 1e-9);
    EXPECT_NEAR(b.y2, g.y2, 1e-9);
  }
}

TEST(RectIou, HandCases) {
  EXPECT_EQ(rect_iou({0, 0, 1, 1}, {0, 0, 1, 1}), 1.0);
  EXPECT_NEAR(rect_iou({0, 0, 1, 1}, {0.5, 0, 1.5, 1}), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(rect_iou({0, 0, 1, 1}, {2, 2, 3, 3}), 0.0);
  EXPECT_EQ(rect_iou({0, 0, 1, 1}, {1, 0, 2, 1}), 0.0);
}

TEST(QuadIou, HandCases) {
  EXPECT_NEAR(quad_iou(square(0, 0, 2), square(0, 0, 2)), 1.0, 1e-15);
  EXPECT_NEAR(quad_iou(square(0, 0, 2), square(1, 0, 2)), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(quad_iou(square(0, 0, 1), square(5, 5, 1)), 0.0);
  // Unit square inside a diamond of diagonal 2: IoU = 1 / 2.
  const Quad unit = square(-0.5, -0.5, 1);
  const Quad diamond{{{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}}};
  EXPECT_NEAR(quad_iou(unit, diamond), 0.5, 1e-12);
  Rng mc(23);
  EXPECT_NEAR(quad_iou(unit, diamond), verify::monte_carlo_iou(unit, diamond, 1000000, mc), 2e-3);
}

TEST(QuadIou, EitherWindingAccepted) {
  const Quad cw = square(0, 0, 2);
  Quad ccw = cw;
  std::swap(ccw.v[1], ccw.v[3]);
  EXPECT_NEAR(quad_iou(cw, ccw), 1.0, 1e-12);
  EXPECT_NEAR(quad_iou(ccw, square(1, 0, 2)), 1.0 / 3.0, 1e-12);
}

TEST(QuadIou, NonConvexThrows) {
  const Quad dart{{{{0, 0}, {4, 0}, {1, 1}, {0, 4}}}};
  EXPECT_FALSE(is_convex(dart));
  EXPECT_THROW(quad_iou(dart, square(0, 0, 1)), GeometryError);
  const Quad bowtie{{{{0, 0}, {2, 2}, {2, 0}, {0, 2}}}};
  EXPECT_FALSE(is_convex(bowtie));
  EXPECT_THROW(quad_iou(square(0, 0, 1), bowtie), GeometryError);
}

TEST(QuadIou, Properties) {
  Rng rng(24);
  for (int i = 0; i < 2000; ++i) {
    const Quad a = verify::random_convex_quad(rng), b = verify::random_convex_quad(rng);
    const double ab = quad_iou(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_NEAR(ab, quad_iou(b, a), 1e-12);
    EXPECT_NEAR(quad_iou(a, a), 1.0, 1e-12);
    const double dx = rng.uniform(-300, 300), dy = rng.uniform(-300, 300);
    EXPECT_NEAR(quad_iou(translate(a, dx, dy), translate(b, dx, dy)), ab, 1e-12);
  }
}

TEST(QuadIou, AxisAlignedMatchesRectIou) {
  Rng rng(25);
  for (int i = 0; i < 5000; ++i) {
    const AxisRect a = verify::random_rect(rng), b = verify::random_rect(rng);
    EXPECT_NEAR(quad_iou(Quad::from_rect(a), Quad::from_rect(b)), rect_iou(a, b), 1e-12);
  }
}

TEST(QuadIou, MonteCarloOracle) {
  Rng rng(26), mc(27);
  for (int i = 0; i < 20; ++i) {
    const Quad a = verify::random_convex_quad(rng), b = verify::random_convex_quad(rng);
    EXPECT_NEAR(quad_iou(a, b), verify::monte_carlo_iou(a, b, 1000000, mc), 2e-3);
  }
}

TEST(PolygonArea, BoundsAndTriangulation) {
  const Quad q{{{{1, 2}, {5, 2}, {5, 7}, {1, 7}}}};
  const AxisRect r = quad_to_bounding_rect(q);
  EXPECT_EQ(r.x1, 1);
  EXPECT_EQ(r.y1, 2);
  EXPECT_EQ(r.x2, 5);
  EXPECT_EQ(r.y2, 7);
  EXPECT_EQ(polygon_area(square(0, 0, 1)), 1.0);
  Rng rng(28);
  for (int i = 0; i < 1000; ++i) {
    const Quad c = verify::random_convex_quad(rng);
    EXPECT_NEAR(polygon_area(c), fan_area(c), 1e-9);
  }
}

TEST(PointInPolygon, BoundaryInclusive) {
  const Quad q = square(0, 0, 2);
  const std::span<const Point> poly(q.v);
  EXPECT_TRUE(point_in_polygon({1, 1}, poly));
  EXPECT_TRUE(point_in_polygon({0, 1}, poly));
  EXPECT_TRUE(point_in_polygon({2, 2}, poly));
  EXPECT_FALSE(point_in_polygon({2.5, 1}, poly));
}
