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

// Reference implementations used to cross-check the library. They are
// written independently of the production code paths: nested-loop
// convolution, matrix-based greedy NMS, stratified Monte-Carlo overlap.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pantext/geometry.hpp"
#include "pantext/image.hpp"
#include "pantext/nms.hpp"
#include "pantext/random.hpp"
#include "pantext/tensor.hpp"

namespace pantext::verify {

// Direct O(n^4) convolution, same summation order as conv2d.
inline Tensor naive_conv2d(const Tensor& x, const ConvParams& p) {
  const long long kh = static_cast<long long>(p.kernel_h());
  const long long kw = static_cast<long long>(p.kernel_w());
  const long long s = static_cast<long long>(p.stride);
  const long long pad = static_cast<long long>(p.padding);
  const long long d = static_cast<long long>(p.dilation);
  const long long ih = static_cast<long long>(x.height());
  const long long iw = static_cast<long long>(x.width());
  const long long oh = (ih + 2 * pad - d * (kh - 1) - 1) / s + 1;
  const long long ow = (iw + 2 * pad - d * (kw - 1) - 1) / s + 1;
  Tensor out(Shape{x.batch(), p.out_channels(), static_cast<std::size_t>(oh), static_cast<std::size_t>(ow)});
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t oc = 0; oc < p.out_channels(); ++oc) {
      for (long long y = 0; y < oh; ++y) {
        for (long long xx = 0; xx < ow; ++xx) {
          double acc = p.bias[oc];
          for (std::size_t ic = 0; ic < p.in_channels(); ++ic) {
            for (long long ky = 0; ky < kh; ++ky) {
              for (long long kx = 0; kx < kw; ++kx) {
                const long long sy = y * s - pad + ky * d;
                const long long sx = xx * s - pad + kx * d;
                if (sy < 0 || sy >= ih || sx < 0 || sx >= iw) continue;
                acc += p.weights.at(oc, ic, static_cast<std::size_t>(ky), static_cast<std::size_t>(kx)) *
                       x.at(n, ic, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
              }
            }
          }
          out.at(n, oc, static_cast<std::size_t>(y), static_cast<std::size_t>(xx)) = acc;
        }
      }
    }
  }
  return out;
}

// Greedy NMS from a precomputed IoU matrix: visit boxes by (score desc, id
// asc); a box survives iff no earlier survivor overlaps it above threshold.
template <class Geometry, class IouFn>
std::vector<std::size_t> brute_force_nms(const std::vector<ScoredBox<Geometry>>& boxes, double thresh,
                                         IouFn&& iou) {
  const std::size_t n = boxes.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = iou(boxes[i].box, boxes[j].box);
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // Selection sort keeps this obviously correct.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = boxes[order[j]];
      const auto& b = boxes[order[best]];
      if (a.score > b.score || (a.score == b.score && a.id < b.id)) best = j;
    }
    std::swap(order[i], order[best]);
  }
  std::vector<bool> removed(n, false);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t bi = order[i];
    if (removed[bi]) continue;
    keep.push_back(boxes[bi].id);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (m[bi][order[j]] > thresh) removed[order[j]] = true;
    }
  }
  return keep;
}

// Rectangle IoU from explicit overlap extents.
inline double rect_iou_oracle(const AxisRect& a, const AxisRect& b) {
  const double ow = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double oh = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ow <= 0.0 || oh <= 0.0) return 0.0;
  const double inter = ow * oh;
  return inter / ((a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter);
}

// Half-pixel bilinear upsampling evaluated one output pixel at a time.
inline Tensor naive_upsample(const Tensor& x, std::size_t oh, std::size_t ow) {
  Tensor out(Shape{x.batch(), x.channels(), oh, ow});
  const auto src = [](std::size_t d, std::size_t in, std::size_t out_n) {
    const double v = (static_cast<double>(d) + 0.5) * static_cast<double>(in) / static_cast<double>(out_n) - 0.5;
    return std::min(std::max(v, 0.0), static_cast<double>(in - 1));
  };
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t xx = 0; xx < ow; ++xx) {
          const double sy = src(y, x.height(), oh);
          const double sx = src(xx, x.width(), ow);
          const auto y0 = static_cast<std::size_t>(sy);
          const auto x0 = static_cast<std::size_t>(sx);
          const std::size_t y1 = std::min(y0 + 1, x.height() - 1);
          const std::size_t x1 = std::min(x0 + 1, x.width() - 1);
          const double fy = sy - static_cast<double>(y0);
          const double fx = sx - static_cast<double>(x0);
          out.at(n, c, y, xx) = (1 - fy) * (1 - fx) * x.at(n, c, y0, x0) + (1 - fy) * fx * x.at(n, c, y0, x1) +
                                fy * (1 - fx) * x.at(n, c, y1, x0) + fy * fx * x.at(n, c, y1, x1);
        }
      }
    }
  }
  return out;
}

// Crossing-number point-in-polygon, independent of the library's variant.
inline bool crossing_inside(double px, double py, const Quad& q) {
  bool inside = false;
  for (std::size_t i = 0, j = 3; i < 4; j = i++) {
    const double xi = q[i].x, yi = q[i].y, xj = q[j].x, yj = q[j].y;
    if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi) inside = !inside;
  }
  return inside;
}

// IoU estimate from `samples` jittered-grid points over the joint bounding box.
inline double monte_carlo_iou(const Quad& a, const Quad& b, std::size_t samples, Rng& rng) {
  double x1 = a[0].x, y1 = a[0].y, x2 = a[0].x, y2 = a[0].y;
  for (const Quad* q : {&a, &b}) {
    for (const Point& p : q->v) {
      x1 = std::min(x1, p.x);
      y1 = std::min(y1, p.y);
      x2 = std::max(x2, p.x);
      y2 = std::max(y2, p.y);
    }
  }
  const auto side = static_cast<std::size_t>(std::sqrt(static_cast<double>(samples)));
  const double cw = (x2 - x1) / static_cast<double>(side);
  const double ch = (y2 - y1) / static_cast<double>(side);
  std::size_t both = 0;
  std::size_t either = 0;
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      const double px = x1 + (static_cast<double>(j) + rng.uniform()) * cw;
      const double py = y1 + (static_cast<double>(i) + rng.uniform()) * ch;
      const bool ia = crossing_inside(px, py, a);
      const bool ib = crossing_inside(px, py, b);
      both += ia && ib;
      either += ia || ib;
    }
  }
  return either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
}

// Random convex quad: four sorted angles on a circle (a cyclic quad, always
// convex) under a random linear map, then translated. Vertex order is
// counter-clockwise on screen half of the time.
inline Quad random_convex_quad(Rng& rng, double extent = 100.0) {
  for (;;) {
    std::array<double, 4> ang;
    for (double& t : ang) t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    std::sort(ang.begin(), ang.end());
    bool spread = true;
    for (std::size_t i = 0; i < 4; ++i) {
      const double next = i == 3 ? ang[0] + 2.0 * std::numbers::pi : ang[i + 1];
      spread = spread && next - ang[i] > 0.2;
    }
    if (!spread) continue;
    const double a = rng.uniform(0.3, 1.0) * extent * 0.25;
    const double b = rng.uniform(-0.5, 0.5) * extent * 0.25;
    const double c = rng.uniform(-0.5, 0.5) * extent * 0.25;
    const double d = rng.uniform(0.3, 1.0) * extent * 0.25;
    if (std::abs(a * d - b * c) < 1e-3 * extent * extent * 0.0625) continue;
    const double tx = rng.uniform(0.3, 0.7) * extent;
    const double ty = rng.uniform(0.3, 0.7) * extent;
    Quad q;
    for (std::size_t i = 0; i < 4; ++i) {
      const double ux = std::cos(ang[i]);
      const double uy = std::sin(ang[i]);
      q[i] = {tx + a * ux + b * uy, ty + c * ux + d * uy};
    }
    return q;
  }
}

inline AxisRect random_rect(Rng& rng, double extent = 100.0) {
  const double x1 = rng.uniform(0.0, extent * 0.8);
  const double y1 = rng.uniform(0.0, extent * 0.8);
  return {x1, y1, x1 + rng.uniform(1.0, extent * 0.4), y1 + rng.uniform(1.0, extent * 0.4)};
}

// Deterministic test card: a smooth background with dark horizontal and
// slanted bars standing in for text lines.
inline RgbImage make_fixture_image(std::size_t width, std::size_t height) {
  RgbImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(width * height * 3);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = static_cast<double>(x) / static_cast<double>(width);
      const double fy = static_cast<double>(y) / static_cast<double>(height);
      double r = 200.0 + 40.0 * fx;
      double g = 180.0 + 50.0 * fy;
      double b = 150.0 + 30.0 * std::sin(6.0 * fx + 3.0 * fy);
      const bool bar1 = fy > 0.2 && fy < 0.3 && fx > 0.1 && fx < 0.7;
      const bool bar2 = std::abs((fy - 0.6) - 0.3 * (fx - 0.5)) < 0.05 && fx > 0.2 && fx < 0.9;
      const bool stripes = (x / 3) % 2 == 0;
      if ((bar1 || bar2) && stripes) r = g = b = 20.0;
      const std::size_t o = (y * width + x) * 3;
      img.pixels[o] = static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
      img.pixels[o + 1] = static_cast<std::uint8_t>(std::clamp(g, 0.0, 255.0));
      img.pixels[o + 2] = static_cast<std::uint8_t>(std::clamp(b, 0.0, 255.0));
    }
  }
  return img;
}

}  // namespace pantext::verify
