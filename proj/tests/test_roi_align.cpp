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

#include "pantext/roi_align.hpp"
#include "pantext/verify/oracles.hpp"

using namespace pantext;

namespace {

Tensor ramp(std::size_t c, std::size_t h, std::size_t w, double ax, double ay, double b) {
  Tensor t(Shape{1, c, h, w});
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) t.at(0, k, y, x) = ax * x + ay * y + b + static_cast<double>(k);
    }
  }
  return t;
}

Tensor random_map(Rng& rng, std::size_t c, std::size_t h, std::size_t w) {
  Tensor t(Shape{1, c, h, w});
  for (double& v : t.data()) v = rng.uniform(-1, 1);
  return t;
}

PyramidFeatures constant_pyramid(std::size_t c, std::size_t size, double a, double b, double d) {
  PyramidFeatures p;
  p.levels[0] = Tensor(Shape{1, c, size / 4, size / 4}, a);
  p.levels[1] = Tensor(Shape{1, c, size / 8, size / 8}, b);
  p.levels[2] = Tensor(Shape{1, c, size / 16, size / 16}, d);
  return p;
}

ConvParams averaging_reduce(std::size_t c) {
  ConvParams p = ConvParams::zeros(c, 3 * c, 1);
  for (std::size_t o = 0; o < c; ++o) {
    for (std::size_t l = 0; l < 3; ++l) p.weights.at(o, l * c + o, 0, 0) = 1.0 / 3.0;
  }
  return p;
}

}  // namespace

TEST(RoiAlign, ConstantMapExact) {
  for (double c : {0.0, 1.0, -3.7, 0.1, 1e6}) {
    const Tensor f(Shape{1, 2, 16, 16}, c);
    for (const AxisRect& roi : {AxisRect{0, 0, 64, 64}, AxisRect{3.3, 7.1, 19.9, 12.4}, AxisRect{-40, -40, 200, 90}}) {
      const Tensor out = roi_align(f, roi, 0.25);
      EXPECT_EQ(out.shape().c, 2u);
      for (double v : out.data()) EXPECT_EQ(v, c);
    }
  }
}

TEST(RoiAlign, AffineMapGivesSamplePointMean) {
  // Interior roi on f(x, y) = x: each bin equals the mean sample x.
  const Tensor f = ramp(1, 32, 32, 1.0, 0.0, 0.0);
  const AxisRect roi{20, 24, 90, 100};
  const double scale = 0.25;
  const Tensor out = roi_align(f, roi, scale);
  const double bin_w = (roi.x2 - roi.x1) * scale / 7.0;
  for (std::size_t by = 0; by < 7; ++by) {
    for (std::size_t bx = 0; bx < 7; ++bx) {
      const double x0 = roi.x1 * scale - 0.5 + bx * bin_w;
      const double want = 0.5 * ((x0 + 0.25 * bin_w) + (x0 + 0.75 * bin_w));
      EXPECT_NEAR(out.at(0, 0, by, bx), want, 1e-12);
    }
  }
}

TEST(RoiAlign, GridAlignedSingleSampleIndexesCells) {
  Rng rng(51);
  const Tensor f = random_map(rng, 3, 20, 20);
  RoiSpec spec;
  spec.samples = 1;
  // Feature cells 4..10 (inclusive) in both axes at scale 1.
  const Tensor out = roi_align(f, {4, 5, 11, 12}, 1.0, spec);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < 7; ++y) {
      for (std::size_t x = 0; x < 7; ++x) EXPECT_NEAR(out.at(0, c, y, x), f.at(0, c, 5 + y, 4 + x), 1e-15);
    }
  }
}

TEST(RoiAlign, Errors) {
  const Tensor f(Shape{1, 1, 8, 8});
  EXPECT_THROW(roi_align(f, {5, 5, 5, 9}, 1.0), GeometryError);
  EXPECT_THROW(roi_align(Tensor(Shape{2, 1, 8, 8}), {0, 0, 4, 4}, 1.0), ShapeError);
  RoiSpec bad;
  bad.samples = 0;
  EXPECT_THROW(roi_align(f, {0, 0, 4, 4}, 1.0, bad), ShapeError);
}

TEST(RoiAlign, Linearity) {
  Rng rng(52);
  for (int t = 0; t < 20; ++t) {
    const Tensor a = random_map(rng, 2, 12, 15), b = random_map(rng, 2, 12, 15);
    const double alpha = rng.uniform(-2, 2), beta = rng.uniform(-2, 2);
    Tensor mix(a.shape());
    for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = alpha * a.data()[i] + beta * b.data()[i];
    const AxisRect roi = verify::random_rect(rng, 60);
    const Tensor ra = roi_align(a, roi, 0.25), rb = roi_align(b, roi, 0.25), rm = roi_align(mix, roi, 0.25);
    for (std::size_t i = 0; i < rm.size(); ++i) {
      EXPECT_NEAR(rm.data()[i], alpha * ra.data()[i] + beta * rb.data()[i], 1e-10);
    }
  }
}

TEST(RoiAlign, IntegerShiftCovariance) {
  Rng rng(53);
  const Tensor f = random_map(rng, 2, 40, 40);
  const std::size_t dy = 3, dx = 5;
  Tensor shifted(f.shape());
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t y = dy; y < 40; ++y) {
      for (std::size_t x = dx; x < 40; ++x) shifted.at(0, c, y, x) = f.at(0, c, y - dy, x - dx);
    }
  }
  const double scale = 0.25;
  for (int t = 0; t < 20; ++t) {
    const double x1 = rng.uniform(8, 60), y1 = rng.uniform(8, 60);
    const AxisRect roi{x1, y1, x1 + rng.uniform(4, 60), y1 + rng.uniform(4, 60)};
    const AxisRect moved{roi.x1 + dx / scale, roi.y1 + dy / scale, roi.x2 + dx / scale, roi.y2 + dy / scale};
    const Tensor a = roi_align(f, roi, scale), b = roi_align(shifted, moved, scale);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-9);
  }
}

TEST(SkipRoiAlign, AveragingReduceOfConstantLevels) {
  const PyramidFeatures p = constant_pyramid(4, 128, 1.5, -2.0, 6.0);
  for (const AxisRect& roi : {AxisRect{0, 0, 128, 128}, AxisRect{10, 20, 37, 45}}) {
    const Tensor out = skip_roi_align(p, roi, averaging_reduce(4));
    EXPECT_EQ(out.shape(), (Shape{1, 4, 7, 7}));
    for (double v : out.data()) EXPECT_NEAR(v, (1.5 - 2.0 + 6.0) / 3.0, 1e-14);
  }
}

TEST(SkipRoiAlign, ZeroPyramidZeroOutput) {
  const PyramidFeatures p = constant_pyramid(3, 64, 0, 0, 0);
  Rng rng(54);
  ConvParams reduce = ConvParams::zeros(3, 9, 1);
  for (double& w : reduce.weights.data()) w = rng.gaussian(0, 1);
  for (int t = 0; t < 10; ++t) {
    const Tensor out = skip_roi_align(p, verify::random_rect(rng, 64), reduce);
    EXPECT_EQ(out.shape(), (Shape{1, 3, 7, 7}));
    for (double v : out.data()) EXPECT_EQ(v, 0.0);
  }
}

TEST(SkipRoiAlign, EveryLevelContributes) {
  Rng rng(55);
  PyramidFeatures p;
  p.levels[0] = random_map(rng, 2, 32, 32);
  p.levels[1] = random_map(rng, 2, 16, 16);
  p.levels[2] = random_map(rng, 2, 8, 8);
  const ConvParams reduce = averaging_reduce(2);
  const AxisRect roi{30, 30, 40, 40};  // tiny roi, would map to P2 alone under FPN assignment
  const Tensor base = skip_roi_align(p, roi, reduce);
  for (std::size_t l = 0; l < 3; ++l) {
    PyramidFeatures q = p;
    for (double& v : q.levels[l].data()) v += 1.0;
    const Tensor moved = skip_roi_align(q, roi, reduce);
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(moved.data()[i] - base.data()[i], 1.0 / 3.0, 1e-12);
  }
}

TEST(SkipRoiAlign, ConcatOrderAndErrors) {
  const PyramidFeatures p = constant_pyramid(1, 64, 1.0, 10.0, 100.0);
  ConvParams pick = ConvParams::zeros(1, 3, 1);
  for (std::size_t l = 0; l < 3; ++l) {
    pick.weights.data()[0] = pick.weights.data()[1] = pick.weights.data()[2] = 0.0;
    pick.weights.data()[l] = 1.0;
    EXPECT_EQ(skip_roi_align(p, {0, 0, 30, 30}, pick).at(0, 0, 3, 3), std::pow(10.0, static_cast<double>(l)));
  }
  PyramidFeatures missing = p;
  missing.levels[1] = Tensor();
  EXPECT_THROW(skip_roi_align(missing, {0, 0, 30, 30}, pick), ShapeError);
  EXPECT_THROW(skip_roi_align(p, {0, 0, 30, 30}, ConvParams::zeros(1, 3, 3)), ShapeError);
}
