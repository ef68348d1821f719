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

#include "pantext/random.hpp"
#include "pantext/tensor.hpp"
#include "pantext/verify/oracles.hpp"

using namespace pantext;

namespace {

Tensor random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(s);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

ConvParams random_conv(std::size_t oc, std::size_t ic, std::size_t k, std::size_t stride, std::size_t pad,
                       std::size_t dil, Rng& rng, bool bias = true) {
  ConvParams p;
  p.weights = random_tensor(Shape{oc, ic, k, k}, rng);
  p.bias.assign(oc, 0.0);
  if (bias) {
    for (double& b : p.bias) b = rng.uniform(-1.0, 1.0);
  }
  p.stride = stride;
  p.padding = pad;
  p.dilation = dil;
  return p;
}

}  // namespace

TEST(Tensor, DataLengthMatchesShape) {
  Tensor t(Shape{2, 3, 4, 5});
  EXPECT_EQ(t.size(), 120u);
  EXPECT_THROW(Tensor(Shape{1, 1, 2, 2}, std::vector<double>(3)), ShapeError);
}

TEST(Conv2d, ZeroInputZeroBiasGivesZero) {
  Rng rng(1);
  const Tensor x(Shape{1, 1, 3, 3});
  ConvParams p = random_conv(2, 1, 3, 1, 1, 1, rng, false);
  const Tensor y = conv2d(x, p);
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv2d, IdentityKernel) {
  Rng rng(2);
  const Tensor x = random_tensor(Shape{1, 1, 4, 6}, rng);
  ConvParams p = ConvParams::zeros(1, 1, 1);
  p.weights.at(0, 0, 0, 0) = 1.0;
  const Tensor y = conv2d(x, p);
  ASSERT_EQ(y.shape(), x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
}

TEST(Conv2d, DilatedRampMatchesNaiveOracle) {
  Tensor x(Shape{1, 1, 5, 5});
  for (std::size_t i = 0; i < 25; ++i) x.data()[i] = static_cast<double>(i);
  ConvParams p;
  p.weights = Tensor(Shape{1, 1, 3, 3}, 1.0);
  p.bias = {0.0};
  p.dilation = 2;
  p.padding = 2;
  const Tensor y = conv2d(x, p);
  const Tensor want = verify::naive_conv2d(x, p);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 5, 5}));
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(y.data()[i], want.data()[i]);
  // Centre pixel sums the 3x3 lattice {0, 2, 4} x {0, 2, 4}.
  EXPECT_EQ(y.at(0, 0, 2, 2), 0 + 2 + 4 + 10 + 12 + 14 + 20 + 22 + 24);
}

TEST(Conv2d, OutputExtentFormula) {
  Rng rng(3);
  for (std::size_t stride : {1u, 2u, 3u}) {
    for (std::size_t dil : {1u, 2u}) {
      for (std::size_t pad : {0u, 1u, 3u}) {
        const Tensor x = random_tensor(Shape{1, 2, 11, 9}, rng);
        const ConvParams p = random_conv(3, 2, 3, stride, pad, dil, rng);
        const Tensor y = conv2d(x, p);
        EXPECT_EQ(y.height(), (11 + 2 * pad - dil * 2 - 1) / stride + 1);
        EXPECT_EQ(y.width(), (9 + 2 * pad - dil * 2 - 1) / stride + 1);
      }
    }
  }
}

TEST(Conv2d, MatchesNaiveOracleOnRandomShapes) {
  Rng rng(4);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 1 + rng.below(2), ic = 1 + rng.below(8), oc = 1 + rng.below(6);
    const std::size_t h = 3 + rng.below(14), w = 3 + rng.below(14);
    const std::size_t k = rng.below(2) ? 3 : 1;
    const std::size_t stride = 1 + rng.below(2), dil = 1 + rng.below(3), pad = rng.below(4);
    if (h + 2 * pad < dil * (k - 1) + 1 || w + 2 * pad < dil * (k - 1) + 1) continue;
    const Tensor x = random_tensor(Shape{n, ic, h, w}, rng);
    const ConvParams p = random_conv(oc, ic, k, stride, pad, dil, rng);
    const Tensor y = conv2d(x, p);
    const Tensor want = verify::naive_conv2d(x, p);
    ASSERT_EQ(y.shape(), want.shape());
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y.data()[i], want.data()[i], 1e-10);
  }
}

TEST(Conv2d, LargeMapPathMatchesOracle) {
  Rng rng(5);
  const Tensor x = random_tensor(Shape{1, 8, 40, 40}, rng);
  const ConvParams p = random_conv(8, 8, 3, 1, 1, 1, rng);
  ASSERT_GT(8 * 9 * 40 * 40 * 16, 0);
  const Tensor y = conv2d(x, p);
  const Tensor want = verify::naive_conv2d(x, p);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(y.data()[i], want.data()[i]);
}

TEST(Conv2d, LinearInInput) {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const Tensor x = random_tensor(Shape{1, 3, 9, 7}, rng);
    const Tensor y = random_tensor(Shape{1, 3, 9, 7}, rng);
    const ConvParams p = random_conv(4, 3, 3, 1, 2, 2, rng, false);
    const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
    Tensor mix(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) mix.data()[i] = a * x.data()[i] + b * y.data()[i];
    const Tensor lhs = conv2d(mix, p);
    const Tensor cx = conv2d(x, p), cy = conv2d(y, p);
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      EXPECT_NEAR(lhs.data()[i], a * cx.data()[i] + b * cy.data()[i], 1e-9);
    }
  }
}

TEST(Conv2d, ShapeErrorsNameTheDimension) {
  Rng rng(7);
  const Tensor x = random_tensor(Shape{1, 2, 4, 4}, rng);
  const ConvParams p = random_conv(1, 3, 3, 1, 1, 1, rng);
  try {
    conv2d(x, p);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("channels"), std::string::npos);
  }
  const ConvParams big = random_conv(1, 2, 3, 1, 0, 3, rng);
  try {
    conv2d(x, big);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("height"), std::string::npos);
  }
  ConvParams even = random_conv(1, 2, 3, 1, 0, 1, rng);
  even.weights = Tensor(Shape{1, 2, 2, 2});
  EXPECT_THROW(conv2d(x, even), ShapeError);
}

TEST(GlobalAvgPool, ConstantAndArithmetic) {
  EXPECT_EQ(global_avg_pool(Tensor(Shape{1, 1, 3, 4}, 5.0)).at(0, 0, 0, 0), 5.0);
  const Tensor t(Shape{1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  const Tensor g = global_avg_pool(t);
  EXPECT_EQ(g.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_EQ(g.at(0, 0, 0, 0), 2.5);
  EXPECT_THROW(global_avg_pool(Tensor(Shape{1, 1, 0, 3})), ShapeError);
}

TEST(GlobalAvgPool, MatchesSummationOracle) {
  Rng rng(8);
  const Tensor x = random_tensor(Shape{1, 4, 7, 7}, rng);
  const Tensor g = global_avg_pool(x);
  for (std::size_t c = 0; c < 4; ++c) {
    double s = 0.0;
    for (std::size_t y = 0; y < 7; ++y) {
      for (std::size_t xx = 0; xx < 7; ++xx) s += x.at(0, c, y, xx);
    }
    EXPECT_NEAR(g.at(0, c, 0, 0), s / 49.0, 1e-12);
  }
}

TEST(BilinearUpsample, ConstantIdentityAndErrors) {
  const Tensor c(Shape{1, 2, 3, 3}, 1.75);
  const Tensor up = bilinear_upsample(c, 7, 5);
  for (double v : up.data()) EXPECT_EQ(v, 1.75);
  Rng rng(9);
  const Tensor x = random_tensor(Shape{1, 2, 4, 5}, rng);
  const Tensor same = bilinear_upsample(x, 4, 5);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(same.data()[i], x.data()[i]);
  EXPECT_THROW(bilinear_upsample(x, 0, 5), ShapeError);
  EXPECT_THROW(bilinear_upsample(x, 3, 5), ShapeError);
}

TEST(BilinearUpsample, TwoByTwoHandFormula) {
  const double a = 1, b = 2, c = 3, d = 4;  // [[a, b], [c, d]]
  const Tensor x(Shape{1, 1, 2, 2}, std::vector<double>{a, b, c, d});
  const Tensor y = bilinear_upsample(x, 4, 4);
  // Source coordinates (dst + 0.5) / 2 - 0.5 clamp to {0, 0.25, 0.75, 1}.
  const double s[4] = {0.0, 0.25, 0.75, 1.0};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double fy = s[i], fx = s[j];
      const double want = (1 - fy) * ((1 - fx) * a + fx * b) + fy * ((1 - fx) * c + fx * d);
      EXPECT_NEAR(y.at(0, 0, i, j), want, 1e-15) << i << "," << j;
    }
  }
}

TEST(BilinearUpsample, AffineExactInInterior) {
  Rng rng(10);
  for (int t = 0; t < 10; ++t) {
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2), c = rng.uniform(-2, 2);
    const std::size_t h = 3 + rng.below(6), w = 3 + rng.below(6), f = 2 + rng.below(3);
    Tensor x(Shape{1, 1, h, w});
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) x.at(0, 0, i, j) = a * j + b * i + c;
    }
    const Tensor y = bilinear_upsample(x, h * f, w * f);
    for (std::size_t i = 0; i < h * f; ++i) {
      for (std::size_t j = 0; j < w * f; ++j) {
        const double sy = (i + 0.5) / f - 0.5, sx = (j + 0.5) / f - 0.5;
        if (sy < 0 || sx < 0 || sy > h - 1.0 || sx > w - 1.0) continue;
        EXPECT_NEAR(y.at(0, 0, i, j), a * sx + b * sy + c, 1e-9);
      }
    }
  }
}

TEST(InstanceNorm, ConstantAndHandCases) {
  const Tensor flat = instance_norm(Tensor(Shape{1, 2, 3, 3}, 4.0));
  for (double v : flat.data()) EXPECT_EQ(v, 0.0);
  const Tensor single = instance_norm(Tensor(Shape{1, 1, 1, 1}, 4.0), 0.0);
  for (double v : single.data()) EXPECT_EQ(v, 0.0);
  const Tensor pm(Shape{1, 1, 1, 2}, std::vector<double>{-1.0, 1.0});
  const Tensor y = instance_norm(pm, 0.0);
  EXPECT_EQ(y.data()[0], -1.0);
  EXPECT_EQ(y.data()[1], 1.0);
}

TEST(InstanceNorm, Statistics) {
  Rng rng(11);
  const Tensor x = random_tensor(Shape{2, 3, 9, 11}, rng, -5, 20);
  const Tensor y = instance_norm(x, 1e-5);
  for (std::size_t n = 0; n < 2; ++n) {
    for (std::size_t c = 0; c < 3; ++c) {
      const auto p = y.plane(n, c);
      double mean = 0.0;
      for (double v : p) mean += v;
      mean /= p.size();
      double var = 0.0;
      for (double v : p) var += (v - mean) * (v - mean);
      var /= p.size();
      EXPECT_LT(std::abs(mean), 1e-9);
      EXPECT_NEAR(var, 1.0, 1e-6);
    }
  }
}

TEST(Elementwise, MulByOnesAndMismatch) {
  Rng rng(12);
  const Tensor x = random_tensor(Shape{1, 2, 3, 3}, rng);
  const Tensor y = mul(x, Tensor(x.shape(), 1.0));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
  const Tensor s = add(x, x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(s.data()[i], 2 * x.data()[i]);
  EXPECT_THROW(add(x, Tensor(Shape{1, 2, 3, 4})), ShapeError);
  EXPECT_THROW(elementwise(x, Tensor(Shape{1, 1, 3, 3}), ElementwiseOp::kMul), ShapeError);
}

TEST(Activations, SigmoidReluSoftmax) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_TRUE(std::isfinite(sigmoid(-1000.0)));
  EXPECT_TRUE(std::isfinite(sigmoid(1000.0)));
  const Tensor r = relu(Tensor(Shape{1, 1, 1, 3}, std::vector<double>{-1, 0, 2}));
  EXPECT_EQ(r.data()[0], 0.0);
  EXPECT_EQ(r.data()[2], 2.0);
  const Tensor sm = softmax_channels(Tensor(Shape{1, 2, 3, 3}, 0.7));
  for (double v : sm.data()) EXPECT_EQ(v, 0.5);
}

TEST(Activations, SoftmaxSumsToOne) {
  Rng rng(13);
  const Tensor x = random_tensor(Shape{2, 5, 4, 3}, rng, -30, 30);
  const Tensor y = softmax_channels(x);
  for (std::size_t n = 0; n < 2; ++n) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < 5; ++c) s += y.at(n, c, i, j);
        EXPECT_NEAR(s, 1.0, 1e-12);
      }
    }
  }
  EXPECT_TRUE(y.all_finite());
}

TEST(ConcatAndPool, Shapes) {
  const Tensor a(Shape{1, 2, 4, 4}, 1.0), b(Shape{1, 3, 4, 4}, 2.0);
  const Tensor c = concat_channels({a, b});
  EXPECT_EQ(c.shape(), (Shape{1, 5, 4, 4}));
  EXPECT_EQ(c.at(0, 1, 3, 3), 1.0);
  EXPECT_EQ(c.at(0, 2, 0, 0), 2.0);
  EXPECT_THROW(concat_channels({a, Tensor(Shape{1, 1, 4, 5})}), ShapeError);
  Tensor m(Shape{1, 1, 2, 4}, std::vector<double>{1, 5, 2, 0, 3, -1, 7, 1});
  const Tensor p = maxpool2(m);
  EXPECT_EQ(p.shape(), (Shape{1, 1, 1, 2}));
  EXPECT_EQ(p.data()[0], 5.0);
  EXPECT_EQ(p.data()[1], 7.0);
}

TEST(Tensor, FiniteOutputsOnFiniteInputs) {
  Rng rng(14);
  const Tensor x = random_tensor(Shape{1, 3, 8, 8}, rng, -100, 100);
  const ConvParams p = random_conv(4, 3, 3, 1, 1, 1, rng);
  EXPECT_TRUE(conv2d(x, p).all_finite());
  EXPECT_TRUE(instance_norm(x).all_finite());
  EXPECT_TRUE(sigmoid(x).all_finite());
  EXPECT_TRUE(softmax_channels(x).all_finite());
  EXPECT_TRUE(bilinear_upsample(x, 16, 16).all_finite());
}
