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

#include <algorithm>
#include <cmath>

#include "pantext/nms.hpp"
#include "pantext/verify/oracles.hpp"

using namespace pantext;

namespace {

std::vector<ScoredRect> random_rects(Rng& rng, std::size_t n, bool coarse_scores) {
  std::vector<ScoredRect> v;
  for (std::size_t i = 0; i < n; ++i) {
    // Coarse scores force many ties.
    const double s = coarse_scores ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform(0, 1);
    v.push_back({verify::random_rect(rng, 60), s, i});
  }
  return v;
}

std::vector<ScoredQuad> random_quads(Rng& rng, std::size_t n) {
  std::vector<ScoredQuad> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back({verify::random_convex_quad(rng, 60), rng.uniform(0, 1), i});
  return v;
}

template <class G>
const ScoredBox<G>& by_id(const std::vector<ScoredBox<G>>& v, std::size_t id) {
  return *std::find_if(v.begin(), v.end(), [&](const auto& b) { return b.id == id; });
}

Quad rotated(double cx, double cy, double hw, double hh, double angle) {
  Quad q;
  const double c = std::cos(angle), s = std::sin(angle);
  const double corners[4][2] = {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
  for (std::size_t i = 0; i < 4; ++i) {
    q.v[i] = {cx + c * corners[i][0] - s * corners[i][1], cy + s * corners[i][0] + c * corners[i][1]};
  }
  return q;
}

}  // namespace

TEST(NmsRect, TrivialCases) {
  const std::vector<ScoredRect> one = {{{0, 0, 5, 5}, 0.3, 0}};
  EXPECT_EQ(nms_rect(one, 0.7), (std::vector<std::size_t>{0}));
  const std::vector<ScoredRect> twins = {{{0, 0, 5, 5}, 0.8, 0}, {{0, 0, 5, 5}, 0.9, 1}};
  EXPECT_EQ(nms_rect(twins, 0.7), (std::vector<std::size_t>{1}));
  EXPECT_TRUE(nms_rect({}, 0.7).empty());
  EXPECT_THROW(nms_rect(one, 1.5), ValidationError);
}

TEST(NmsRect, TieBreakLowerId) {
  const std::vector<ScoredRect> twins = {{{0, 0, 5, 5}, 0.5, 7}, {{0, 0, 5, 5}, 0.5, 3}};
  EXPECT_EQ(nms_rect(twins, 0.7), (std::vector<std::size_t>{3}));
}

TEST(NmsRect, StrictThreshold) {
  // IoU exactly 1/3 is not suppressed at threshold 1/3.
  const std::vector<ScoredRect> v = {{{0, 0, 1, 1}, 0.9, 0}, {{0.5, 0, 1.5, 1}, 0.8, 1}};
  EXPECT_EQ(nms_rect(v, rect_iou(v[0].box, v[1].box)).size(), 2u);
  EXPECT_EQ(nms_rect(v, 0.3).size(), 1u);
}

TEST(NmsRect, MatchesBruteForceOracle) {
  Rng rng(41);
  for (int t = 0; t < 500; ++t) {
    const auto boxes = random_rects(rng, 1 + rng.below(50), t % 2 == 0);
    const double thr = rng.uniform(0, 1);
    EXPECT_EQ(nms_rect(boxes, thr), verify::brute_force_nms(boxes, thr, verify::rect_iou_oracle));
  }
}

TEST(NmsRect, Properties) {
  Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    auto boxes = random_rects(rng, 40, t % 3 == 0);
    const double thr = rng.uniform(0, 1);
    const auto kept = nms_rect(boxes, thr);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        EXPECT_LE(rect_iou(by_id(boxes, kept[i]).box, by_id(boxes, kept[j]).box), thr);
      }
    }
    EXPECT_EQ(nms_rect(boxes, 1.0).size(), boxes.size());
    for (std::size_t i = boxes.size(); i > 1; --i) std::swap(boxes[i - 1], boxes[rng.below(i)]);
    EXPECT_EQ(nms_rect(boxes, thr), kept);
  }
}

TEST(NmsRect, ZeroThresholdKeepsDisjointMaximalSet) {
  Rng rng(43);
  for (int t = 0; t < 100; ++t) {
    const auto boxes = random_rects(rng, 30, false);
    const auto kept = nms_rect(boxes, 0.0);
    for (const ScoredRect& b : boxes) {
      const bool in = std::find(kept.begin(), kept.end(), b.id) != kept.end();
      bool overlaps_kept = false;
      for (std::size_t k : kept) overlaps_kept |= k != b.id && rect_iou(by_id(boxes, k).box, b.box) > 0.0;
      if (in) {
        EXPECT_FALSE(overlaps_kept);
      } else {
        EXPECT_TRUE(overlaps_kept);
      }
    }
  }
}

TEST(NmsSkewed, TrivialCases) {
  const std::vector<ScoredQuad> apart = {{rotated(0, 0, 10, 3, 0.4), 0.9, 0}, {rotated(100, 100, 10, 3, -0.7), 0.8, 1}};
  EXPECT_EQ(nms_skewed(apart, 0.3), (std::vector<std::size_t>{0, 1}));
  const std::vector<ScoredQuad> same = {{rotated(5, 5, 10, 3, 0.4), 0.6, 0}, {rotated(5, 5, 10, 3, 0.4), 0.9, 1}};
  EXPECT_EQ(nms_skewed(same, 0.3), (std::vector<std::size_t>{1}));
  const std::vector<ScoredQuad> dart = {{Quad{{{{0, 0}, {4, 0}, {1, 1}, {0, 4}}}}, 0.5, 0}};
  EXPECT_THROW(nms_skewed(dart, 0.3), GeometryError);
}

TEST(NmsSkewed, MatchesBruteForceOracle) {
  Rng rng(44);
  for (int t = 0; t < 300; ++t) {
    const auto boxes = random_quads(rng, 1 + rng.below(50));
    const double thr = t % 2 == 0 ? 0.3 : rng.uniform(0, 1);
    const auto kept = nms_skewed(boxes, thr);
    EXPECT_EQ(kept, verify::brute_force_nms(boxes, thr, [](const Quad& a, const Quad& b) { return quad_iou(a, b); }));
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        EXPECT_LE(quad_iou(by_id(boxes, kept[i]).box, by_id(boxes, kept[j]).box), thr);
      }
    }
  }
}

TEST(TopN, Cases) {
  Rng rng(45);
  const auto boxes = random_rects(rng, 3000, false);
  const std::span<const ScoredRect> all(boxes);
  EXPECT_TRUE(top_n(all, 0).empty());
  const auto every = top_n(all, 5000);
  ASSERT_EQ(every.size(), 3000u);
  EXPECT_TRUE(std::is_sorted(every.begin(), every.end(), score_order<AxisRect>));

  const auto best = top_n(all, 2000);
  ASSERT_EQ(best.size(), 2000u);
  std::vector<double> scores;
  for (const auto& b : boxes) scores.push_back(b.score);
  std::sort(scores.rbegin(), scores.rend());
  for (std::size_t i = 0; i < 2000; ++i) EXPECT_EQ(best[i].score, scores[i]);
}

TEST(TopN, TiesByLowerId) {
  std::vector<ScoredRect> v;
  for (std::size_t i = 0; i < 10; ++i) v.push_back({{0, 0, 1, 1}, 0.5, 9 - i});
  const auto t = top_n(std::span<const ScoredRect>(v), 3);
  EXPECT_EQ(t[0].id, 0u);
  EXPECT_EQ(t[1].id, 1u);
  EXPECT_EQ(t[2].id, 2u);
}
