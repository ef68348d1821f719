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
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pantext/error.hpp"
#include "pantext/geometry.hpp"

namespace pantext {

template <class Geometry>
struct ScoredBox {
  Geometry box;
  double score = 0.0;
  std::size_t id = 0;
};

using ScoredRect = ScoredBox<AxisRect>;
using ScoredQuad = ScoredBox<Quad>;

// Score descending, then id ascending.
template <class Geometry>
bool score_order(const ScoredBox<Geometry>& a, const ScoredBox<Geometry>& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

namespace detail {

template <class Geometry, class IouFn>
std::vector<std::size_t> greedy_nms(std::span<const ScoredBox<Geometry>> boxes, double iou_thresh,
                                    IouFn&& iou) {
  if (!(iou_thresh >= 0.0 && iou_thresh <= 1.0)) {
    throw ValidationError("nms: IoU threshold must lie in [0, 1]");
  }
  for (const auto& b : boxes) {
    if (!std::isfinite(b.score)) throw ValidationError("nms: non-finite score");
  }
  std::vector<const ScoredBox<Geometry>*> order;
  order.reserve(boxes.size());
  for (const auto& b : boxes) order.push_back(&b);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return score_order(*a, *b); });

  std::vector<const ScoredBox<Geometry>*> kept;
  for (const auto* cand : order) {
    bool suppressed = false;
    for (const auto* k : kept) {
      if (iou(k->box, cand->box) > iou_thresh) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(cand);
  }
  std::vector<std::size_t> ids;
  ids.reserve(kept.size());
  for (const auto* k : kept) ids.push_back(k->id);
  return ids;
}

}  // namespace detail

// Greedy NMS on rectangles. Returns kept ids in keep order; a box is
// suppressed when its IoU with a kept box is strictly above the threshold.
inline std::vector<std::size_t> nms_rect(std::span<const ScoredRect> boxes, double iou_thresh) {
  return detail::greedy_nms(boxes, iou_thresh,
                            [](const AxisRect& a, const AxisRect& b) { return rect_iou(a, b); });
}

// Skewed NMS: greedy NMS with convex-quad IoU.
inline std::vector<std::size_t> nms_skewed(std::span<const ScoredQuad> boxes, double iou_thresh) {
  for (const auto& b : boxes) {
    if (!is_convex(b.box)) {
      throw GeometryError("nms_skewed: box " + std::to_string(b.id) + " is not a convex quad");
    }
  }
  return detail::greedy_nms(boxes, iou_thresh,
                            [](const Quad& a, const Quad& b) { return quad_iou(a, b); });
}

// The n best boxes, score descending with ties broken by lower id.
template <class Geometry>
std::vector<ScoredBox<Geometry>> top_n(std::span<const ScoredBox<Geometry>> boxes, std::size_t n) {
  std::vector<ScoredBox<Geometry>> sorted(boxes.begin(), boxes.end());
  n = std::min(n, sorted.size());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n), sorted.end(),
                    score_order<Geometry>);
  sorted.resize(n);
  return sorted;
}

}  // namespace pantext
