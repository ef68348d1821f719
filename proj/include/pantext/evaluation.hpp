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
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "pantext/error.hpp"
#include "pantext/geometry.hpp"
#include "pantext/ground_truth.hpp"
#include "pantext/inference.hpp"

namespace pantext {

struct ImageEval {
  std::string key;
  // (detection index, ground-truth index) in input order.
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::vector<std::size_t> ignored_detections;
  std::size_t gt_care = 0;
  std::size_t dets_counted = 0;
};

struct EvalReport {
  double recall = 0.0;
  double precision = 0.0;
  double f_measure = 0.0;
  std::size_t matched = 0;
  std::size_t gt_care = 0;
  std::size_t dets_counted = 0;
  std::vector<ImageEval> per_image;
};

namespace detail {

// Score descending; ties broken by vertex coordinates so the order does not
// depend on the input permutation.
inline bool detection_order(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  for (std::size_t v = 0; v < 4; ++v) {
    if (a.quad[v].x != b.quad[v].x) return a.quad[v].x < b.quad[v].x;
    if (a.quad[v].y != b.quad[v].y) return a.quad[v].y < b.quad[v].y;
  }
  return false;
}

}  // namespace detail

// Greedy one-to-one matching of one image. A detection matches the unmatched
// care ground truth of highest IoU (>= iou_thresh, ties to the lower index).
// Detections that match nothing but overlap a don't-care region by
// >= iou_thresh are left out of the precision denominator.
inline ImageEval evaluate_image(const std::vector<Detection>& dets, const GroundTruth& gt,
                                double iou_thresh) {
  ImageEval r;
  std::vector<Quad> gt_quads;
  for (const GtInstance& inst : gt.instances) {
    gt_quads.push_back(evaluation_quad(inst));
    r.gt_care += inst.ignore ? 0 : 1;
  }
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detail::detection_order(dets[a], dets[b]);
  });
  std::vector<bool> taken(gt_quads.size(), false);
  for (std::size_t di : order) {
    double best = -1.0;
    std::size_t best_gt = 0;
    bool overlaps_ignored = false;
    for (std::size_t g = 0; g < gt_quads.size(); ++g) {
      const double iou = quad_iou(dets[di].quad, gt_quads[g]);
      if (iou < iou_thresh) continue;
      if (gt.instances[g].ignore) {
        overlaps_ignored = true;
      } else if (!taken[g] && iou > best) {
        best = iou;
        best_gt = g;
      }
    }
    if (best >= 0.0) {
      taken[best_gt] = true;
      r.matches.emplace_back(di, best_gt);
      ++r.dets_counted;
    } else if (overlaps_ignored) {
      r.ignored_detections.push_back(di);
    } else {
      ++r.dets_counted;
    }
  }
  std::sort(r.matches.begin(), r.matches.end());
  std::sort(r.ignored_detections.begin(), r.ignored_detections.end());
  return r;
}

// Recall, precision and F over all images. Every detection key must have
// ground truth; ground truth without detections counts as misses.
inline EvalReport evaluate(const std::map<std::string, std::vector<Detection>>& dets,
                           const std::map<std::string, GroundTruth>& gts, double iou_thresh) {
  if (!(iou_thresh >= 0.0 && iou_thresh <= 1.0)) {
    throw ValidationError("evaluate: IoU threshold must lie in [0, 1]");
  }
  for (const auto& [key, list] : dets) {
    if (!gts.contains(key)) throw ValidationError("evaluate: no ground truth for image '" + key + "'");
  }
  EvalReport report;
  static const std::vector<Detection> kNone;
  for (const auto& [key, gt] : gts) {
    const auto it = dets.find(key);
    ImageEval e = evaluate_image(it == dets.end() ? kNone : it->second, gt, iou_thresh);
    e.key = key;
    report.matched += e.matches.size();
    report.gt_care += e.gt_care;
    report.dets_counted += e.dets_counted;
    report.per_image.push_back(std::move(e));
  }
  report.recall = report.gt_care > 0
                      ? static_cast<double>(report.matched) / static_cast<double>(report.gt_care)
                      : 0.0;
  report.precision = report.dets_counted > 0 ? static_cast<double>(report.matched) /
                                                   static_cast<double>(report.dets_counted)
                                             : 0.0;
  const double pr = report.precision + report.recall;
  report.f_measure = pr > 0.0 ? 2.0 * report.precision * report.recall / pr : 0.0;
  return report;
}

}  // namespace pantext
