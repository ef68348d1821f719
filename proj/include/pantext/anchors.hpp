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
#include <cstdint>
#include <string>
#include <vector>

#include "pantext/error.hpp"
#include "pantext/geometry.hpp"
#include "pantext/random.hpp"

namespace pantext {

enum class PyramidLevel { kP2 = 0, kP3 = 1, kP4 = 2 };

inline constexpr std::array<PyramidLevel, 3> kPyramidLevels = {PyramidLevel::kP2, PyramidLevel::kP3,
                                                               PyramidLevel::kP4};

inline std::size_t level_index(PyramidLevel level) { return static_cast<std::size_t>(level); }

inline std::string level_name(PyramidLevel level) {
  return "p" + std::to_string(level_index(level) + 2);
}

inline PyramidLevel parse_level(const std::string& s) {
  if (s == "P2" || s == "p2") return PyramidLevel::kP2;
  if (s == "P3" || s == "p3") return PyramidLevel::kP3;
  if (s == "P4" || s == "p4") return PyramidLevel::kP4;
  throw ValidationError("unknown pyramid level '" + s + "' (expected P2, P3 or P4)");
}

struct AnchorSpec {
  std::vector<double> aspect_ratios{0.2, 0.5, 1.0, 2.0, 4.0, 8.0};
  std::array<double, 3> scales{32.0, 64.0, 128.0};
  std::array<std::size_t, 3> strides{4, 8, 16};

  std::size_t anchors_per_cell() const { return aspect_ratios.size(); }
  double scale(PyramidLevel l) const { return scales[level_index(l)]; }
  std::size_t stride(PyramidLevel l) const { return strides[level_index(l)]; }

  void validate() const {
    if (aspect_ratios.empty()) throw ValidationError("anchor spec: no aspect ratios");
    for (double r : aspect_ratios) {
      if (!(r > 0.0)) throw ValidationError("anchor spec: aspect ratios must be positive");
    }
    for (std::size_t i = 0; i < 3; ++i) {
      if (!(scales[i] > 0.0) || strides[i] == 0) {
        throw ValidationError("anchor spec: scales and strides must be positive");
      }
    }
  }
};

// Anchors for an fh x fw map. Cell-major (row-major cells), ratio-minor.
// Ratio r = width / height; area is preserved at scale^2.
inline std::vector<AxisRect> generate_anchors(const AnchorSpec& spec, PyramidLevel level,
                                              std::size_t fh, std::size_t fw) {
  spec.validate();
  const double stride = static_cast<double>(spec.stride(level));
  const double scale = spec.scale(level);
  std::vector<AxisRect> out;
  out.reserve(fh * fw * spec.anchors_per_cell());
  for (std::size_t i = 0; i < fh; ++i) {
    for (std::size_t j = 0; j < fw; ++j) {
      const double cx = (static_cast<double>(j) + 0.5) * stride;
      const double cy = (static_cast<double>(i) + 0.5) * stride;
      for (double ratio : spec.aspect_ratios) {
        const double root = std::sqrt(ratio);
        const double hw = 0.5 * scale * root;
        const double hh = 0.5 * scale / root;
        out.push_back({cx - hw, cy - hh, cx + hw, cy + hh});
      }
    }
  }
  return out;
}

struct MatchConfig {
  double pos_iou = 0.7;
  double neg_iou = 0.3;
  std::size_t rpn_pos_per_batch = 128;
  std::size_t rpn_neg_per_batch = 128;
  double frcnn_pos_iou = 0.5;
  std::size_t frcnn_pos_per_batch = 64;
  std::size_t frcnn_neg_per_batch = 192;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(0.0 <= neg_iou && neg_iou <= pos_iou && pos_iou <= 1.0)) {
      throw ValidationError("match config: require 0 <= neg_iou <= pos_iou <= 1");
    }
    if (!(0.0 <= frcnn_pos_iou && frcnn_pos_iou <= 1.0)) {
      throw ValidationError("match config: frcnn_pos_iou outside [0, 1]");
    }
  }
};

enum class AnchorLabel : std::int8_t { kNegative = 0, kPositive = 1, kIgnore = -1 };

struct MatchResult {
  std::vector<AnchorLabel> labels;
  // Argmax-IoU ground truth per box; -1 when there is no ground truth.
  std::vector<int> matched_gt;
  std::vector<double> max_iou;

  std::size_t count(AnchorLabel l) const {
    std::size_t n = 0;
    for (AnchorLabel x : labels) n += x == l;
    return n;
  }
};

namespace detail {

// Fills max_iou / matched_gt (ties -> lowest gt index) and returns the
// per-gt best IoU.
inline std::vector<double> argmax_match(const std::vector<AxisRect>& boxes,
                                        const std::vector<AxisRect>& gts, MatchResult& r,
                                        std::vector<std::vector<double>>* iou_out) {
  r.labels.assign(boxes.size(), AnchorLabel::kNegative);
  r.matched_gt.assign(boxes.size(), -1);
  r.max_iou.assign(boxes.size(), 0.0);
  std::vector<double> gt_best(gts.size(), 0.0);
  if (iou_out) iou_out->assign(boxes.size(), std::vector<double>(gts.size(), 0.0));
  for (std::size_t a = 0; a < boxes.size(); ++a) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double iou = rect_iou(boxes[a], gts[g]);
      if (iou_out) (*iou_out)[a][g] = iou;
      if (r.matched_gt[a] < 0 || iou > r.max_iou[a]) {
        r.max_iou[a] = iou;
        r.matched_gt[a] = static_cast<int>(g);
      }
      gt_best[g] = std::max(gt_best[g], iou);
    }
  }
  return gt_best;
}

}  // namespace detail

// RPN labelling: positive if IoU > pos_iou with any gt or the best anchor for
// some gt (all anchors tying that best IoU, provided it is non-zero);
// negative if IoU < neg_iou for every gt; ignore otherwise.
inline MatchResult match_anchors(const std::vector<AxisRect>& anchors,
                                 const std::vector<AxisRect>& gts, const MatchConfig& cfg) {
  cfg.validate();
  MatchResult r;
  std::vector<std::vector<double>> iou;
  const std::vector<double> gt_best = detail::argmax_match(anchors, gts, r, &iou);
  if (gts.empty()) return r;
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    bool positive = r.max_iou[a] > cfg.pos_iou;
    for (std::size_t g = 0; g < gts.size() && !positive; ++g) {
      positive = gt_best[g] > 0.0 && iou[a][g] == gt_best[g];
    }
    if (positive) {
      r.labels[a] = AnchorLabel::kPositive;
    } else if (r.max_iou[a] < cfg.neg_iou) {
      r.labels[a] = AnchorLabel::kNegative;
    } else {
      r.labels[a] = AnchorLabel::kIgnore;
    }
  }
  return r;
}

// Second-stage labelling: positive iff IoU > frcnn_pos_iou with some gt.
inline MatchResult match_proposals(const std::vector<AxisRect>& proposals,
                                   const std::vector<AxisRect>& gts, const MatchConfig& cfg) {
  cfg.validate();
  MatchResult r;
  detail::argmax_match(proposals, gts, r, nullptr);
  for (std::size_t p = 0; p < proposals.size(); ++p) {
    r.labels[p] = r.max_iou[p] > cfg.frcnn_pos_iou ? AnchorLabel::kPositive : AnchorLabel::kNegative;
  }
  return r;
}

struct MiniBatch {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  // Set when fewer than n_pos + n_neg labelled candidates exist.
  bool short_batch = false;
};

namespace detail {

// k draws without replacement (partial Fisher-Yates), returned sorted.
inline std::vector<std::size_t> draw(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace detail

// A positive shortfall is made up with extra negatives so the batch keeps
// n_pos + n_neg entries when enough negatives exist. Ignored boxes are never
// sampled.
inline MiniBatch sample_minibatch(const MatchResult& result, std::size_t n_pos, std::size_t n_neg,
                                  std::uint64_t seed) {
  std::vector<std::size_t> pos_pool;
  std::vector<std::size_t> neg_pool;
  for (std::size_t i = 0; i < result.labels.size(); ++i) {
    if (result.labels[i] == AnchorLabel::kPositive) pos_pool.push_back(i);
    if (result.labels[i] == AnchorLabel::kNegative) neg_pool.push_back(i);
  }
  Rng rng(seed);
  MiniBatch b;
  b.positives = detail::draw(std::move(pos_pool), n_pos, rng);
  const std::size_t neg_quota = n_neg + (n_pos - b.positives.size());
  b.negatives = detail::draw(std::move(neg_pool), neg_quota, rng);
  b.short_batch = b.positives.size() + b.negatives.size() < n_pos + n_neg;
  return b;
}

}  // namespace pantext
