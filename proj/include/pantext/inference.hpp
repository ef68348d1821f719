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
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pantext/anchors.hpp"
#include "pantext/config.hpp"
#include "pantext/error.hpp"
#include "pantext/geometry.hpp"
#include "pantext/image.hpp"
#include "pantext/network.hpp"
#include "pantext/nms.hpp"
#include "pantext/roi_align.hpp"

namespace pantext {

struct MaskOutput {
  AxisRect proposal;          // region the grid covers, original image coordinates
  std::size_t size = 0;       // grid is size x size
  std::vector<double> probs;  // row-major sigmoid probabilities
};

struct Detection {
  Quad quad;
  double score = 0.0;
  std::optional<MaskOutput> mask;
};

// Counters and intermediate results kept for inspection and tests.
struct InferTrace {
  std::size_t anchors = 0;
  std::size_t valid_proposals = 0;   // after decoding, clipping and size filter
  std::size_t proposals_after_nms = 0;
  std::size_t proposals_to_head = 0;
  std::size_t above_threshold = 0;
  std::size_t dropped_non_convex = 0;
  // Skewed NMS survivors in network (resized) coordinates, before clipping.
  std::vector<ScoredQuad> kept;
};

struct InferResult {
  std::vector<Detection> detections;
  InferTrace trace;
};

// Deltas beyond this are clamped before exponentiation.
inline constexpr double kMaxLogScale = 4.135166556742356;  // log(1000 / 16)

namespace detail {

template <class Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled by exactly one worker; results must be written to per-index slots.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t * chunk; i < std::min(n, (t + 1) * chunk); ++i) fn(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline double text_probability(double non_text, double text) {
  return sigmoid(text - non_text);
}

inline AxisRect clip_rect(const AxisRect& r, double w, double h) {
  return {std::clamp(r.x1, 0.0, w), std::clamp(r.y1, 0.0, h), std::clamp(r.x2, 0.0, w),
          std::clamp(r.y2, 0.0, h)};
}

}  // namespace detail

// Decoded, clipped RPN proposals from every level, NMS-filtered and cut to
// the top-N. Ids are global anchor indices (P2 anchors first).
inline std::vector<ScoredRect> generate_proposals(const RpnOutput& rpn, const PreparedImage& img,
                                                  const PipelineConfig& cfg, InferTrace& trace) {
  const AnchorSpec spec;
  const double img_w = static_cast<double>(img.resized_width);
  const double img_h = static_cast<double>(img.resized_height);
  std::vector<ScoredRect> boxes;
  std::size_t base_id = 0;
  for (PyramidLevel level : kPyramidLevels) {
    const RpnLevelOutput& out = rpn.levels[level_index(level)];
    const std::size_t fh = out.cls.height();
    const std::size_t fw = out.cls.width();
    const std::size_t k = spec.anchors_per_cell();
    if (out.cls.channels() != 2 * k || out.bbox.channels() != 4 * k) {
      throw ShapeError("RPN output channels do not match the anchor layout");
    }
    const std::vector<AxisRect> anchors = generate_anchors(spec, level, fh, fw);
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      const std::size_t cell = a / k;
      const std::size_t r = a % k;
      const std::size_t i = cell / fw;
      const std::size_t j = cell % fw;
      RectDelta d{out.bbox.at(0, 4 * r, i, j), out.bbox.at(0, 4 * r + 1, i, j),
                  out.bbox.at(0, 4 * r + 2, i, j), out.bbox.at(0, 4 * r + 3, i, j)};
      d[2] = std::min(d[2], kMaxLogScale);
      d[3] = std::min(d[3], kMaxLogScale);
      const AxisRect box = detail::clip_rect(rect_decode(d, anchors[a]), img_w, img_h);
      if (box.width() >= cfg.min_proposal_size && box.height() >= cfg.min_proposal_size &&
          box.valid()) {
        const double score = detail::text_probability(out.cls.at(0, 2 * r, i, j),
                                                      out.cls.at(0, 2 * r + 1, i, j));
        boxes.push_back({box, score, base_id + a});
      }
    }
    base_id += anchors.size();
  }
  trace.anchors = base_id;
  trace.valid_proposals = boxes.size();
  const std::vector<std::size_t> kept_ids = nms_rect(boxes, cfg.rpn_nms_iou);
  trace.proposals_after_nms = kept_ids.size();

  std::vector<ScoredRect> kept;
  kept.reserve(kept_ids.size());
  {
    // boxes are in ascending id order.
    for (std::size_t id : kept_ids) {
      auto it = std::lower_bound(boxes.begin(), boxes.end(), id,
                                 [](const ScoredRect& b, std::size_t v) { return b.id < v; });
      kept.push_back(*it);
    }
  }
  std::vector<ScoredRect> top = top_n<AxisRect>(kept, cfg.top_n);
  trace.proposals_to_head = top.size();
  return top;
}

inline MaskOutput predict_mask(const PyramidFeatures& pyr, const ModelWeights& w,
                               const AxisRect& region) {
  const Tensor roi = skip_roi_align(pyr, region, w.at("roi.reduce"));
  const Tensor logits = head_mask(head_trunk(roi, w), w);
  MaskOutput m;
  m.proposal = region;
  m.size = logits.height();
  m.probs.assign(logits.data().begin(), logits.data().end());
  for (double& v : m.probs) v = sigmoid(v);
  return m;
}

// Full forward pass: backbone, pyramid, RPN, proposals, Skip-RoIAlign heads,
// Skewed NMS and masks for the surviving instances. Output coordinates are in
// the original image frame, clipped to its bounds.
inline InferResult infer(const PreparedImage& img, const ModelWeights& w, const PipelineConfig& cfg) {
  cfg.validate();
  detail::run_stage("weights", [&] {
    w.validate();
    return 0;
  });
  InferResult result;
  InferTrace& trace = result.trace;

  const BaseFeatures base = detail::run_stage("backbone", [&] { return stub_base(img.tensor, w); });
  const PyramidFeatures pyr = detail::run_stage("pyramid", [&] { return build_pyramid(base, w); });
  const RpnOutput rpn = detail::run_stage("rpn", [&] { return rpn_forward(pyr, w); });
  const std::vector<ScoredRect> proposals =
      detail::run_stage("proposals", [&] { return generate_proposals(rpn, img, cfg, trace); });

  std::vector<HeadOutput> heads(proposals.size());
  detail::run_stage("roi_heads", [&] {
    detail::parallel_for(proposals.size(), cfg.threads, [&](std::size_t i) {
      const Tensor roi = skip_roi_align(pyr, proposals[i].box, w.at("roi.reduce"));
      heads[i] = head_detect(head_trunk(roi, w), w);
    });
    return 0;
  });

  std::vector<ScoredQuad> candidates;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const double score = detail::text_probability(heads[i].logits[0], heads[i].logits[1]);
    if (!(score > cfg.score_threshold)) continue;
    ++trace.above_threshold;
    const Quad q = quad_decode(heads[i].delta, proposals[i].box);
    if (!is_convex(q)) {
      ++trace.dropped_non_convex;
      continue;
    }
    candidates.push_back({q, score, i});
  }

  const std::vector<std::size_t> kept_ids =
      detail::run_stage("skewed_nms", [&] { return nms_skewed(candidates, cfg.skewed_nms_iou); });
  for (std::size_t id : kept_ids) {
    auto it = std::find_if(candidates.begin(), candidates.end(),
                           [id](const ScoredQuad& c) { return c.id == id; });
    trace.kept.push_back(*it);
  }

  const double img_w = static_cast<double>(img.resized_width);
  const double img_h = static_cast<double>(img.resized_height);
  std::vector<std::optional<MaskOutput>> masks(trace.kept.size());
  if (cfg.emit_masks) {
    detail::run_stage("mask", [&] {
      detail::parallel_for(trace.kept.size(), cfg.threads, [&](std::size_t i) {
        const AxisRect region = detail::clip_rect(quad_to_bounding_rect(trace.kept[i].box), img_w, img_h);
        if (region.valid()) masks[i] = predict_mask(pyr, w, region);
      });
      return 0;
    });
  }

  const double inv = 1.0 / img.scale;
  const double ow = static_cast<double>(img.original_width);
  const double oh = static_cast<double>(img.original_height);
  for (std::size_t i = 0; i < trace.kept.size(); ++i) {
    Detection d;
    d.score = trace.kept[i].score;
    for (std::size_t v = 0; v < 4; ++v) {
      d.quad[v] = {std::clamp(trace.kept[i].box[v].x * inv, 0.0, ow),
                   std::clamp(trace.kept[i].box[v].y * inv, 0.0, oh)};
    }
    if (masks[i]) {
      MaskOutput m = std::move(*masks[i]);
      m.proposal = detail::clip_rect({m.proposal.x1 * inv, m.proposal.y1 * inv, m.proposal.x2 * inv,
                                      m.proposal.y2 * inv},
                                     ow, oh);
      d.mask = std::move(m);
    }
    result.detections.push_back(std::move(d));
  }
  return result;
}

inline InferResult infer(const RgbImage& image, const ModelWeights& w, const PipelineConfig& cfg) {
  const PreparedImage img =
      detail::run_stage("image", [&] { return prepare_image(image, cfg.test_scale); });
  return infer(img, w, cfg);
}

}  // namespace pantext
