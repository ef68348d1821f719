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

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pantext/anchors.hpp"
#include "pantext/error.hpp"
#include "pantext/geometry.hpp"
#include "pantext/network.hpp"
#include "pantext/tensor.hpp"

namespace pantext {

struct LossConfig {
  double lambda_loc_rpn = 3.0;
  double lambda_loc_frcnn = 1.0;
  double lambda_mask = 0.03125;

  void validate() const {
    if (lambda_loc_rpn < 0.0 || lambda_loc_frcnn < 0.0 || lambda_mask < 0.0) {
      throw ValidationError("loss weights must be non-negative");
    }
  }
};

// Two-class softmax cross-entropy. Gradient is softmax - onehot(label).
struct SoftmaxCe {
  double loss = 0.0;
  std::array<double, 2> grad{};
};

inline SoftmaxCe softmax_ce(const std::array<double, 2>& logits, int label) {
  if (label != 0 && label != 1) throw ValidationError("softmax_ce: label must be 0 or 1");
  const double mx = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - mx);
  const double e1 = std::exp(logits[1] - mx);
  const double lse = mx + std::log(e0 + e1);
  SoftmaxCe r;
  r.loss = lse - logits[static_cast<std::size_t>(label)];
  r.grad = {e0 / (e0 + e1), e1 / (e0 + e1)};
  r.grad[static_cast<std::size_t>(label)] -= 1.0;
  return r;
}

struct VectorLoss {
  double loss = 0.0;
  std::vector<double> grad;
};

// Sum of 0.5 x^2 (|x| < 1) or |x| - 0.5 over x = pred - target.
inline VectorLoss smooth_l1(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw ShapeError("smooth_l1: length mismatch " + std::to_string(pred.size()) + " vs " +
                     std::to_string(target.size()));
  }
  VectorLoss r;
  r.grad.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double x = pred[i] - target[i];
    if (std::abs(x) < 1.0) {
      r.loss += 0.5 * x * x;
      r.grad[i] = x;
    } else {
      r.loss += std::abs(x) - 0.5;
      r.grad[i] = x > 0.0 ? 1.0 : -1.0;
    }
  }
  return r;
}

// Binary M x M grid, row-major.
struct MaskTarget {
  std::size_t size = 0;
  std::vector<std::uint8_t> cells;

  std::uint8_t at(std::size_t y, std::size_t x) const { return cells[y * size + x]; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto c : cells) n += c;
    return n;
  }
};

struct TensorLoss {
  double loss = 0.0;
  Tensor grad;
};

// Mean per-pixel binary cross-entropy on logits. Gradient (sigmoid(z) - t) / M^2.
inline TensorLoss binary_ce(const Tensor& mask_logits, const MaskTarget& target) {
  if (mask_logits.size() != target.cells.size() || mask_logits.height() != target.size ||
      mask_logits.width() != target.size) {
    throw ShapeError("binary_ce: logits " + mask_logits.shape().str() + " do not match a " +
                     std::to_string(target.size) + "x" + std::to_string(target.size) + " target");
  }
  TensorLoss r;
  r.grad = Tensor(mask_logits.shape());
  const auto z = mask_logits.data();
  auto g = r.grad.data();
  const double inv = 1.0 / static_cast<double>(z.size());
  // Neumaier summation.
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double t = target.cells[i] ? 1.0 : 0.0;
    const double term = std::max(z[i], 0.0) - z[i] * t + std::log1p(std::exp(-std::abs(z[i])));
    const double next = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - next) + term : (term - next) + sum;
    sum = next;
    g[i] = (sigmoid(z[i]) - t) * inv;
  }
  r.loss = (sum + comp) * inv;
  return r;
}

// One sampled anchor: prediction, label and (for positives) regression target.
struct RpnSample {
  std::array<double, 2> logits{};
  int label = 0;
  RectDelta pred{};
  RectDelta target{};
};

struct FrcnnSample {
  std::array<double, 2> logits{};
  int label = 0;
  QuadDelta pred{};
  QuadDelta target{};
};

struct MaskSample {
  Tensor logits;
  MaskTarget target;
};

// Loss of one multi-task head with gradients w.r.t. every prediction.
// Classification is averaged over all samples and localisation over the
// positives only; empty sets contribute zero.
template <std::size_t D>
struct HeadLoss {
  double cls = 0.0;
  double loc = 0.0;
  double total = 0.0;
  std::vector<std::array<double, 2>> grad_logits;
  std::vector<std::array<double, D>> grad_pred;
};

namespace detail {

template <class Sample, std::size_t D>
HeadLoss<D> head_loss(std::span<const Sample> samples, double lambda_loc) {
  HeadLoss<D> r;
  r.grad_logits.assign(samples.size(), {0.0, 0.0});
  r.grad_pred.assign(samples.size(), std::array<double, D>{});
  if (samples.empty()) return r;
  std::size_t n_pos = 0;
  for (const Sample& s : samples) n_pos += s.label == 1;
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  const double inv_pos = n_pos > 0 ? 1.0 / static_cast<double>(n_pos) : 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    const SoftmaxCe ce = softmax_ce(s.logits, s.label);
    r.cls += ce.loss * inv_n;
    r.grad_logits[i] = {ce.grad[0] * inv_n, ce.grad[1] * inv_n};
    if (s.label == 1) {
      const VectorLoss l1 = smooth_l1(s.pred, s.target);
      r.loc += l1.loss * inv_pos;
      for (std::size_t k = 0; k < D; ++k) r.grad_pred[i][k] = lambda_loc * l1.grad[k] * inv_pos;
    }
  }
  r.total = r.cls + lambda_loc * r.loc;
  return r;
}

}  // namespace detail

// RPN loss of a single level: L_cls + lambda_loc * L_loc.
inline HeadLoss<4> rpn_level_loss(std::span<const RpnSample> samples, const LossConfig& cfg) {
  cfg.validate();
  return detail::head_loss<RpnSample, 4>(samples, cfg.lambda_loc_rpn);
}

struct RpnLoss {
  double total = 0.0;
  std::array<HeadLoss<4>, 3> levels;
};

// Sum of the per-level RPN losses.
inline RpnLoss rpn_loss(const std::array<std::vector<RpnSample>, 3>& per_level,
                        const LossConfig& cfg) {
  RpnLoss r;
  for (std::size_t i = 0; i < 3; ++i) {
    r.levels[i] = rpn_level_loss(per_level[i], cfg);
    r.total += r.levels[i].total;
  }
  return r;
}

inline HeadLoss<8> frcnn_loss(std::span<const FrcnnSample> samples, const LossConfig& cfg) {
  cfg.validate();
  return detail::head_loss<FrcnnSample, 8>(samples, cfg.lambda_loc_frcnn);
}

struct MaskLoss {
  double total = 0.0;
  std::vector<Tensor> grads;
};

// Mean binary cross-entropy over positive proposals.
inline MaskLoss mask_loss(std::span<const MaskSample> samples) {
  MaskLoss r;
  if (samples.empty()) return r;
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (const MaskSample& s : samples) {
    TensorLoss l = binary_ce(s.logits, s.target);
    r.total += l.loss * inv;
    for (double& g : l.grad.data()) g *= inv;
    r.grads.push_back(std::move(l.grad));
  }
  return r;
}

struct LossReport {
  double l_rpn = 0.0;
  double l_frcnn = 0.0;
  double l_mask = 0.0;
  double l_total = 0.0;
  std::array<double, 3> rpn_per_level{};
  double frcnn_cls = 0.0;
  double frcnn_loc = 0.0;
};

inline LossReport total_loss(double l_rpn, double l_frcnn, double l_mask, const LossConfig& cfg) {
  cfg.validate();
  LossReport r;
  r.l_rpn = l_rpn;
  r.l_frcnn = l_frcnn;
  r.l_mask = l_mask;
  r.l_total = l_rpn + l_frcnn + cfg.lambda_mask * l_mask;
  return r;
}

inline LossReport total_loss(const RpnLoss& rpn, const HeadLoss<8>& frcnn, const MaskLoss& mask,
                             const LossConfig& cfg) {
  LossReport r = total_loss(rpn.total, frcnn.total, mask.total, cfg);
  for (std::size_t i = 0; i < 3; ++i) r.rpn_per_level[i] = rpn.levels[i].total;
  r.frcnn_cls = frcnn.cls;
  r.frcnn_loc = frcnn.loc;
  return r;
}

// Gathers RPN predictions for a sampled mini-batch of one level. Anchor a
// lives at cell a / k (row-major) with ratio index a % k.
inline std::vector<RpnSample> gather_rpn_samples(const RpnLevelOutput& out,
                                                 const std::vector<AxisRect>& anchors,
                                                 const std::vector<AxisRect>& gts,
                                                 const MatchResult& match, const MiniBatch& batch) {
  const std::size_t fh = out.cls.height();
  const std::size_t fw = out.cls.width();
  const std::size_t k = out.cls.channels() / 2;
  if (anchors.size() != fh * fw * k || out.bbox.channels() != 4 * k) {
    throw ShapeError("gather_rpn_samples: anchors do not match RPN output layout");
  }
  std::vector<RpnSample> samples;
  auto add = [&](std::size_t a, int label) {
    const std::size_t cell = a / k;
    const std::size_t r = a % k;
    const std::size_t i = cell / fw;
    const std::size_t j = cell % fw;
    RpnSample s;
    s.label = label;
    s.logits = {out.cls.at(0, 2 * r, i, j), out.cls.at(0, 2 * r + 1, i, j)};
    for (std::size_t d = 0; d < 4; ++d) s.pred[d] = out.bbox.at(0, 4 * r + d, i, j);
    if (label == 1) {
      s.target = rect_encode(gts[static_cast<std::size_t>(match.matched_gt[a])], anchors[a]);
    }
    samples.push_back(s);
  };
  for (std::size_t a : batch.positives) add(a, 1);
  for (std::size_t a : batch.negatives) add(a, 0);
  return samples;
}

// Rasterises gt ∩ proposal on an M x M grid spanning the proposal. A cell is
// set iff its centre lies in the clipped polygon (boundary inclusive).
inline MaskTarget make_mask_target(const AxisRect& proposal, std::span<const Point> gt_polygon,
                                   std::size_t m) {
  if (!proposal.valid()) throw GeometryError("make_mask_target: degenerate proposal");
  if (m == 0) throw ValidationError("make_mask_target: grid size must be positive");
  MaskTarget t;
  t.size = m;
  t.cells.assign(m * m, 0);
  if (gt_polygon.size() < 3) return t;

  // Clip the ground truth against the proposal (counter-clockwise corners).
  const std::array<Point, 4> rect = {Point{proposal.x1, proposal.y1}, Point{proposal.x1, proposal.y2},
                                     Point{proposal.x2, proposal.y2}, Point{proposal.x2, proposal.y1}};
  std::array<Point, 4> clip = rect;
  if (signed_area(std::span<const Point>(clip)) < 0.0) std::reverse(clip.begin(), clip.end());
  const std::vector<Point> inter = clip_polygon(gt_polygon, std::span<const Point>(clip));
  if (inter.size() < 3) return t;

  const double cw = proposal.width() / static_cast<double>(m);
  const double ch = proposal.height() / static_cast<double>(m);
  for (std::size_t y = 0; y < m; ++y) {
    for (std::size_t x = 0; x < m; ++x) {
      const Point c{proposal.x1 + (static_cast<double>(x) + 0.5) * cw,
                    proposal.y1 + (static_cast<double>(y) + 0.5) * ch};
      t.cells[y * m + x] = point_in_polygon(c, inter) ? 1 : 0;
    }
  }
  return t;
}

inline MaskTarget make_mask_target(const AxisRect& proposal, const Quad& gt, std::size_t m) {
  return make_mask_target(proposal, std::span<const Point>(gt.v), m);
}

}  // namespace pantext
