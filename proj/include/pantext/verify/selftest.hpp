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

// Oracle suites behind `pantext selftest` and the acceptance binary. Each
// returns one CheckResult per acceptance criterion.

#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pantext/anchors.hpp"
#include "pantext/detection_json.hpp"
#include "pantext/evaluation.hpp"
#include "pantext/geometry.hpp"
#include "pantext/inference.hpp"
#include "pantext/losses.hpp"
#include "pantext/network.hpp"
#include "pantext/nms.hpp"
#include "pantext/roi_align.hpp"
#include "pantext/verify/fixtures.hpp"
#include "pantext/verify/gradcheck.hpp"
#include "pantext/verify/oracles.hpp"

namespace pantext::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

inline CheckResult timed(const std::string& name, const std::function<bool(std::string&)>& body) {
  CheckResult r;
  r.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.passed = body(r.detail);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace detail

// 1. quad_decode(quad_encode(g, p), p) == g.
inline CheckResult check_quad_roundtrip(std::size_t cases = 10000) {
  CheckResult r = detail::timed("quad_roundtrip", [&](std::string& detail) {
    Rng rng(101);
    double worst = 0.0;
    for (std::size_t i = 0; i < cases; ++i) {
      const AxisRect p = random_rect(rng, 1000.0);
      Quad g;
      for (Point& v : g.v) v = {rng.uniform(-200.0, 1200.0), rng.uniform(-200.0, 1200.0)};
      const Quad back = quad_decode(quad_encode(g, p), p);
      for (std::size_t k = 0; k < 4; ++k) {
        worst = std::max({worst, std::abs(back[k].x - g[k].x), std::abs(back[k].y - g[k].y)});
      }
    }
    detail = std::to_string(cases) + " cases, max abs error " + detail::fmt(worst);
    return worst < 1e-9;
  });
  r.passed = r.passed && r.seconds < 1.0;
  r.detail += ", " + std::to_string(r.seconds) + " s (limit 1 s)";
  return r;
}

// 2. Analytic loss gradients against central differences.
inline CheckResult check_gradients(const GradcheckOptions& opt = {}) {
  CheckResult r = detail::timed("gradients", [&](std::string& detail) {
    const GradcheckReport rep = run_gradcheck(opt);
    for (const GradcheckEntry& e : rep.entries) {
      detail += e.name + "=" + detail::fmt(e.max_rel_error) + " ";
    }
    return rep.passed();
  });
  r.passed = r.passed && r.seconds < 10.0;
  r.detail += "(" + std::to_string(r.seconds) + " s, limit 10 s)";
  return r;
}

// 3. Library NMS against the IoU-matrix greedy oracle.
inline CheckResult check_nms(std::size_t instances = 500) {
  return detail::timed("nms_oracle", [&](std::string& detail) {
    Rng rng(303);
    std::size_t mismatches = 0;
    std::size_t total_kept = 0;
    for (std::size_t t = 0; t < instances; ++t) {
      const std::size_t n = 1 + rng.below(50);
      const double thresh = rng.uniform(0.1, 0.9);
      // Coarse scores force ties; shuffled ids exercise the tie-break.
      std::vector<std::size_t> ids(n);
      for (std::size_t i = 0; i < n; ++i) ids[i] = i * 3 + 7;
      for (std::size_t i = n; i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
      std::vector<ScoredRect> rects;
      std::vector<ScoredQuad> quads;
      for (std::size_t i = 0; i < n; ++i) {
        const double score = static_cast<double>(rng.below(8)) / 8.0;
        rects.push_back({random_rect(rng), score, ids[i]});
        quads.push_back({random_convex_quad(rng), score, ids[i]});
      }
      const auto want_r = brute_force_nms(rects, thresh, rect_iou_oracle);
      const auto want_q = brute_force_nms(quads, thresh, [](const Quad& a, const Quad& b) { return quad_iou(a, b); });
      mismatches += nms_rect(rects, thresh) != want_r;
      mismatches += nms_skewed(quads, thresh) != want_q;
      total_kept += want_r.size() + want_q.size();
    }
    detail = std::to_string(instances) + " instances x {rect, skewed}, " + std::to_string(mismatches) +
             " mismatches, " + std::to_string(total_kept) + " boxes kept";
    return mismatches == 0;
  });
}

// 4. quad_iou against Monte-Carlo estimates and rect_iou.
inline CheckResult check_polygon_iou(std::size_t pairs = 100, std::size_t samples = 1000000) {
  return detail::timed("polygon_iou", [&](std::string& detail) {
    Rng rng(404);
    Rng mc(405);
    double worst_mc = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
      const Quad a = random_convex_quad(rng);
      const Quad b = random_convex_quad(rng);
      worst_mc = std::max(worst_mc, std::abs(quad_iou(a, b) - monte_carlo_iou(a, b, samples, mc)));
    }
    double worst_rect = 0.0;
    for (std::size_t i = 0; i < 10000; ++i) {
      const AxisRect a = random_rect(rng);
      const AxisRect b = random_rect(rng);
      worst_rect = std::max(worst_rect, std::abs(quad_iou(Quad::from_rect(a), Quad::from_rect(b)) - rect_iou(a, b)));
    }
    detail = "MC max diff " + detail::fmt(worst_mc) + " (limit 2e-3), rect max diff " + detail::fmt(worst_rect) +
             " (limit 1e-12)";
    return worst_mc < 2e-3 && worst_rect <= 1e-12;
  });
}

// 5. RoIAlign on affine and constant planes.
inline CheckResult check_roi_align(std::size_t cases = 500) {
  return detail::timed("roi_align_affine", [&](std::string& detail) {
    Rng rng(505);
    double worst = 0.0;
    std::size_t const_mismatch = 0;
    const std::array<double, 4> scales{1.0, 0.25, 0.125, 0.0625};
    for (std::size_t t = 0; t < cases; ++t) {
      const std::size_t h = 4 + rng.below(20);
      const std::size_t w = 4 + rng.below(20);
      const std::size_t ch = 1 + rng.below(3);
      const double scale = scales[rng.below(scales.size())];
      const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0), c = rng.uniform(-5.0, 5.0);
      Tensor feat(Shape{1, ch, h, w});
      for (std::size_t k = 0; k < ch; ++k) {
        for (std::size_t y = 0; y < h; ++y) {
          for (std::size_t x = 0; x < w; ++x) feat.at(0, k, y, x) = a * x + b * y + c + static_cast<double>(k);
        }
      }
      // Image-space extent whose samples stay inside [0, w - 1] x [0, h - 1].
      const double lo_x = 0.5 / scale, hi_x = (static_cast<double>(w) - 0.5) / scale;
      const double lo_y = 0.5 / scale, hi_y = (static_cast<double>(h) - 0.5) / scale;
      double x1 = rng.uniform(lo_x, hi_x), x2 = rng.uniform(lo_x, hi_x);
      double y1 = rng.uniform(lo_y, hi_y), y2 = rng.uniform(lo_y, hi_y);
      if (x1 > x2) std::swap(x1, x2);
      if (y1 > y2) std::swap(y1, y2);
      if (x2 - x1 < 1e-3 || y2 - y1 < 1e-3) continue;
      const RoiSpec spec{1 + rng.below(7), 1 + rng.below(7), 1 + rng.below(3)};
      const AxisRect roi{x1, y1, x2, y2};
      const Tensor out = roi_align(feat, roi, scale, spec);
      const double bw = (x2 - x1) * scale / static_cast<double>(spec.out_w);
      const double bh = (y2 - y1) * scale / static_cast<double>(spec.out_h);
      for (std::size_t k = 0; k < ch; ++k) {
        for (std::size_t by = 0; by < spec.out_h; ++by) {
          for (std::size_t bx = 0; bx < spec.out_w; ++bx) {
            const double cx = x1 * scale - 0.5 + (static_cast<double>(bx) + 0.5) * bw;
            const double cy = y1 * scale - 0.5 + (static_cast<double>(by) + 0.5) * bh;
            const double want = a * cx + b * cy + c + static_cast<double>(k);
            worst = std::max(worst, std::abs(out.at(0, k, by, bx) - want));
          }
        }
      }
      // Constant map, roi allowed to leave the feature extent.
      const Tensor flat(Shape{1, 1, h, w}, c);
      const AxisRect wide{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0), 0.0, 0.0};
      const AxisRect any{wide.x1, wide.y1, wide.x1 + rng.uniform(0.5, 300.0), wide.y1 + rng.uniform(0.5, 300.0)};
      const Tensor pooled = roi_align(flat, any, scale, spec);
      for (double v : pooled.data()) const_mismatch += v != c;
    }
    detail = "affine max diff " + detail::fmt(worst) + " (limit 1e-9), constant mismatches " +
             std::to_string(const_mismatch);
    return worst < 1e-9 && const_mismatch == 0;
  });
}

// 6. Anchor lattice against closed-form values.
inline CheckResult check_anchor_lattice() {
  return detail::timed("anchor_lattice", [&](std::string& detail) {
    const std::array<double, 6> ratios{0.2, 0.5, 1.0, 2.0, 4.0, 8.0};
    const std::array<double, 3> scales{32.0, 64.0, 128.0};
    const std::array<double, 3> strides{4.0, 8.0, 16.0};
    const std::vector<std::pair<std::size_t, std::size_t>> sizes{{1, 1}, {3, 5}, {16, 16}, {7, 2}};
    std::size_t bad = 0;
    std::size_t checked = 0;
    for (PyramidLevel level : kPyramidLevels) {
      const std::size_t li = level_index(level);
      for (const auto& [fh, fw] : sizes) {
        const std::vector<AxisRect> got = generate_anchors(AnchorSpec{}, level, fh, fw);
        bad += got.size() != fh * fw * ratios.size();
        for (std::size_t i = 0; i < fh; ++i) {
          for (std::size_t j = 0; j < fw; ++j) {
            for (std::size_t r = 0; r < ratios.size(); ++r) {
              const std::size_t idx = (i * fw + j) * ratios.size() + r;
              if (idx >= got.size()) {
                ++bad;
                continue;
              }
              const double cx = (static_cast<double>(j) + 0.5) * strides[li];
              const double cy = (static_cast<double>(i) + 0.5) * strides[li];
              const double aw = scales[li] * std::sqrt(ratios[r]);
              const double ah = scales[li] / std::sqrt(ratios[r]);
              const AxisRect& a = got[idx];
              bad += a.x1 != cx - aw / 2 || a.x2 != cx + aw / 2 || a.y1 != cy - ah / 2 || a.y2 != cy + ah / 2;
              bad += std::abs(a.width() * a.height() - scales[li] * scales[li]) > 1e-9 * scales[li] * scales[li];
              ++checked;
            }
          }
        }
      }
    }
    detail = std::to_string(checked) + " anchors, " + std::to_string(bad) + " mismatches";
    return bad == 0;
  });
}

// 7. Pyramid strides, module shapes and the zero-gate identity.
inline CheckResult check_architecture() {
  return detail::timed("architecture", [&](std::string& detail) {
    const NetworkConfig cfg;
    ModelWeights w = ModelWeights::random(cfg, 42);
    Rng rng(707);
    std::size_t bad = 0;
    double worst_gate = 0.0;
    for (std::size_t size : {64u, 128u, 256u}) {
      Tensor img(Shape{1, 3, size, size});
      for (double& v : img.data()) v = rng.uniform();
      const BaseFeatures base = stub_base(img, w);
      const Tensor f = fpa(base.res4, w);
      bad += f.shape() != Shape{1, cfg.ctx_channels, size / 16, size / 16};
      const PyramidFeatures pyr = build_pyramid(base, w);
      for (std::size_t l = 0; l < 3; ++l) {
        const std::size_t stride = std::size_t{4} << l;
        bad += pyr.levels[l].shape() != Shape{1, cfg.channels, size / stride, size / stride};
        bad += pyr.strides[l] != stride;
      }
      bad += gau(base.res3, pyr.p4(), w, "gau3").shape() != Shape{1, cfg.channels, size / 8, size / 8};

      ModelWeights zeroed = w;
      zeroed.at("gau3.gate") = ConvParams::zeros(cfg.channels, cfg.channels, 1);
      const Tensor fused = gau(base.res3, pyr.p4(), zeroed, "gau3");
      const Tensor want = naive_upsample(pyr.p4(), size / 8, size / 8);
      for (std::size_t i = 0; i < fused.size(); ++i) {
        worst_gate = std::max(worst_gate, std::abs(fused.data()[i] - want.data()[i]));
      }
    }
    detail = std::to_string(bad) + " shape violations, zero-gate max diff " + detail::fmt(worst_gate) +
             " (limit 1e-12)";
    return bad == 0 && worst_gate <= 1e-12;
  });
}

namespace detail {

// Loss recomputed from the textbook formulas.
inline double oracle_ce(const std::array<double, 2>& z, int label) {
  const double p1 = 1.0 / (1.0 + std::exp(z[0] - z[1]));
  return -std::log(label == 1 ? p1 : 1.0 - p1);
}

inline double oracle_smooth_l1(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(a[i] - b[i]);
    s += d < 1.0 ? 0.5 * d * d : d - 0.5;
  }
  return s;
}

template <class Sample, std::size_t D>
double oracle_head(const std::vector<Sample>& s, double lambda) {
  if (s.empty()) return 0.0;
  double cls = 0.0, loc = 0.0;
  std::size_t pos = 0;
  for (const Sample& x : s) {
    cls += oracle_ce(x.logits, x.label);
    if (x.label == 1) {
      loc += oracle_smooth_l1(x.pred.data(), x.target.data(), D);
      ++pos;
    }
  }
  return cls / static_cast<double>(s.size()) + (pos ? lambda * loc / static_cast<double>(pos) : 0.0);
}

inline double oracle_bce(const Tensor& z, const MaskTarget& t) {
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-z.data()[i]));
    s += t.cells[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  return s / static_cast<double>(z.size());
}

}  // namespace detail

// 8. Multi-task loss composition and a hand-computed RPN value.
inline CheckResult check_loss_composition(std::size_t cases = 200) {
  return detail::timed("loss_composition", [&](std::string& detail) {
    Rng rng(808);
    const LossConfig cfg;
    double worst = 0.0;
    for (std::size_t t = 0; t < cases; ++t) {
      std::array<std::vector<RpnSample>, 3> rpn;
      for (auto& level : rpn) level = detail::random_head_samples<RpnSample, 4>(rng);
      const std::vector<FrcnnSample> frcnn = detail::random_head_samples<FrcnnSample, 8>(rng);
      std::vector<MaskSample> masks(1 + rng.below(3));
      for (MaskSample& m : masks) {
        m.logits = detail::random_logits(rng, 14);
        m.target = detail::random_target(rng, 14);
      }
      const LossReport rep = total_loss(rpn_loss(rpn, cfg), frcnn_loss(frcnn, cfg), mask_loss(masks), cfg);
      double l_rpn = 0.0;
      for (const auto& level : rpn) l_rpn += detail::oracle_head<RpnSample, 4>(level, 3.0);
      const double l_frcnn = detail::oracle_head<FrcnnSample, 8>(frcnn, 1.0);
      double l_mask = 0.0;
      for (const MaskSample& m : masks) l_mask += detail::oracle_bce(m.logits, m.target);
      l_mask /= static_cast<double>(masks.size());
      worst = std::max(worst, std::abs(rep.l_total - (l_rpn + l_frcnn + 0.03125 * l_mask)));
      worst = std::max(worst, std::abs(rep.l_total - (rep.l_rpn + rep.l_frcnn + 0.03125 * rep.l_mask)));
    }
    // Positive anchor: logits (0, ln 3), residual (0.5, 0, 0, 0); negative
    // anchor: logits (0, 0). L = (ln(4/3) + ln 2) / 2 + 3 * 0.125.
    const std::vector<RpnSample> two = {
        RpnSample{{0.0, std::log(3.0)}, 1, {0.5, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}},
        RpnSample{{0.0, 0.0}, 0, {}, {}}};
    const double hand = 0.8654146265058631;
    const double got = rpn_level_loss(two, cfg).total;
    detail = "composition max diff " + detail::fmt(worst) + ", two-anchor RPN " + std::to_string(got) +
             " vs " + std::to_string(hand);
    return worst <= 1e-12 && std::abs(got - hand) <= 1e-12;
  });
}

// 9. Byte-identical detections across runs and thread counts; top-N and
// Skewed NMS invariants on the fixture image.
inline CheckResult check_determinism(const std::vector<std::size_t>& thread_counts = {1, 2, 4}) {
  return detail::timed("determinism", [&](std::string& detail) {
    const RgbImage img = fixture_image();
    const ModelWeights w = fixture_weights();
    const PipelineConfig base = fixture_config();
    std::set<std::string> outputs;
    InferTrace trace;
    auto run = [&](std::size_t threads) {
      PipelineConfig cfg = base;
      cfg.threads = threads;
      InferResult res = infer(img, w, cfg);
      trace = res.trace;
      outputs.insert(serialize_detections({"fixture", img.width, img.height, std::move(res.detections)},
                                          cfg.mask_threshold));
    };
    for (int i = 0; i < 3; ++i) run(1);
    for (std::size_t t : thread_counts) run(t);
    auto max_pairwise = [](const InferTrace& t) {
      double worst = 0.0;
      for (std::size_t i = 0; i < t.kept.size(); ++i) {
        for (std::size_t j = i + 1; j < t.kept.size(); ++j) {
          worst = std::max(worst, quad_iou(t.kept[i].box, t.kept[j].box));
        }
      }
      return worst;
    };
    const double worst_iou = max_pairwise(trace);
    // Every head output enters Skewed NMS when the score cut is removed.
    PipelineConfig open_cfg = base;
    open_cfg.score_threshold = 0.0;
    open_cfg.emit_masks = false;
    const InferTrace open = infer(img, w, open_cfg).trace;
    const double worst_open = max_pairwise(open);
    const bool top_ok = trace.proposals_to_head == std::min<std::size_t>(trace.proposals_after_nms, base.top_n) &&
                        trace.proposals_to_head <= 2000;
    detail = std::to_string(outputs.size()) + " distinct outputs over " + std::to_string(3 + thread_counts.size()) +
             " runs; proposals after NMS " + std::to_string(trace.proposals_after_nms) + ", to head " +
             std::to_string(trace.proposals_to_head) + "; " + std::to_string(trace.kept.size()) +
             " detections, max pairwise IoU " + detail::fmt(worst_iou) + "; without score cut " +
             std::to_string(open.above_threshold) + " candidates -> " + std::to_string(open.kept.size()) +
             " kept, max pairwise IoU " + detail::fmt(worst_open);
    return outputs.size() == 1 && top_ok && worst_iou <= 0.3 && worst_open <= 0.3;
  });
}

// 10. Evaluation protocol fixtures.
inline CheckResult check_evaluation() {
  return detail::timed("evaluation", [&](std::string& detail) {
    const EvalFixture half = half_recall_fixture();
    const EvalReport a = evaluate(half.dets, half.gts, 0.5);
    const EvalFixture same = identity_fixture();
    const EvalReport b = evaluate(same.dets, same.gts, 0.5);
    std::ostringstream os;
    os.precision(17);
    os << "half: R=" << a.recall << " P=" << a.precision << " F=" << a.f_measure << "; identity: R=" << b.recall
       << " P=" << b.precision << " F=" << b.f_measure;
    detail = os.str();
    return a.recall == 0.5 && a.precision == 1.0 && a.f_measure == 2.0 / 3.0 && b.recall == 1.0 &&
           b.precision == 1.0 && b.f_measure == 1.0;
  });
}

inline std::vector<CheckResult> run_selftest() {
  return {check_quad_roundtrip(), check_gradients(), check_nms(),         check_polygon_iou(),
          check_roi_align(),      check_anchor_lattice(), check_architecture(), check_loss_composition(),
          check_determinism(),    check_evaluation()};
}

}  // namespace pantext::verify
