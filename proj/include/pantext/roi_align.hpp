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
#include <cstddef>
#include <vector>

#include "pantext/error.hpp"
#include "pantext/geometry.hpp"
#include "pantext/tensor.hpp"

namespace pantext {

// P2, P3 and P4 with strides 4, 8 and 16 and a common channel count.
struct PyramidFeatures {
  std::array<Tensor, 3> levels;
  std::array<std::size_t, 3> strides{4, 8, 16};

  const Tensor& p2() const { return levels[0]; }
  const Tensor& p3() const { return levels[1]; }
  const Tensor& p4() const { return levels[2]; }

  void validate() const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (levels[i].size() == 0) {
        throw ShapeError("pyramid level P" + std::to_string(i + 2) + " is missing");
      }
      if (levels[i].channels() != levels[0].channels()) {
        throw ShapeError("pyramid levels disagree on channel count");
      }
    }
  }
};

struct RoiSpec {
  std::size_t out_h = 7;
  std::size_t out_w = 7;
  // Samples per bin along each axis.
  std::size_t samples = 2;
};

namespace detail {

// Bilinear sample at continuous feature coordinates; out-of-range
// coordinates are clamped to the border.
inline double bilinear_at(std::span<const double> plane, std::size_t h, std::size_t w, double y,
                          double x) {
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  const auto y0 = static_cast<std::size_t>(std::floor(y));
  const auto x0 = static_cast<std::size_t>(std::floor(x));
  const std::size_t y1 = std::min(y0 + 1, h - 1);
  const std::size_t x1 = std::min(x0 + 1, w - 1);
  const double ly = y - static_cast<double>(y0);
  const double lx = x - static_cast<double>(x0);
  const double v00 = plane[y0 * w + x0];
  const double v10 = plane[y1 * w + x0];
  const double top = v00 + lx * (plane[y0 * w + x1] - v00);
  const double bot = v10 + lx * (plane[y1 * w + x1] - v10);
  return top + ly * (bot - top);
}

}  // namespace detail

// Feature-space coordinate of image coordinate v: v * scale - 0.5. Feature
// cell i is centred on image pixels [i / scale, (i + 1) / scale).
inline double to_feature_coord(double v, double scale) { return v * scale - 0.5; }

// Sample positions along one axis of a bin grid, bin-major.
inline std::vector<double> roi_sample_coords(double lo, double hi, double scale, std::size_t bins,
                                             std::size_t samples) {
  const double start = to_feature_coord(lo, scale);
  const double bin = (hi - lo) * scale / static_cast<double>(bins);
  std::vector<double> coords;
  coords.reserve(bins * samples);
  for (std::size_t b = 0; b < bins; ++b) {
    for (std::size_t s = 0; s < samples; ++s) {
      coords.push_back(start + (static_cast<double>(b) +
                                (static_cast<double>(s) + 0.5) / static_cast<double>(samples)) *
                                   bin);
    }
  }
  return coords;
}

// RoIAlign of one image-space roi on a single-batch feature map. Each output
// bin is the mean of samples x samples bilinear samples.
inline Tensor roi_align(const Tensor& feat, const AxisRect& roi, double scale,
                        const RoiSpec& spec = {}) {
  if (feat.batch() != 1) throw ShapeError("roi_align: expected single-batch features");
  if (feat.height() == 0 || feat.width() == 0) throw ShapeError("roi_align: empty feature map");
  if (spec.out_h == 0 || spec.out_w == 0 || spec.samples == 0) {
    throw ShapeError("roi_align: output size and samples must be positive");
  }
  if (!roi.valid()) throw GeometryError("roi_align: degenerate roi");
  if (!(scale > 0.0)) throw ValidationError("roi_align: scale must be positive");

  const std::vector<double> ys = roi_sample_coords(roi.y1, roi.y2, scale, spec.out_h, spec.samples);
  const std::vector<double> xs = roi_sample_coords(roi.x1, roi.x2, scale, spec.out_w, spec.samples);
  const double inv = 1.0 / static_cast<double>(spec.samples * spec.samples);
  const std::size_t s = spec.samples;

  Tensor out(Shape{1, feat.channels(), spec.out_h, spec.out_w});
  for (std::size_t c = 0; c < feat.channels(); ++c) {
    const auto plane = feat.plane(0, c);
    for (std::size_t by = 0; by < spec.out_h; ++by) {
      for (std::size_t bx = 0; bx < spec.out_w; ++bx) {
        // Mean as first sample plus mean deviation; exact on constant maps.
        const double first = detail::bilinear_at(plane, feat.height(), feat.width(), ys[by * s], xs[bx * s]);
        double acc = 0.0;
        for (std::size_t iy = 0; iy < s; ++iy) {
          for (std::size_t ix = 0; ix < s; ++ix) {
            acc += detail::bilinear_at(plane, feat.height(), feat.width(), ys[by * s + iy],
                                       xs[bx * s + ix]) -
                   first;
          }
        }
        out.at(0, c, by, bx) = first + acc * inv;
      }
    }
  }
  return out;
}

// Pools the roi from all three levels, concatenates P2, P3, P4 along channels
// and reduces with a 1x1 convolution.
inline Tensor skip_roi_align(const PyramidFeatures& pyr, const AxisRect& roi,
                             const ConvParams& reduce, const RoiSpec& spec = {}) {
  pyr.validate();
  std::array<Tensor, 3> pooled;
  for (std::size_t i = 0; i < 3; ++i) {
    pooled[i] = roi_align(pyr.levels[i], roi, 1.0 / static_cast<double>(pyr.strides[i]), spec);
  }
  const Tensor cat = concat_channels(std::span<const Tensor>(pooled));
  if (reduce.kernel_h() != 1 || reduce.kernel_w() != 1) {
    throw ShapeError("skip_roi_align: reduction must be a 1x1 convolution");
  }
  return conv2d(cat, reduce);
}

}  // namespace pantext
