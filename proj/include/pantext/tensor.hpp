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
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pantext/error.hpp"

namespace pantext {

// NCHW extents.
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t numel() const { return n * c * h * w; }
  std::size_t plane() const { return h * w; }
  friend bool operator==(const Shape&, const Shape&) = default;

  std::string str() const {
    return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " +
           std::to_string(h) + ", " + std::to_string(w) + ")";
  }
};

// Dense 4-D float64 array in batch/channel/height/width order.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, double fill = 0.0)
      : shape_(shape), data_(shape.numel(), fill) {}

  Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.numel()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_.str());
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t batch() const { return shape_.n; }
  std::size_t channels() const { return shape_.c; }
  std::size_t height() const { return shape_.h; }
  std::size_t width() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() & { return data_; }
  std::span<const double> data() const& { return data_; }
  // A span into a temporary would dangle.
  std::span<const double> data() const&& = delete;

  std::size_t offset(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

  double& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
    return data_[offset(n, c, y, x)];
  }
  double at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[offset(n, c, y, x)];
  }

  std::span<double> plane(std::size_t n, std::size_t c) & {
    return std::span<double>(data_).subspan(offset(n, c, 0, 0), shape_.plane());
  }
  std::span<const double> plane(std::size_t n, std::size_t c) const& {
    return std::span<const double>(data_).subspan(offset(n, c, 0, 0), shape_.plane());
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Convolution kernel of shape (out_ch, in_ch, kh, kw) with per-output bias.
struct ConvParams {
  Tensor weights;
  std::vector<double> bias;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t dilation = 1;

  std::size_t out_channels() const { return weights.shape().n; }
  std::size_t in_channels() const { return weights.shape().c; }
  std::size_t kernel_h() const { return weights.shape().h; }
  std::size_t kernel_w() const { return weights.shape().w; }

  void validate() const {
    if (stride == 0) throw ShapeError("conv stride must be positive");
    if (dilation == 0) throw ShapeError("conv dilation must be positive");
    if (kernel_h() % 2 == 0 || kernel_w() % 2 == 0) {
      throw ShapeError("conv kernel must have odd extents, got " + weights.shape().str());
    }
    if (bias.size() != out_channels()) {
      throw ShapeError("conv bias length " + std::to_string(bias.size()) +
                       " does not match out_channels " + std::to_string(out_channels()));
    }
  }

  // Zero-initialised kernel with "same" padding for the given dilation.
  static ConvParams zeros(std::size_t out_ch, std::size_t in_ch, std::size_t k,
                          std::size_t dilation = 1) {
    ConvParams p;
    p.weights = Tensor(Shape{out_ch, in_ch, k, k});
    p.bias.assign(out_ch, 0.0);
    p.dilation = dilation;
    p.padding = dilation * (k / 2);
    return p;
  }
};

namespace detail {

inline std::size_t conv_out_extent(std::size_t in, std::size_t k, const ConvParams& p,
                                   const char* dim) {
  const long long span = static_cast<long long>(p.dilation * (k - 1) + 1);
  const long long padded = static_cast<long long>(in + 2 * p.padding);
  if (padded < span) {
    throw ShapeError(std::string("conv output ") + dim + " would be empty: input " + dim + " " +
                     std::to_string(in) + " too small for dilated kernel extent " +
                     std::to_string(span));
  }
  return static_cast<std::size_t>((padded - span) / static_cast<long long>(p.stride)) + 1;
}

// Largest unfolded patch matrix (elements) for which conv2d uses im2col.
inline constexpr std::size_t kIm2colLimit = std::size_t{1} << 21;

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                     b.shape().str());
  }
}

}  // namespace detail

// 2-D cross-correlation (no kernel flip), zero padding.
inline Tensor conv2d(const Tensor& x, const ConvParams& p) {
  p.validate();
  if (x.channels() != p.in_channels()) {
    throw ShapeError("conv2d: input channels " + std::to_string(x.channels()) +
                     " do not match kernel in_channels " + std::to_string(p.in_channels()));
  }
  const std::size_t kh = p.kernel_h();
  const std::size_t kw = p.kernel_w();
  const std::size_t oh = detail::conv_out_extent(x.height(), kh, p, "height");
  const std::size_t ow = detail::conv_out_extent(x.width(), kw, p, "width");
  const std::size_t oc_n = p.out_channels();
  const std::size_t ic_n = p.in_channels();
  const long long ih = static_cast<long long>(x.height());
  const long long iw = static_cast<long long>(x.width());
  const long long pad = static_cast<long long>(p.padding);
  const long long stride = static_cast<long long>(p.stride);
  const long long dil = static_cast<long long>(p.dilation);

  Tensor out(Shape{x.batch(), oc_n, oh, ow});
  const bool pointwise = kh == 1 && kw == 1 && p.stride == 1 && p.padding == 0;

  const std::size_t patch = ic_n * kh * kw;
  const std::size_t npix = oh * ow;
  if (!pointwise && patch * npix <= detail::kIm2colLimit) {
    // Small maps: unfold patches once, then accumulate contiguous rows in
    // the same (ic, ky, kx) order as the direct path below.
    std::vector<double> cols(patch * npix);
    const auto weights = p.weights.data();
    for (std::size_t n = 0; n < x.batch(); ++n) {
      std::fill(cols.begin(), cols.end(), 0.0);
      for (std::size_t ic = 0; ic < ic_n; ++ic) {
        const auto src = x.plane(n, ic);
        for (std::size_t ky = 0; ky < kh; ++ky) {
          for (std::size_t kx = 0; kx < kw; ++kx) {
            double* row = cols.data() + ((ic * kh + ky) * kw + kx) * npix;
            for (std::size_t oy = 0; oy < oh; ++oy) {
              const long long iy = static_cast<long long>(oy) * stride + static_cast<long long>(ky) * dil - pad;
              if (iy < 0 || iy >= ih) continue;
              for (std::size_t ox = 0; ox < ow; ++ox) {
                const long long ix = static_cast<long long>(ox) * stride + static_cast<long long>(kx) * dil - pad;
                if (ix >= 0 && ix < iw) row[oy * ow + ox] = src[static_cast<std::size_t>(iy * iw + ix)];
              }
            }
          }
        }
      }
      // Four output channels per pass over the unfolded rows.
      std::size_t oc = 0;
      for (; oc + 4 <= oc_n; oc += 4) {
        double* __restrict d0 = out.plane(n, oc).data();
        double* __restrict d1 = out.plane(n, oc + 1).data();
        double* __restrict d2 = out.plane(n, oc + 2).data();
        double* __restrict d3 = out.plane(n, oc + 3).data();
        std::fill(d0, d0 + npix, p.bias[oc]);
        std::fill(d1, d1 + npix, p.bias[oc + 1]);
        std::fill(d2, d2 + npix, p.bias[oc + 2]);
        std::fill(d3, d3 + npix, p.bias[oc + 3]);
        for (std::size_t k = 0; k < patch; ++k) {
          const double w0 = weights[oc * patch + k];
          const double w1 = weights[(oc + 1) * patch + k];
          const double w2 = weights[(oc + 2) * patch + k];
          const double w3 = weights[(oc + 3) * patch + k];
          const double* __restrict row = cols.data() + k * npix;
          for (std::size_t i = 0; i < npix; ++i) {
            const double v = row[i];
            d0[i] += w0 * v;
            d1[i] += w1 * v;
            d2[i] += w2 * v;
            d3[i] += w3 * v;
          }
        }
      }
      for (; oc < oc_n; ++oc) {
        double* __restrict dst = out.plane(n, oc).data();
        std::fill(dst, dst + npix, p.bias[oc]);
        for (std::size_t k = 0; k < patch; ++k) {
          const double wv = weights[oc * patch + k];
          const double* __restrict row = cols.data() + k * npix;
          for (std::size_t i = 0; i < npix; ++i) dst[i] += wv * row[i];
        }
      }
    }
    return out;
  }

  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t oc = 0; oc < oc_n; ++oc) {
      auto dst = out.plane(n, oc);
      std::fill(dst.begin(), dst.end(), p.bias[oc]);
      for (std::size_t ic = 0; ic < ic_n; ++ic) {
        const auto src = x.plane(n, ic);
        if (pointwise) {
          const double wv = p.weights.at(oc, ic, 0, 0);
          if (wv == 0.0) continue;
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += wv * src[i];
          continue;
        }
        for (std::size_t ky = 0; ky < kh; ++ky) {
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const double wv = p.weights.at(oc, ic, ky, kx);
            if (wv == 0.0) continue;
            const long long off_x = static_cast<long long>(kx) * dil - pad;
            // Valid output columns: 0 <= ox*stride + off_x < iw.
            long long ox_lo = off_x >= 0 ? 0 : (-off_x + stride - 1) / stride;
            long long ox_hi = (iw - 1 - off_x) < 0 ? -1 : (iw - 1 - off_x) / stride;
            ox_hi = std::min<long long>(ox_hi, static_cast<long long>(ow) - 1);
            if (ox_lo > ox_hi) continue;
            for (std::size_t oy = 0; oy < oh; ++oy) {
              const long long iy = static_cast<long long>(oy) * stride +
                                   static_cast<long long>(ky) * dil - pad;
              if (iy < 0 || iy >= ih) continue;
              double* drow = dst.data() + oy * ow;
              const double* srow = src.data() + iy * iw;
              if (stride == 1) {
                for (long long ox = ox_lo; ox <= ox_hi; ++ox) drow[ox] += wv * srow[ox + off_x];
              } else {
                for (long long ox = ox_lo; ox <= ox_hi; ++ox) {
                  drow[ox] += wv * srow[ox * stride + off_x];
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

inline Tensor global_avg_pool(const Tensor& x) {
  if (x.height() == 0 || x.width() == 0) {
    throw ShapeError("global_avg_pool: empty spatial extent " + x.shape().str());
  }
  Tensor out(Shape{x.batch(), x.channels(), 1, 1});
  const double inv = 1.0 / static_cast<double>(x.shape().plane());
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      const auto src = x.plane(n, c);
      out.at(n, c, 0, 0) = std::accumulate(src.begin(), src.end(), 0.0) * inv;
    }
  }
  return out;
}

// Bilinear resize with half-pixel centres (align_corners = false). Source
// coordinates are clamped to the valid range.
inline Tensor bilinear_resize(const Tensor& x, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) {
    throw ShapeError("bilinear resize: target extent must be positive");
  }
  if (x.height() == 0 || x.width() == 0) {
    throw ShapeError("bilinear resize: empty input " + x.shape().str());
  }
  const double sy = static_cast<double>(x.height()) / static_cast<double>(out_h);
  const double sx = static_cast<double>(x.width()) / static_cast<double>(out_w);

  struct Tap {
    std::size_t i0, i1;
    double w1;
  };
  auto taps = [](std::size_t out, std::size_t in, double scale) {
    std::vector<Tap> t(out);
    const double max_src = static_cast<double>(in - 1);
    for (std::size_t d = 0; d < out; ++d) {
      const double src = std::clamp((static_cast<double>(d) + 0.5) * scale - 0.5, 0.0, max_src);
      const auto i0 = static_cast<std::size_t>(std::floor(src));
      const std::size_t i1 = std::min(i0 + 1, in - 1);
      t[d] = Tap{i0, i1, src - static_cast<double>(i0)};
    }
    return t;
  };
  const auto ty = taps(out_h, x.height(), sy);
  const auto tx = taps(out_w, x.width(), sx);

  Tensor out(Shape{x.batch(), x.channels(), out_h, out_w});
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      for (std::size_t oy = 0; oy < out_h; ++oy) {
        const Tap& a = ty[oy];
        for (std::size_t ox = 0; ox < out_w; ++ox) {
          const Tap& b = tx[ox];
          const double top = (1.0 - b.w1) * x.at(n, c, a.i0, b.i0) + b.w1 * x.at(n, c, a.i0, b.i1);
          const double bot = (1.0 - b.w1) * x.at(n, c, a.i1, b.i0) + b.w1 * x.at(n, c, a.i1, b.i1);
          out.at(n, c, oy, ox) = (1.0 - a.w1) * top + a.w1 * bot;
        }
      }
    }
  }
  return out;
}

inline Tensor bilinear_upsample(const Tensor& x, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) {
    throw ShapeError("bilinear_upsample: target extent must be positive");
  }
  if (out_h < x.height() || out_w < x.width()) {
    throw ShapeError("bilinear_upsample: target " + std::to_string(out_h) + "x" +
                     std::to_string(out_w) + " smaller than input " + x.shape().str());
  }
  return bilinear_resize(x, out_h, out_w);
}

// Per (batch, channel) plane normalisation without affine parameters.
inline Tensor instance_norm(const Tensor& x, double eps = 1e-5) {
  if (x.height() == 0 || x.width() == 0) {
    throw ShapeError("instance_norm: empty spatial extent " + x.shape().str());
  }
  Tensor out(x.shape());
  const double count = static_cast<double>(x.shape().plane());
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      const auto src = x.plane(n, c);
      auto dst = out.plane(n, c);
      const double mean = std::accumulate(src.begin(), src.end(), 0.0) / count;
      double var = 0.0;
      for (double v : src) var += (v - mean) * (v - mean);
      var /= count;
      const double denom = std::sqrt(var + eps);
      for (std::size_t i = 0; i < src.size(); ++i) {
        // Zero-variance planes normalise to zero even when eps == 0.
        dst[i] = denom > 0.0 ? (src[i] - mean) / denom : 0.0;
      }
    }
  }
  return out;
}

enum class ElementwiseOp { kAdd, kMul };

inline Tensor elementwise(const Tensor& x, const Tensor& y, ElementwiseOp op) {
  detail::require_same_shape(x, y, op == ElementwiseOp::kAdd ? "add" : "mul");
  Tensor out(x.shape());
  auto o = out.data();
  const auto a = x.data();
  const auto b = y.data();
  if (op == ElementwiseOp::kAdd) {
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] + b[i];
  } else {
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] * b[i];
  }
  return out;
}

inline Tensor add(const Tensor& x, const Tensor& y) { return elementwise(x, y, ElementwiseOp::kAdd); }
inline Tensor mul(const Tensor& x, const Tensor& y) { return elementwise(x, y, ElementwiseOp::kMul); }

// Repeats a (N, C, 1, 1) tensor over an h x w grid.
inline Tensor broadcast_spatial(const Tensor& x, std::size_t h, std::size_t w) {
  if (x.height() != 1 || x.width() != 1) {
    throw ShapeError("broadcast_spatial: expected 1x1 spatial input, got " + x.shape().str());
  }
  Tensor out(Shape{x.batch(), x.channels(), h, w});
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      auto dst = out.plane(n, c);
      std::fill(dst.begin(), dst.end(), x.at(n, c, 0, 0));
    }
  }
  return out;
}

inline Tensor relu(const Tensor& x) {
  Tensor out(x.shape());
  std::transform(x.data().begin(), x.data().end(), out.data().begin(),
                 [](double v) { return v > 0.0 ? v : 0.0; });
  return out;
}

inline double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

inline Tensor sigmoid(const Tensor& x) {
  Tensor out(x.shape());
  std::transform(x.data().begin(), x.data().end(), out.data().begin(),
                 [](double v) { return sigmoid(v); });
  return out;
}

// Softmax across the channel axis at every (n, y, x).
inline Tensor softmax_channels(const Tensor& x) {
  Tensor out(x.shape());
  const std::size_t plane = x.shape().plane();
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t i = 0; i < plane; ++i) {
      double mx = -INFINITY;
      for (std::size_t c = 0; c < x.channels(); ++c) mx = std::max(mx, x.plane(n, c)[i]);
      double sum = 0.0;
      for (std::size_t c = 0; c < x.channels(); ++c) {
        const double e = std::exp(x.plane(n, c)[i] - mx);
        out.plane(n, c)[i] = e;
        sum += e;
      }
      for (std::size_t c = 0; c < x.channels(); ++c) out.plane(n, c)[i] /= sum;
    }
  }
  return out;
}

inline Tensor concat_channels(std::span<const Tensor> xs) {
  if (xs.empty()) throw ShapeError("concat_channels: no inputs");
  const Shape& s0 = xs.front().shape();
  std::size_t total_c = 0;
  for (const Tensor& t : xs) {
    const Shape& s = t.shape();
    if (s.n != s0.n || s.h != s0.h || s.w != s0.w) {
      throw ShapeError("concat_channels: batch/spatial mismatch " + s0.str() + " vs " + s.str());
    }
    total_c += s.c;
  }
  Tensor out(Shape{s0.n, total_c, s0.h, s0.w});
  for (std::size_t n = 0; n < s0.n; ++n) {
    std::size_t c_out = 0;
    for (const Tensor& t : xs) {
      for (std::size_t c = 0; c < t.channels(); ++c, ++c_out) {
        const auto src = t.plane(n, c);
        std::copy(src.begin(), src.end(), out.plane(n, c_out).begin());
      }
    }
  }
  return out;
}

inline Tensor concat_channels(std::initializer_list<Tensor> xs) {
  return concat_channels(std::span<const Tensor>(xs.begin(), xs.size()));
}

// 2x2 max pooling with stride 2; odd trailing rows/columns are dropped.
inline Tensor maxpool2(const Tensor& x) {
  const std::size_t oh = x.height() / 2;
  const std::size_t ow = x.width() / 2;
  if (oh == 0 || ow == 0) throw ShapeError("maxpool2: input too small " + x.shape().str());
  Tensor out(Shape{x.batch(), x.channels(), oh, ow});
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t xx = 0; xx < ow; ++xx) {
          out.at(n, c, y, xx) = std::max({x.at(n, c, 2 * y, 2 * xx), x.at(n, c, 2 * y, 2 * xx + 1),
                                          x.at(n, c, 2 * y + 1, 2 * xx),
                                          x.at(n, c, 2 * y + 1, 2 * xx + 1)});
        }
      }
    }
  }
  return out;
}

}  // namespace pantext
