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
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pantext/anchors.hpp"
#include "pantext/error.hpp"
#include "pantext/geometry.hpp"
#include "pantext/random.hpp"
#include "pantext/roi_align.hpp"
#include "pantext/tensor.hpp"

namespace pantext {

struct NetworkConfig {
  // Pyramid width C. The stub base produces C, 2C and 4C channels.
  std::size_t channels = 32;
  // Width of the FPA context and direct branches.
  std::size_t ctx_channels = 32;
  std::size_t anchors_per_cell = 6;
  std::size_t mask_size = 14;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct LayerSpec {
  std::string name;
  std::size_t out_ch;
  std::size_t in_ch;
  std::size_t kernel;
  std::size_t dilation = 1;
};

// Every convolution the forward graph uses, in a fixed order.
inline std::vector<LayerSpec> layer_specs(const NetworkConfig& cfg) {
  const std::size_t c = cfg.channels;
  const std::size_t x = cfg.ctx_channels;
  const std::size_t k = cfg.anchors_per_cell;
  std::vector<LayerSpec> s = {
      {"base.conv1", c, 3, 3},
      {"base.conv2", c, c, 3},
      {"base.conv3", 2 * c, c, 3},
      {"base.conv4", 4 * c, 2 * c, 3},
      {"fpa.dilate3", x, 4 * c, 3, 3},
      {"fpa.dilate6", x, 4 * c, 3, 6},
      {"fpa.dilate12", x, 4 * c, 3, 12},
      {"fpa.context_reduce", x, 3 * x, 1},
      {"fpa.direct", x, 4 * c, 1},
      {"fpa.global", x, 4 * c, 1},
      {"pyramid.p4_align", c, x, 1},
      {"gau3.low", c, 2 * c, 3},
      {"gau3.gate", c, c, 1},
      {"gau2.low", c, c, 3},
      {"gau2.gate", c, c, 1},
  };
  for (PyramidLevel level : kPyramidLevels) {
    const std::string p = "rpn." + level_name(level);
    s.push_back({p + ".conv", c, c, 3});
    s.push_back({p + ".cls", 2 * k, c, 1});
    s.push_back({p + ".bbox", 4 * k, c, 1});
  }
  s.push_back({"roi.reduce", c, 3 * c, 1});
  s.push_back({"head.trunk1", 2 * c, c, 3});
  s.push_back({"head.trunk2", 2 * c, 2 * c, 3});
  s.push_back({"head.cls", 2, 2 * c, 1});
  s.push_back({"head.quad", 8, 2 * c, 1});
  for (int i = 1; i <= 4; ++i) s.push_back({"head.mask" + std::to_string(i), 2 * c, 2 * c, 3});
  s.push_back({"head.mask_out", 1, 2 * c, 1});
  return s;
}

// Named convolution parameters plus the configuration they were built for.
class ModelWeights {
 public:
  ModelWeights() = default;
  ModelWeights(NetworkConfig cfg, std::uint64_t seed) : config_(cfg), seed_(seed) {}

  // Gaussian(0, 0.01) kernels and zero biases, drawn in layer_specs order.
  static ModelWeights random(const NetworkConfig& cfg, std::uint64_t seed, double stddev = 0.01) {
    ModelWeights w(cfg, seed);
    Rng rng(seed);
    for (const LayerSpec& s : layer_specs(cfg)) {
      ConvParams p = ConvParams::zeros(s.out_ch, s.in_ch, s.kernel, s.dilation);
      for (double& v : p.weights.data()) v = rng.gaussian(0.0, stddev);
      w.layers_[s.name] = std::move(p);
    }
    return w;
  }

  static ModelWeights zeros(const NetworkConfig& cfg) {
    ModelWeights w(cfg, 0);
    for (const LayerSpec& s : layer_specs(cfg)) {
      w.layers_[s.name] = ConvParams::zeros(s.out_ch, s.in_ch, s.kernel, s.dilation);
    }
    return w;
  }

  const NetworkConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  const std::map<std::string, ConvParams>& layers() const { return layers_; }

  const ConvParams& at(const std::string& name) const {
    auto it = layers_.find(name);
    if (it == layers_.end()) throw ValidationError("weights: missing layer '" + name + "'");
    return it->second;
  }
  ConvParams& at(const std::string& name) {
    auto it = layers_.find(name);
    if (it == layers_.end()) throw ValidationError("weights: missing layer '" + name + "'");
    return it->second;
  }

  void set(const std::string& name, ConvParams p) { layers_[name] = std::move(p); }

  // Checks that every graph layer exists with the expected shape and that no
  // unknown layers are present.
  void validate() const {
    const auto specs = layer_specs(config_);
    for (const LayerSpec& s : specs) {
      const ConvParams& p = at(s.name);
      const Shape want{s.out_ch, s.in_ch, s.kernel, s.kernel};
      if (p.weights.shape() != want) {
        throw ValidationError("weights: layer '" + s.name + "' has shape " +
                              p.weights.shape().str() + ", expected " + want.str());
      }
      if (p.bias.size() != s.out_ch) {
        throw ValidationError("weights: layer '" + s.name + "' has wrong bias length");
      }
      if (!p.weights.all_finite()) {
        throw ValidationError("weights: layer '" + s.name + "' has non-finite values");
      }
    }
    if (layers_.size() != specs.size()) {
      for (const auto& [name, p] : layers_) {
        bool known = false;
        for (const LayerSpec& s : specs) known = known || s.name == name;
        if (!known) throw ValidationError("weights: unexpected layer '" + name + "'");
      }
    }
  }

 private:
  NetworkConfig config_;
  std::uint64_t seed_ = 0;
  std::map<std::string, ConvParams> layers_;
};

struct BaseFeatures {
  Tensor res2;  // stride 4, C channels
  Tensor res3;  // stride 8, 2C channels
  Tensor res4;  // stride 16, 4C channels
};

// Stand-in backbone: conv3x3 + ReLU + maxpool2, four times.
inline BaseFeatures stub_base(const Tensor& image, const ModelWeights& w) {
  const Shape& s = image.shape();
  if (s.n != 1 || s.c != 3) {
    throw ShapeError("stub_base: expected a (1, 3, H, W) image, got " + s.str());
  }
  if (s.h == 0 || s.w == 0 || s.h % 16 != 0 || s.w % 16 != 0) {
    throw ShapeError("stub_base: image height and width must be positive multiples of 16, got " +
                     s.str());
  }
  auto stage = [&](const Tensor& x, const char* name) {
    return maxpool2(relu(conv2d(x, w.at(name))));
  };
  BaseFeatures f;
  const Tensor s1 = stage(image, "base.conv1");
  f.res2 = stage(s1, "base.conv2");
  f.res3 = stage(f.res2, "base.conv3");
  f.res4 = stage(f.res3, "base.conv4");
  return f;
}

// Feature pyramid attention on res4: the 1x1 projection of the input is
// gated pixel-wise by multi-rate dilated context, then the global pooling
// branch is added.
inline Tensor fpa(const Tensor& res4, const ModelWeights& w) {
  const Tensor context = conv2d(concat_channels({conv2d(res4, w.at("fpa.dilate3")),
                                                 conv2d(res4, w.at("fpa.dilate6")),
                                                 conv2d(res4, w.at("fpa.dilate12"))}),
                                w.at("fpa.context_reduce"));
  const Tensor direct = conv2d(res4, w.at("fpa.direct"));
  const Tensor global = broadcast_spatial(conv2d(global_avg_pool(res4), w.at("fpa.global")),
                                          res4.height(), res4.width());
  return add(mul(direct, context), global);
}

// Global attention upsample. `prefix` selects the layer group ("gau3",
// "gau2"). The channel gate is GAP(ReLU(IN(conv1x1(high)))).
inline Tensor gau(const Tensor& low, const Tensor& high, const ModelWeights& w,
                  const std::string& prefix) {
  if (low.height() != 2 * high.height() || low.width() != 2 * high.width()) {
    throw ShapeError("gau: low-level resolution " + low.shape().str() +
                     " must be twice the high-level resolution " + high.shape().str());
  }
  const Tensor low_proj = conv2d(low, w.at(prefix + ".low"));
  const Tensor gate = global_avg_pool(relu(instance_norm(conv2d(high, w.at(prefix + ".gate")))));
  const Tensor weighted = mul(low_proj, broadcast_spatial(gate, low.height(), low.width()));
  return add(bilinear_upsample(high, low.height(), low.width()), weighted);
}

inline PyramidFeatures build_pyramid(const BaseFeatures& base, const ModelWeights& w) {
  PyramidFeatures pyr;
  pyr.levels[2] = conv2d(fpa(base.res4, w), w.at("pyramid.p4_align"));
  pyr.levels[1] = gau(base.res3, pyr.levels[2], w, "gau3");
  pyr.levels[0] = gau(base.res2, pyr.levels[1], w, "gau2");
  return pyr;
}

struct RpnLevelOutput {
  // Channel 2a is the non-text logit of anchor a, 2a + 1 the text logit.
  Tensor cls;
  // Channels 4a .. 4a + 3 are (dx, dy, dw, dh) for anchor a.
  Tensor bbox;
};

struct RpnOutput {
  std::array<RpnLevelOutput, 3> levels;
};

// One independent RPN head per pyramid level.
inline RpnOutput rpn_forward(const PyramidFeatures& pyr, const ModelWeights& w) {
  pyr.validate();
  RpnOutput out;
  for (PyramidLevel level : kPyramidLevels) {
    const std::string p = "rpn." + level_name(level);
    const Tensor hidden = relu(conv2d(pyr.levels[level_index(level)], w.at(p + ".conv")));
    out.levels[level_index(level)] = {conv2d(hidden, w.at(p + ".cls")),
                                      conv2d(hidden, w.at(p + ".bbox"))};
  }
  return out;
}

struct HeadOutput {
  std::array<double, 2> logits{};  // (non-text, text)
  QuadDelta delta{};
  Tensor mask_logits;  // (1, 1, M, M)
};

inline Tensor head_trunk(const Tensor& roi_feat, const ModelWeights& w) {
  const Shape& s = roi_feat.shape();
  if (s.n != 1 || s.c != w.config().channels || s.h != 7 || s.w != 7) {
    throw ShapeError("head: expected roi features (1, " + std::to_string(w.config().channels) +
                     ", 7, 7), got " + s.str());
  }
  return relu(conv2d(relu(conv2d(roi_feat, w.at("head.trunk1"))), w.at("head.trunk2")));
}

// Detection branch on trunk features: GAP then sibling linear layers.
inline HeadOutput head_detect(const Tensor& trunk, const ModelWeights& w) {
  const Tensor pooled = global_avg_pool(trunk);
  const Tensor cls = conv2d(pooled, w.at("head.cls"));
  const Tensor quad = conv2d(pooled, w.at("head.quad"));
  HeadOutput out;
  out.logits = {cls.at(0, 0, 0, 0), cls.at(0, 1, 0, 0)};
  for (std::size_t i = 0; i < 8; ++i) out.delta[i] = quad.at(0, i, 0, 0);
  return out;
}

// Mask branch on trunk features: four conv3x3 + ReLU, upsample, 1x1 logits.
inline Tensor head_mask(const Tensor& trunk, const ModelWeights& w) {
  Tensor x = trunk;
  for (int i = 1; i <= 4; ++i) x = relu(conv2d(x, w.at("head.mask" + std::to_string(i))));
  const std::size_t m = w.config().mask_size;
  return conv2d(bilinear_upsample(x, m, m), w.at("head.mask_out"));
}

inline HeadOutput head_forward(const Tensor& roi_feat, const ModelWeights& w) {
  const Tensor trunk = head_trunk(roi_feat, w);
  HeadOutput out = head_detect(trunk, w);
  out.mask_logits = head_mask(trunk, w);
  return out;
}

}  // namespace pantext
