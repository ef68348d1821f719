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

#include <map>
#include <string>
#include <vector>

#include "pantext/config.hpp"
#include "pantext/ground_truth.hpp"
#include "pantext/inference.hpp"
#include "pantext/network.hpp"
#include "pantext/verify/oracles.hpp"

namespace pantext::verify {

inline constexpr std::size_t kFixtureSize = 256;
inline constexpr std::uint64_t kFixtureSeed = 42;

inline RgbImage fixture_image() { return make_fixture_image(kFixtureSize, kFixtureSize); }

inline PipelineConfig fixture_config() {
  PipelineConfig cfg;
  cfg.test_scale = kFixtureSize;
  return cfg;
}

inline ModelWeights fixture_weights() { return ModelWeights::random(NetworkConfig{}, kFixtureSeed); }

inline GtInstance gt_quad(const Quad& q, std::string text = "text", bool ignore = false) {
  return GtInstance{std::vector<Point>(q.v.begin(), q.v.end()), std::move(text), ignore};
}

struct EvalFixture {
  std::map<std::string, std::vector<Detection>> dets;
  std::map<std::string, GroundTruth> gts;
};

// One image, two ground-truth quads, one detection equal to the first.
inline EvalFixture half_recall_fixture() {
  const Quad a{{{{10, 10}, {60, 10}, {60, 30}, {10, 30}}}};
  const Quad b{{{{80, 50}, {140, 55}, {138, 80}, {78, 75}}}};
  EvalFixture f;
  f.gts["img_1"].instances = {gt_quad(a, "alpha"), gt_quad(b, "beta")};
  f.dets["img_1"] = {Detection{a, 0.9, std::nullopt}};
  return f;
}

// Detections identical to every ground truth quad of two images.
inline EvalFixture identity_fixture() {
  const Quad a{{{{10, 10}, {60, 10}, {60, 30}, {10, 30}}}};
  const Quad b{{{{80, 50}, {140, 55}, {138, 80}, {78, 75}}}};
  const Quad c{{{{5, 100}, {90, 90}, {95, 120}, {8, 128}}}};
  EvalFixture f;
  f.gts["img_1"].instances = {gt_quad(a), gt_quad(b)};
  f.gts["img_2"].instances = {gt_quad(c)};
  f.dets["img_1"] = {Detection{a, 0.8, std::nullopt}, Detection{b, 0.7, std::nullopt}};
  f.dets["img_2"] = {Detection{c, 0.95, std::nullopt}};
  return f;
}

}  // namespace pantext::verify
