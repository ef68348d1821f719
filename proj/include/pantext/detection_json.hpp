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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "pantext/error.hpp"
#include "pantext/inference.hpp"

// Detection file layout:
//
//   { "schema": "pantext.detections/1",
//     "image": "<key>", "width": W, "height": H,
//     "detections": [
//       { "quad": [[x, y] x 4], "score": s,
//         "mask": { "proposal": [x1, y1, x2, y2], "size": M,
//                   "threshold": t, "grid": M x M probabilities,
//                   "binary": M x M 0/1 } } ] }
//
// "mask" is optional.

namespace pantext {

inline constexpr const char* kDetectionSchema = "pantext.detections/1";

struct DetectionFile {
  std::string image;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Detection> detections;
};

inline nlohmann::json detections_to_json(const DetectionFile& file, double mask_threshold) {
  using nlohmann::json;
  json dets = json::array();
  for (const Detection& d : file.detections) {
    json quad = json::array();
    for (const Point& p : d.quad.v) quad.push_back({p.x, p.y});
    json jd = {{"quad", quad}, {"score", d.score}};
    if (d.mask) {
      const MaskOutput& m = *d.mask;
      json grid = json::array();
      json binary = json::array();
      for (std::size_t y = 0; y < m.size; ++y) {
        json row = json::array();
        json brow = json::array();
        for (std::size_t x = 0; x < m.size; ++x) {
          const double p = m.probs[y * m.size + x];
          row.push_back(p);
          brow.push_back(p >= mask_threshold ? 1 : 0);
        }
        grid.push_back(std::move(row));
        binary.push_back(std::move(brow));
      }
      jd["mask"] = {{"proposal", {m.proposal.x1, m.proposal.y1, m.proposal.x2, m.proposal.y2}},
                    {"size", m.size},
                    {"threshold", mask_threshold},
                    {"grid", std::move(grid)},
                    {"binary", std::move(binary)}};
    }
    dets.push_back(std::move(jd));
  }
  return {{"schema", kDetectionSchema},
          {"image", file.image},
          {"width", file.width},
          {"height", file.height},
          {"detections", std::move(dets)}};
}

inline std::string serialize_detections(const DetectionFile& file, double mask_threshold) {
  return detections_to_json(file, mask_threshold).dump(1) + "\n";
}

inline DetectionFile parse_detections(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("detections: invalid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("schema", "") != kDetectionSchema) {
      throw FormatError(std::string("detections: missing or unsupported schema tag (expected \"") +
                        kDetectionSchema + "\")");
    }
    DetectionFile f;
    f.image = j.at("image").get<std::string>();
    f.width = j.value("width", std::size_t{0});
    f.height = j.value("height", std::size_t{0});
    for (const json& jd : j.at("detections")) {
      Detection d;
      const json& quad = jd.at("quad");
      if (!quad.is_array() || quad.size() != 4) throw FormatError("detections: quad needs 4 points");
      for (std::size_t v = 0; v < 4; ++v) {
        if (!quad[v].is_array() || quad[v].size() != 2) {
          throw FormatError("detections: quad points must be [x, y]");
        }
        d.quad[v] = {quad[v][0].get<double>(), quad[v][1].get<double>()};
      }
      d.score = jd.at("score").get<double>();
      if (jd.contains("mask")) {
        const json& jm = jd.at("mask");
        MaskOutput m;
        const json& pr = jm.at("proposal");
        m.proposal = {pr.at(0).get<double>(), pr.at(1).get<double>(), pr.at(2).get<double>(),
                      pr.at(3).get<double>()};
        m.size = jm.at("size").get<std::size_t>();
        for (const json& row : jm.at("grid")) {
          for (const json& v : row) m.probs.push_back(v.get<double>());
        }
        if (m.probs.size() != m.size * m.size) throw FormatError("detections: mask grid size mismatch");
        d.mask = std::move(m);
      }
      f.detections.push_back(std::move(d));
    }
    return f;
  } catch (const json::exception& e) {
    throw FormatError(std::string("detections: ") + e.what());
  }
}

// Image key for a ground-truth file: the file stem without a "gt_" prefix.
inline std::string gt_key_from_path(const std::filesystem::path& p) {
  std::string stem = p.stem().string();
  if (stem.rfind("gt_", 0) == 0) stem = stem.substr(3);
  return stem;
}

// Image key for an image path: the file stem.
inline std::string image_key_from_path(const std::filesystem::path& p) { return p.stem().string(); }

}  // namespace pantext
