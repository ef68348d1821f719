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

#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>

#include "pantext/error.hpp"
#include "pantext/ground_truth.hpp"

namespace pantext {

struct PipelineConfig {
  std::size_t top_n = 2000;
  double rpn_nms_iou = 0.7;
  double skewed_nms_iou = 0.3;
  // Detections need a textness score strictly above this before Skewed NMS.
  double score_threshold = 0.5;
  double mask_threshold = 0.5;
  double eval_iou = 0.5;
  // Shorter-side length after resizing; 0 keeps the input size.
  std::size_t test_scale = 1024;
  // Decoded proposals narrower or shorter than this (pixels) are dropped.
  double min_proposal_size = 1.0;
  bool emit_masks = true;
  std::size_t threads = 1;
  std::string weights_path;
  std::uint64_t seed = 42;

  void validate() const {
    auto unit = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError(std::string("config: ") + name + " must lie in [0, 1]");
      }
    };
    unit(rpn_nms_iou, "rpn_nms_iou");
    unit(skewed_nms_iou, "skewed_nms_iou");
    unit(score_threshold, "score_threshold");
    unit(mask_threshold, "mask_threshold");
    unit(eval_iou, "eval_iou");
    if (!(min_proposal_size >= 0.0)) throw ValidationError("config: min_proposal_size must be >= 0");
    if (threads == 0) throw ValidationError("config: threads must be >= 1");
  }
};

namespace detail {

inline double config_double(std::string_view key, std::string_view v, std::size_t line) {
  double out = 0.0;
  if (!parse_double(v, out)) {
    throw FormatError("config key '" + std::string(key) + "': expected a number, got '" +
                          std::string(v) + "'",
                      line);
  }
  return out;
}

inline std::uint64_t config_uint(std::string_view key, std::string_view v, std::size_t line) {
  long long out = 0;
  if (!parse_int(v, out) || out < 0) {
    throw FormatError("config key '" + std::string(key) + "': expected a non-negative integer, got '" +
                          std::string(v) + "'",
                      line);
  }
  return static_cast<std::uint64_t>(out);
}

inline bool config_bool(std::string_view key, std::string_view v, std::size_t line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw FormatError("config key '" + std::string(key) + "': expected true or false", line);
}

}  // namespace detail

// Flat "key = value" text; '#' starts a comment. Unspecified keys keep
// their defaults, unknown keys are rejected.
inline PipelineConfig parse_config(std::string_view text, PipelineConfig cfg = {}) {
  const auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError("expected key = value", i + 1);
    const std::string_view key = detail::trim(line.substr(0, eq));
    const std::string_view val = detail::trim(line.substr(eq + 1));
    const std::size_t ln = i + 1;
    if (key == "top_n") {
      cfg.top_n = detail::config_uint(key, val, ln);
    } else if (key == "rpn_nms_iou") {
      cfg.rpn_nms_iou = detail::config_double(key, val, ln);
    } else if (key == "skewed_nms_iou") {
      cfg.skewed_nms_iou = detail::config_double(key, val, ln);
    } else if (key == "score_threshold") {
      cfg.score_threshold = detail::config_double(key, val, ln);
    } else if (key == "mask_threshold") {
      cfg.mask_threshold = detail::config_double(key, val, ln);
    } else if (key == "eval_iou") {
      cfg.eval_iou = detail::config_double(key, val, ln);
    } else if (key == "test_scale") {
      cfg.test_scale = detail::config_uint(key, val, ln);
    } else if (key == "min_proposal_size") {
      cfg.min_proposal_size = detail::config_double(key, val, ln);
    } else if (key == "emit_masks") {
      cfg.emit_masks = detail::config_bool(key, val, ln);
    } else if (key == "threads") {
      cfg.threads = detail::config_uint(key, val, ln);
    } else if (key == "weights_path") {
      cfg.weights_path = std::string(val);
    } else if (key == "seed") {
      cfg.seed = detail::config_uint(key, val, ln);
    } else {
      throw ValidationError("line " + std::to_string(ln) + ": unknown config key '" +
                            std::string(key) + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline std::string format_config(const PipelineConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "top_n = " << cfg.top_n << "\n"
     << "rpn_nms_iou = " << cfg.rpn_nms_iou << "\n"
     << "skewed_nms_iou = " << cfg.skewed_nms_iou << "\n"
     << "score_threshold = " << cfg.score_threshold << "\n"
     << "mask_threshold = " << cfg.mask_threshold << "\n"
     << "eval_iou = " << cfg.eval_iou << "\n"
     << "test_scale = " << cfg.test_scale << "\n"
     << "min_proposal_size = " << cfg.min_proposal_size << "\n"
     << "emit_masks = " << (cfg.emit_masks ? "true" : "false") << "\n"
     << "threads = " << cfg.threads << "\n"
     << "weights_path = " << cfg.weights_path << "\n"
     << "seed = " << cfg.seed << "\n";
  return os.str();
}

}  // namespace pantext
