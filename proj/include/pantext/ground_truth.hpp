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
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "pantext/error.hpp"
#include "pantext/geometry.hpp"

namespace pantext {

struct GtInstance {
  // 4 vertices (ICDAR) or 14 (CTW1500), in file order.
  std::vector<Point> polygon;
  std::string text;
  bool ignore = false;
};

struct GroundTruth {
  std::vector<GtInstance> instances;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Splits into lines, dropping a UTF-8 BOM and trailing CR.
inline std::vector<std::string_view> split_lines(std::string_view bytes) {
  if (bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
  std::vector<std::string_view> lines;
  while (!bytes.empty()) {
    const auto nl = bytes.find('\n');
    std::string_view line = bytes.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    bytes.remove_prefix(nl + 1);
  }
  return lines;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && std::isfinite(out);
}

inline bool parse_int(std::string_view s, long long& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// The first `n` comma-separated fields, plus everything after the n-th comma
// (which may itself contain commas) when at least n commas are present.
struct SplitFields {
  std::vector<std::string_view> fields;
  std::string_view rest;
  bool has_rest = false;
};

inline SplitFields split_fields(std::string_view line, std::size_t n) {
  SplitFields r;
  while (r.fields.size() < n) {
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      r.fields.push_back(line);
      return r;
    }
    r.fields.push_back(line.substr(0, comma));
    line.remove_prefix(comma + 1);
  }
  r.rest = line;
  r.has_rest = true;
  return r;
}

inline bool is_dont_care(std::string_view text) { return trim(text) == "###"; }

}  // namespace detail

// ICDAR 2015/2017 word annotations: "x1,y1,x2,y2,x3,y3,x4,y4,transcription".
// A "###" transcription marks a don't-care region. Blank lines are skipped.
inline GroundTruth parse_icdar_gt(std::string_view bytes) {
  GroundTruth gt;
  const auto lines = detail::split_lines(bytes);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (detail::trim(lines[ln]).empty()) continue;
    const detail::SplitFields f = detail::split_fields(lines[ln], 8);
    if (!f.has_rest) {
      throw FormatError("expected 8 coordinates followed by a transcription, found " +
                            std::to_string(f.fields.size()) + " field(s)",
                        ln + 1);
    }
    GtInstance inst;
    for (std::size_t i = 0; i < 4; ++i) {
      double x = 0.0;
      double y = 0.0;
      if (!detail::parse_double(f.fields[2 * i], x)) {
        throw FormatError("non-numeric coordinate '" + std::string(f.fields[2 * i]) + "'", ln + 1);
      }
      if (!detail::parse_double(f.fields[2 * i + 1], y)) {
        throw FormatError("non-numeric coordinate '" + std::string(f.fields[2 * i + 1]) + "'",
                          ln + 1);
      }
      inst.polygon.push_back({x, y});
    }
    inst.text = std::string(f.rest);
    inst.ignore = detail::is_dont_care(f.rest);
    gt.instances.push_back(std::move(inst));
  }
  return gt;
}

// SCUT-CTW1500 line annotations: 28 integers (14 points) and optional text.
inline GroundTruth parse_ctw_gt(std::string_view bytes) {
  constexpr std::size_t kValues = 28;
  GroundTruth gt;
  const auto lines = detail::split_lines(bytes);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (detail::trim(lines[ln]).empty()) continue;
    const detail::SplitFields f = detail::split_fields(lines[ln], kValues);
    GtInstance inst;
    long long vals[kValues] = {};
    for (std::size_t i = 0; i < f.fields.size(); ++i) {
      if (!detail::parse_int(f.fields[i], vals[i])) {
        throw FormatError("expected 28 integer coordinates, field " + std::to_string(i + 1) +
                              " is '" + std::string(f.fields[i]) + "'",
                          ln + 1);
      }
    }
    if (f.fields.size() < kValues) {
      throw FormatError("expected 28 integer coordinates, found " +
                            std::to_string(f.fields.size()),
                        ln + 1);
    }
    for (std::size_t i = 0; i < 14; ++i) {
      inst.polygon.push_back({static_cast<double>(vals[2 * i]), static_cast<double>(vals[2 * i + 1])});
    }
    if (f.has_rest) {
      inst.text = std::string(f.rest);
      inst.ignore = detail::is_dont_care(f.rest);
    }
    gt.instances.push_back(std::move(inst));
  }
  return gt;
}

// Quad used for overlap tests: the polygon itself for 4-point annotations,
// the axis-aligned bounding quad otherwise.
inline Quad evaluation_quad(const GtInstance& inst) {
  if (inst.polygon.size() == 4) {
    return Quad{{inst.polygon[0], inst.polygon[1], inst.polygon[2], inst.polygon[3]}};
  }
  if (inst.polygon.empty()) throw GeometryError("ground truth instance has no points");
  AxisRect r{inst.polygon[0].x, inst.polygon[0].y, inst.polygon[0].x, inst.polygon[0].y};
  for (const Point& p : inst.polygon) {
    r.x1 = std::min(r.x1, p.x);
    r.y1 = std::min(r.y1, p.y);
    r.x2 = std::max(r.x2, p.x);
    r.y2 = std::max(r.y2, p.y);
  }
  return Quad::from_rect(r);
}

}  // namespace pantext
