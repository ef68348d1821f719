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

#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pantext/error.hpp"
#include "pantext/tensor.hpp"
#include "pantext/io.hpp"

namespace pantext {

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB, row-major
};

namespace detail {

inline void skip_ppm_space(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
}

inline std::size_t read_ppm_int(std::string_view bytes, std::size_t& pos, const char* what) {
  skip_ppm_space(bytes, pos);
  std::size_t v = 0;
  const std::size_t start = pos;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
    if (v > (1u << 20)) throw FormatError(std::string("PPM: ") + what + " too large");
    ++pos;
  }
  if (pos == start) throw FormatError(std::string("PPM: missing ") + what);
  return v;
}

}  // namespace detail

// Binary PPM (P6) with maxval <= 255.
inline RgbImage decode_ppm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    std::string magic;
    for (std::size_t i = 0; i < std::min<std::size_t>(2, bytes.size()); ++i) {
      const auto c = static_cast<unsigned char>(bytes[i]);
      if (std::isprint(c)) {
        magic += static_cast<char>(c);
      } else {
        static const char* hex = "0123456789abcdef";
        magic += "\\x";
        magic += hex[c >> 4];
        magic += hex[c & 15];
      }
    }
    throw FormatError("unsupported image format (magic bytes \"" + magic +
                      "\"); only binary PPM (P6) is supported");
  }
  std::size_t pos = 2;
  RgbImage img;
  img.width = detail::read_ppm_int(bytes, pos, "width");
  img.height = detail::read_ppm_int(bytes, pos, "height");
  const std::size_t maxval = detail::read_ppm_int(bytes, pos, "maxval");
  if (img.width == 0 || img.height == 0) throw FormatError("PPM: empty image");
  if (maxval == 0 || maxval > 255) throw FormatError("PPM: only 8-bit maxval (1..255) is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("PPM: missing whitespace before pixel data");
  }
  ++pos;
  const std::size_t n = img.width * img.height * 3;
  if (bytes.size() - pos < n) throw FormatError("PPM: truncated pixel data");
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = static_cast<std::size_t>(static_cast<unsigned char>(bytes[pos + i]));
    img.pixels[i] = static_cast<std::uint8_t>(maxval == 255 ? v : (v * 255 + maxval / 2) / maxval);
  }
  return img;
}

inline std::string encode_ppm(const RgbImage& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

inline RgbImage load_ppm(const std::string& path) { return decode_ppm(read_file_bytes(path)); }

// (1, 3, H, W) tensor scaled to [0, 1].
inline Tensor image_to_tensor(const RgbImage& img) {
  Tensor t(Shape{1, 3, img.height, img.width});
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        t.at(0, c, y, x) = img.pixels[(y * img.width + x) * 3 + c] / 255.0;
      }
    }
  }
  return t;
}

// Network input plus the bookkeeping needed to map results back.
struct PreparedImage {
  Tensor tensor;                 // padded to multiples of 16
  double scale = 1.0;            // resized = original * scale
  std::size_t original_width = 0;
  std::size_t original_height = 0;
  std::size_t resized_width = 0;
  std::size_t resized_height = 0;
  std::size_t pad_right = 0;
  std::size_t pad_bottom = 0;
};

// Resizes so the shorter side equals `test_scale` (0 keeps the original
// size), then zero-pads right/bottom to multiples of 16.
inline PreparedImage prepare_image(const RgbImage& img, std::size_t test_scale) {
  if (img.width == 0 || img.height == 0) throw ValidationError("prepare_image: empty image");
  PreparedImage p;
  p.original_width = img.width;
  p.original_height = img.height;
  Tensor t = image_to_tensor(img);
  const std::size_t shorter = std::min(img.width, img.height);
  if (test_scale != 0 && test_scale != shorter) {
    p.scale = static_cast<double>(test_scale) / static_cast<double>(shorter);
    const auto rh = static_cast<std::size_t>(std::llround(static_cast<double>(img.height) * p.scale));
    const auto rw = static_cast<std::size_t>(std::llround(static_cast<double>(img.width) * p.scale));
    t = bilinear_resize(t, std::max<std::size_t>(rh, 1), std::max<std::size_t>(rw, 1));
  }
  p.resized_height = t.height();
  p.resized_width = t.width();
  const std::size_t ph = (p.resized_height + 15) / 16 * 16;
  const std::size_t pw = (p.resized_width + 15) / 16 * 16;
  p.pad_bottom = ph - p.resized_height;
  p.pad_right = pw - p.resized_width;
  if (p.pad_bottom == 0 && p.pad_right == 0) {
    p.tensor = std::move(t);
    return p;
  }
  p.tensor = Tensor(Shape{1, 3, ph, pw});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < p.resized_height; ++y) {
      for (std::size_t x = 0; x < p.resized_width; ++x) p.tensor.at(0, c, y, x) = t.at(0, c, y, x);
    }
  }
  return p;
}

}  // namespace pantext
