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

#include <bit>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pantext/error.hpp"
#include "pantext/io.hpp"
#include "pantext/network.hpp"

// Binary weights container, all integers little-endian:
//
//   "PANW"  u16 version
//   repeated until end of file:
//     u16 name_length, name bytes (UTF-8)
//     u8 rank, u32 dims[rank]
//     f64 payload[prod(dims)]
//
// Each convolution is stored as "<layer>.weight" (rank 4) and "<layer>.bias"
// (rank 1). Metadata records: "meta.channels" [1], "meta.ctx_channels" [1],
// "meta.seed" [2] holding the high and low 32 bits of the seed.

namespace pantext {

inline constexpr std::uint16_t kWeightsVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(const std::string& s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  const std::string& bytes() const { return bytes_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  bool done() const { return pos_ >= bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError("weights: truncated file at byte offset " + std::to_string(pos_));
    }
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

inline void write_record(ByteWriter& out, const std::string& name,
                         const std::vector<std::uint32_t>& dims, std::span<const double> payload) {
  out.u16(static_cast<std::uint16_t>(name.size()));
  out.raw(name);
  out.u8(static_cast<std::uint8_t>(dims.size()));
  for (std::uint32_t d : dims) out.u32(d);
  for (double v : payload) out.f64(v);
}

}  // namespace detail

inline std::string serialize_weights(const ModelWeights& w) {
  detail::ByteWriter out;
  out.raw("PANW");
  out.u16(kWeightsVersion);
  const NetworkConfig& cfg = w.config();
  const double channels = static_cast<double>(cfg.channels);
  const double ctx = static_cast<double>(cfg.ctx_channels);
  const double seed[2] = {static_cast<double>(w.seed() >> 32),
                          static_cast<double>(w.seed() & 0xFFFFFFFFull)};
  detail::write_record(out, "meta.channels", {1}, std::span<const double>(&channels, 1));
  detail::write_record(out, "meta.ctx_channels", {1}, std::span<const double>(&ctx, 1));
  detail::write_record(out, "meta.seed", {2}, std::span<const double>(seed, 2));
  for (const LayerSpec& s : layer_specs(cfg)) {
    const ConvParams& p = w.at(s.name);
    const Shape& sh = p.weights.shape();
    detail::write_record(out, s.name + ".weight",
                         {static_cast<std::uint32_t>(sh.n), static_cast<std::uint32_t>(sh.c),
                          static_cast<std::uint32_t>(sh.h), static_cast<std::uint32_t>(sh.w)},
                         p.weights.data());
    detail::write_record(out, s.name + ".bias", {static_cast<std::uint32_t>(p.bias.size())},
                         p.bias);
  }
  return out.bytes();
}

inline ModelWeights deserialize_weights(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (in.raw(4) != "PANW") throw FormatError("weights: bad magic, expected \"PANW\"");
  const std::uint16_t version = in.u16();
  if (version != kWeightsVersion) {
    throw FormatError("weights: unsupported version " + std::to_string(version));
  }
  struct Record {
    std::vector<std::uint32_t> dims;
    std::vector<double> payload;
  };
  std::map<std::string, Record> records;
  while (!in.done()) {
    const std::uint16_t name_len = in.u16();
    std::string name = in.raw(name_len);
    Record r;
    const std::uint8_t rank = in.u8();
    std::uint64_t count = 1;
    for (std::uint8_t i = 0; i < rank; ++i) r.dims.push_back(in.u32());
    const std::uint64_t limit = in.remaining() / 8;
    for (std::uint32_t d : r.dims) {
      if (d != 0 && count > limit / d) {
        throw FormatError("weights: record '" + name + "' exceeds the remaining file size");
      }
      count *= d;
    }
    r.payload.resize(static_cast<std::size_t>(count));
    for (double& v : r.payload) v = in.f64();
    if (!records.emplace(name, std::move(r)).second) {
      throw FormatError("weights: duplicate record '" + name + "'");
    }
  }

  auto take = [&](const std::string& name) {
    auto it = records.find(name);
    if (it == records.end()) throw ValidationError("weights: missing record '" + name + "'");
    Record r = std::move(it->second);
    records.erase(it);
    return r;
  };
  auto scalar = [&](const std::string& name) {
    Record r = take(name);
    if (r.payload.size() != 1) throw ValidationError("weights: '" + name + "' must hold one value");
    return r.payload[0];
  };

  NetworkConfig cfg;
  cfg.channels = static_cast<std::size_t>(scalar("meta.channels"));
  cfg.ctx_channels = static_cast<std::size_t>(scalar("meta.ctx_channels"));
  if (cfg.channels == 0 || cfg.ctx_channels == 0 || cfg.channels > 4096 ||
      cfg.ctx_channels > 4096) {
    throw ValidationError("weights: channel counts must lie in [1, 4096]");
  }
  const Record seed = take("meta.seed");
  if (seed.payload.size() != 2) throw ValidationError("weights: 'meta.seed' must hold two values");
  const std::uint64_t seed_value = (static_cast<std::uint64_t>(seed.payload[0]) << 32) |
                                   static_cast<std::uint64_t>(seed.payload[1]);

  ModelWeights w(cfg, seed_value);
  for (const LayerSpec& s : layer_specs(cfg)) {
    Record wr = take(s.name + ".weight");
    Record br = take(s.name + ".bias");
    if (wr.dims.size() != 4) throw ValidationError("weights: '" + s.name + ".weight' must be rank 4");
    if (br.dims.size() != 1) throw ValidationError("weights: '" + s.name + ".bias' must be rank 1");
    ConvParams p = ConvParams::zeros(s.out_ch, s.in_ch, s.kernel, s.dilation);
    const Shape got{wr.dims[0], wr.dims[1], wr.dims[2], wr.dims[3]};
    if (got != p.weights.shape()) {
      throw ValidationError("weights: layer '" + s.name + "' has shape " + got.str() +
                            ", expected " + p.weights.shape().str());
    }
    p.weights = Tensor(got, std::move(wr.payload));
    p.bias = std::move(br.payload);
    w.set(s.name, std::move(p));
  }
  if (!records.empty()) {
    throw ValidationError("weights: unexpected record '" + records.begin()->first + "'");
  }
  w.validate();
  return w;
}

inline void save_weights(const ModelWeights& w, const std::string& path) {
  write_file_bytes(path, serialize_weights(w));
}

inline ModelWeights load_weights(const std::string& path) {
  return deserialize_weights(read_file_bytes(path));
}

}  // namespace pantext
