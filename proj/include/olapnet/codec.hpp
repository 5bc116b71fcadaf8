/*
 * Copyright 2026 The olapnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file codec.hpp
 * @brief Compression of communicated key sets and bitsets.
 *
 * Sorted id sets are delta coded (first id raw, then gaps) with LEB128
 * varints. Bitsets travel either raw or as the delta-coded set of their one
 * positions, whichever is smaller. Unsorted payloads can be passed through a
 * pluggable byte compressor.
 *
 * Every self-describing encoded form starts with one header byte:
 *   0 = raw bitset, 1 = sparse positions, 2 = pass-through bytes,
 *   3 = compressed bytes.
 */

#pragma once

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "olapnet/error.hpp"
#include "olapnet/wire.hpp"

namespace olapnet::codec {

enum class FormTag : std::uint8_t { RawBitset = 0, SparseBitset = 1, PassThrough = 2, Compressed = 3 };

/// Dense bit vector. Bit i lives in word i / 64.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t length) : length_(length), words_((length + 63) / 64, 0) {}

  std::size_t size() const { return length_; }

  bool test(std::size_t i) const {
    check(i);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }

  void set(std::size_t i, bool v = true) {
    check(i);
    if (v)
      words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    else
      words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  /// Positions of the one bits, ascending.
  std::vector<std::uint64_t> positions() const {
    std::vector<std::uint64_t> out;
    out.reserve(count());
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t word = words_[w];
      while (word != 0) {
        out.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(word)));
        word &= word - 1;
      }
    }
    return out;
  }

  /// Appends other's bits after this bitset's last bit.
  void append(const Bitset& other) {
    std::size_t base = length_;
    resize(length_ + other.length_);
    for (auto p : other.positions()) set(base + p);
  }

  void resize(std::size_t length) {
    length_ = length;
    words_.resize((length + 63) / 64, 0);
    if (length_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (length_ % 64)) - 1;
  }

  std::span<const std::uint64_t> words() const { return words_; }

  friend bool operator==(const Bitset& a, const Bitset& b) {
    return a.length_ == b.length_ && a.words_ == b.words_;
  }

 private:
  void check(std::size_t i) const {
    if (i >= length_)
      throw InvalidArgument("bit " + std::to_string(i) + " out of range for bitset of length " +
                            std::to_string(length_));
  }

  std::size_t length_ = 0;
  std::vector<std::uint64_t> words_;
};

struct VarIntBlock {
  Bytes bytes;
  std::size_t count = 0;
};

/// Appends the delta-varint stream of ids to w. ids must be strictly increasing.
inline void append_delta_varint(ByteWriter& w, std::span<const std::uint64_t> ids) {
  std::uint64_t prev = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0 && ids[i] <= prev) throw InvalidArgument("delta_varint_encode: ids not strictly increasing");
    w.put_varint(i == 0 ? ids[i] : ids[i] - prev);
    prev = ids[i];
  }
}

inline VarIntBlock delta_varint_encode(std::span<const std::uint64_t> ids) {
  ByteWriter w;
  append_delta_varint(w, ids);
  return VarIntBlock{w.take(), ids.size()};
}

inline VarIntBlock delta_varint_encode(std::span<const std::int64_t> ids) {
  std::vector<std::uint64_t> u;
  u.reserve(ids.size());
  for (auto v : ids) {
    if (v < 0) throw InvalidArgument("delta_varint_encode: negative id");
    u.push_back(static_cast<std::uint64_t>(v));
  }
  return delta_varint_encode(std::span<const std::uint64_t>(u));
}

/// Decodes a delta-varint stream that runs to the end of r.
inline std::vector<std::uint64_t> read_delta_varint(ByteReader& r) {
  std::vector<std::uint64_t> out;
  std::uint64_t acc = 0;
  while (!r.empty()) {
    std::uint64_t d = r.get_varint();
    if (!out.empty()) {
      if (d == 0) throw DecodeError("delta stream contains a zero gap");
      if (acc + d < acc) throw DecodeError("delta stream overflows");
      acc += d;
    } else {
      acc = d;
    }
    out.push_back(acc);
  }
  return out;
}

inline std::vector<std::uint64_t> delta_varint_decode(const VarIntBlock& block) {
  ByteReader r(block.bytes);
  auto out = read_delta_varint(r);
  if (out.size() != block.count)
    throw DecodeError("delta block holds " + std::to_string(out.size()) + " ids, header says " +
                      std::to_string(block.count));
  return out;
}

inline std::size_t raw_bitset_bytes(std::size_t length) { return (length + 7) / 8; }

/// Self-describing bitset encoding; picks the smaller of raw bits and sparse positions.
inline Bytes bitset_encode(const Bitset& b) {
  auto positions = b.positions();
  ByteWriter sparse;
  sparse.put_u8(static_cast<std::uint8_t>(FormTag::SparseBitset));
  sparse.put_varint(b.size());
  append_delta_varint(sparse, positions);

  ByteWriter length_probe;
  length_probe.put_varint(b.size());
  std::size_t raw_size = 1 + length_probe.size() + raw_bitset_bytes(b.size());
  if (sparse.size() <= raw_size) return sparse.take();

  ByteWriter raw;
  raw.put_u8(static_cast<std::uint8_t>(FormTag::RawBitset));
  raw.put_varint(b.size());
  auto words = b.words();
  for (std::size_t i = 0; i < raw_bitset_bytes(b.size()); ++i)
    raw.put_u8(static_cast<std::uint8_t>(words[i / 8] >> (8 * (i % 8))));
  return raw.take();
}

inline Bitset bitset_decode(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  auto tag = r.get_u8();
  auto length = r.get_varint();
  Bitset b(length);
  if (tag == static_cast<std::uint8_t>(FormTag::RawBitset)) {
    auto bytes = r.get_bytes(raw_bitset_bytes(length));
    for (std::size_t i = 0; i < bytes.size(); ++i)
      for (int j = 0; j < 8; ++j)
        if ((bytes[i] >> j) & 1u) {
          if (i * 8 + j >= length) throw DecodeError("raw bitset has bits past its length");
          b.set(i * 8 + j);
        }
    if (!r.empty()) throw DecodeError("trailing bytes after raw bitset");
  } else if (tag == static_cast<std::uint8_t>(FormTag::SparseBitset)) {
    for (auto p : read_delta_varint(r)) {
      if (p >= length) throw DecodeError("sparse bitset position past its length");
      b.set(p);
    }
  } else {
    throw DecodeError("not a bitset form: tag " + std::to_string(tag));
  }
  return b;
}

/// Pluggable general-purpose byte compressor.
class ByteCompressor {
 public:
  virtual ~ByteCompressor() = default;
  virtual std::string name() const = 0;
  virtual Bytes compress(std::span<const std::uint8_t> in) const = 0;
  virtual Bytes decompress(std::span<const std::uint8_t> in) const = 0;
};

class PassThroughCompressor final : public ByteCompressor {
 public:
  std::string name() const override { return "none"; }
  Bytes compress(std::span<const std::uint8_t> in) const override { return Bytes(in.begin(), in.end()); }
  Bytes decompress(std::span<const std::uint8_t> in) const override { return Bytes(in.begin(), in.end()); }
};

/// zlib deflate. Output is [u64 original size][deflate stream]; empty maps to empty.
class DeflateCompressor final : public ByteCompressor {
 public:
  explicit DeflateCompressor(int level = Z_BEST_SPEED) : level_(level) {}

  std::string name() const override { return "deflate"; }

  Bytes compress(std::span<const std::uint8_t> in) const override {
    if (in.empty()) return {};
    uLongf bound = compressBound(static_cast<uLong>(in.size()));
    ByteWriter w;
    w.put_u64(in.size());
    Bytes out = w.take();
    std::size_t head = out.size();
    out.resize(head + bound);
    int rc = compress2(out.data() + head, &bound, in.data(), static_cast<uLong>(in.size()), level_);
    if (rc != Z_OK) throw std::runtime_error("deflate failed with code " + std::to_string(rc));
    out.resize(head + bound);
    return out;
  }

  Bytes decompress(std::span<const std::uint8_t> in) const override {
    if (in.empty()) return {};
    ByteReader r(in);
    auto n = r.get_u64();
    if (n > (std::uint64_t{1} << 36)) throw DecodeError("deflate: implausible original size");
    auto body = r.rest();
    Bytes out(n);
    uLongf got = static_cast<uLongf>(n);
    int rc = uncompress(out.data(), &got, body.data(), static_cast<uLong>(body.size()));
    if (rc != Z_OK || got != n) throw DecodeError("deflate: corrupt input");
    return out;
  }

 private:
  int level_;
};

inline std::shared_ptr<const ByteCompressor> make_compressor(const std::string& name) {
  if (name == "none" || name.empty()) return std::make_shared<PassThroughCompressor>();
  if (name == "deflate") return std::make_shared<DeflateCompressor>();
  throw InvalidArgument("unknown compressor '" + name + "'");
}

/// Wraps bytes with header 2 (pass-through) or 3 (compressed) depending on the compressor.
inline Bytes frame_bytes(const ByteCompressor& c, std::span<const std::uint8_t> in) {
  bool passthrough = dynamic_cast<const PassThroughCompressor*>(&c) != nullptr;
  ByteWriter w;
  w.put_u8(static_cast<std::uint8_t>(passthrough ? FormTag::PassThrough : FormTag::Compressed));
  if (passthrough)
    w.put_bytes(in);
  else
    w.put_bytes(c.compress(in));
  return w.take();
}

inline Bytes unframe_bytes(const ByteCompressor& c, std::span<const std::uint8_t> in) {
  ByteReader r(in);
  auto tag = r.get_u8();
  auto body = r.rest();
  if (tag == static_cast<std::uint8_t>(FormTag::PassThrough)) return Bytes(body.begin(), body.end());
  if (tag == static_cast<std::uint8_t>(FormTag::Compressed)) return c.decompress(body);
  throw DecodeError("not a byte form: tag " + std::to_string(tag));
}

}  // namespace olapnet::codec
