/* Copyright 2026-present sfusim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SFU_UTIL_BYTES_HPP
#define SFU_UTIL_BYTES_HPP

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfu {

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

// Big-endian cursor over an immutable buffer. Throws std::out_of_range on
// underrun; protocol parsers translate that into their own error types.
class ByteReader {
 public:
  explicit ByteReader(BytesView data) : data_(data) {}

  size_t remaining() const { return data_.size() - pos_; }
  size_t position() const { return pos_; }
  bool empty() const { return pos_ >= data_.size(); }

  uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  uint16_t u16() {
    need(2);
    uint16_t v = (uint16_t(data_[pos_]) << 8) | data_[pos_ + 1];
    pos_ += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = (uint32_t(data_[pos_]) << 24) | (uint32_t(data_[pos_ + 1]) << 16) |
                 (uint32_t(data_[pos_ + 2]) << 8) | data_[pos_ + 3];
    pos_ += 4;
    return v;
  }
  uint64_t u64() {
    uint64_t hi = u32();
    return (hi << 32) | u32();
  }
  uint8_t peek_u8() const {
    need(1);
    return data_[pos_];
  }
  Bytes take(size_t n) {
    need(n);
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
  }
  void skip(size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  void need(size_t n) const {
    if (pos_ + n > data_.size()) throw std::out_of_range("buffer underrun");
  }
  BytesView data_;
  size_t pos_ = 0;
};

class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) {
    buf_.push_back(uint8_t(v >> 8));
    buf_.push_back(uint8_t(v));
  }
  void u32(uint32_t v) {
    buf_.push_back(uint8_t(v >> 24));
    buf_.push_back(uint8_t(v >> 16));
    buf_.push_back(uint8_t(v >> 8));
    buf_.push_back(uint8_t(v));
  }
  void u64(uint64_t v) {
    u32(uint32_t(v >> 32));
    u32(uint32_t(v));
  }
  void raw(BytesView data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
  void zeros(size_t n) { buf_.insert(buf_.end(), n, 0); }
  // Patches a previously written big-endian u16 in place.
  void patch_u16(size_t offset, uint16_t v) {
    buf_[offset] = uint8_t(v >> 8);
    buf_[offset + 1] = uint8_t(v);
  }
  size_t size() const { return buf_.size(); }
  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

std::string to_hex(BytesView data);
Bytes from_hex(const std::string& hex);

}  // namespace sfu

#endif  // SFU_UTIL_BYTES_HPP
