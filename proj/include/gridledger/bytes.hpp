#pragma once

// Byte buffers, hex text, and the length-prefixed big-endian encoding shared
// by every canonical wire and on-chain format in the library.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gridledger {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string to_hex(ByteView data);

// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

template <std::size_t N>
std::array<std::uint8_t, N> array_from_hex(std::string_view hex) {
  auto raw = from_hex(hex);
  if (raw.size() != N) {
    throw std::invalid_argument("hex value has " + std::to_string(raw.size()) +
                                " bytes, expected " + std::to_string(N));
  }
  std::array<std::uint8_t, N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void raw(ByteView data) { out_.insert(out_.end(), data.begin(), data.end()); }
  // u32 length followed by the bytes.
  void field(ByteView data);
  void field(std::string_view s) { field(as_bytes(s)); }

  const Bytes& bytes() const& { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  Bytes out_;
};

// Strict reader: every accessor throws DecodeError on truncation, and
// finish() rejects trailing bytes so decode(encode(x)) is the only accepted
// spelling of x.
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  ByteView raw(std::size_t n);
  ByteView field(std::size_t max_len);
  template <std::size_t N>
  std::array<std::uint8_t, N> fixed_field() {
    auto view = field(N);
    if (view.size() != N) {
      throw DecodeError("fixed field has wrong length");
    }
    std::array<std::uint8_t, N> out{};
    std::copy(view.begin(), view.end(), out.begin());
    return out;
  }

  bool done() const { return pos_ == data_.size(); }
  void finish() const;

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace gridledger
