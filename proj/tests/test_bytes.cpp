#include <gtest/gtest.h>

#include "gridledger/bytes.hpp"

using namespace gridledger;

TEST(Hex, RoundTrip) {
  const Bytes data{0x00, 0x01, 0x7f, 0x80, 0xff};
  EXPECT_EQ(to_hex(data), "00017f80ff");
  EXPECT_EQ(from_hex("00017f80ff"), data);
  EXPECT_EQ(from_hex("00017F80FF"), data);
}

TEST(Hex, RejectsOddLengthAndBadCharacters) {
  EXPECT_THROW(from_hex("abc"), std::invalid_argument);
  EXPECT_THROW(from_hex("zz"), std::invalid_argument);
  EXPECT_THROW(array_from_hex<4>("0011"), std::invalid_argument);
}

TEST(ByteWriter, BigEndianLayout) {
  ByteWriter w;
  w.u32(0x01020304);
  w.u64(0x0a0b0c0d0e0f1011ULL);
  w.field(std::string_view("hi"));
  EXPECT_EQ(to_hex(w.bytes()), "010203040a0b0c0d0e0f101100000002" "6869");
}

TEST(ByteReader, ReadsBackWhatWasWritten) {
  ByteWriter w;
  w.u8(7);
  w.u32(42);
  w.u64(1ULL << 40);
  w.field(std::string_view("grid"));
  const Bytes buf = std::move(w).take();
  ByteReader r(buf);
  EXPECT_EQ(r.u8(), 7);
  EXPECT_EQ(r.u32(), 42u);
  EXPECT_EQ(r.u64(), 1ULL << 40);
  const auto f = r.field(16);
  EXPECT_EQ(std::string(f.begin(), f.end()), "grid");
  EXPECT_NO_THROW(r.finish());
}

TEST(ByteReader, TruncationAndTrailingBytesAreErrors) {
  const Bytes short_buf{0x00, 0x00};
  ByteReader a(short_buf);
  EXPECT_THROW(a.u32(), DecodeError);

  const Bytes extra{0x00, 0x00, 0x00, 0x01, 0xff};
  ByteReader b(extra);
  EXPECT_EQ(b.u32(), 1u);
  EXPECT_THROW(b.finish(), DecodeError);
}

TEST(ByteReader, FieldLengthBoundIsEnforced) {
  ByteWriter w;
  w.field(std::string_view("toolong"));
  const Bytes buf = std::move(w).take();
  ByteReader r(buf);
  EXPECT_THROW(r.field(3), DecodeError);
}

TEST(ByteReader, LengthPrefixPastEndIsAnError) {
  const Bytes buf{0x00, 0x00, 0x00, 0x09, 0x01};
  ByteReader r(buf);
  EXPECT_THROW(r.field(100), DecodeError);
}
