#include <gtest/gtest.h>

#include "holo/proto.hpp"
#include "holo/rng.hpp"
#include "oracles/random_messages.hpp"

using namespace holo::proto;

namespace {

using Bytes = std::vector<std::uint8_t>;

DecodeErrc decode_errc(const Bytes& frame) {
  try {
    decode(frame);
  } catch (const DecodeError& e) {
    return e.errc();
  }
  ADD_FAILURE() << "frame decoded without error";
  return DecodeErrc::InvalidField;
}

void put_u32(Bytes& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace

TEST(Encode, UpdateByteLayout) {
  const Bytes b = encode(UpdateMessage{1, 7, 100, {1.0f}});
  const Bytes expected{'H', 'A', 'F', 'L', 1, 0, 1, 20, 0, 0, 0,
                       1,   0,   0,   0,   7, 0, 0, 0,  100, 0, 0, 0,
                       1,   0,   0,   0,   0x00, 0x00, 0x80, 0x3F};
  EXPECT_EQ(b, expected);
  EXPECT_EQ(kUpdateHeaderSize, 27u);
  EXPECT_EQ(std::get<UpdateMessage>(decode(b)), (UpdateMessage{1, 7, 100, {1.0f}}));
}

TEST(Encode, FixedSizeFrames) {
  EXPECT_EQ(encode(CommandMessage{3, 1, 0.5f, 12345}).size(), kCommandFrameSize);
  EXPECT_EQ(encode(AckMessage{2, 9, AckStatus::Duplicate}).size(), kAckFrameSize);
  EXPECT_EQ(encode(GlobalModelMessage{4, {1.0f, 2.0f}}).size(), kGlobalHeaderSize + 8);
}

TEST(Encode, MillionParameterUpdate) {
  EXPECT_EQ(update_frame_size(1'050'000), 27u + 4'200'000u);
  UpdateMessage m{0, 1, 1, std::vector<float>(1'050'000, 0.25f)};
  const Bytes b = encode(m);
  EXPECT_EQ(b.size(), 27u + 4'200'000u);
  EXPECT_EQ(std::get<UpdateMessage>(decode(b)), m);
}

TEST(Encode, RejectsInvalidCommand) {
  EXPECT_THROW(encode(CommandMessage{1, 4, 0.5f, 0}), holo::Error);
  EXPECT_THROW(encode(CommandMessage{1, 0, 1.5f, 0}), holo::Error);
}

TEST(Decode, TruncatedFrame) {
  Bytes b = encode(UpdateMessage{1, 7, 100, {1.0f, 2.0f}});
  b.pop_back();
  EXPECT_EQ(decode_errc(b), DecodeErrc::Truncated);
  EXPECT_EQ(decode_errc(Bytes(b.begin(), b.begin() + 5)), DecodeErrc::Truncated);
}

TEST(Decode, DistinctErrors) {
  const Bytes good = encode(UpdateMessage{1, 7, 100, {1.0f, 2.0f}});

  Bytes magic = good;
  magic[0] = 'X';
  EXPECT_EQ(decode_errc(magic), DecodeErrc::BadMagic);

  Bytes version = good;
  version[4] = 2;
  EXPECT_EQ(decode_errc(version), DecodeErrc::UnsupportedVersion);

  Bytes type = good;
  type[6] = 9;
  EXPECT_EQ(decode_errc(type), DecodeErrc::UnknownType);

  Bytes count = good;
  put_u32(count, 23, 3);  // param_count disagrees with body_len
  EXPECT_EQ(decode_errc(count), DecodeErrc::Overflow);

  Bytes trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(decode_errc(trailing), DecodeErrc::Overflow);

  Bytes huge = good;
  put_u32(huge, 7, kMaxBodySize + 1);
  EXPECT_EQ(decode_errc(huge), DecodeErrc::Overflow);

  Bytes kind = encode(CommandMessage{1, 2, 0.5f, 7});
  kind[15] = 7;
  EXPECT_EQ(decode_errc(kind), DecodeErrc::InvalidField);
}

TEST(Decode, ErrorCodesAreModuleQualified) {
  Bytes b = encode(AckMessage{1, 1, AckStatus::Accepted});
  b[1] = 'Z';
  try {
    decode(b);
    FAIL();
  } catch (const holo::Error& e) {
    EXPECT_EQ(e.code(), "proto.bad_magic");
  }
}

TEST(Decode, HeaderOnly) {
  const Bytes b = encode(GlobalModelMessage{5, {1.0f, 2.0f, 3.0f}});
  const FrameHeader h = decode_header(std::span(b).first(kCommonHeaderSize));
  EXPECT_EQ(h.type, MsgType::Global);
  EXPECT_EQ(h.body_len, b.size() - kCommonHeaderSize);
}

TEST(RoundTrip, ThousandRandomMessages) {
  EXPECT_EQ(oracle::round_trip_failures(1000, 42), 0);
}
