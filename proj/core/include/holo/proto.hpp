#pragma once

// Little-endian wire format for federated updates, global models, response
// commands and acks.
//
// Every frame starts with an 11-byte common header:
//   magic "HAFL" (4) | version u16 | msg_type u8 | body_len u32
// followed by body_len bytes of type-specific body:
//   1 update:  round u32 | client_id u32 | n_samples u32 | param_count u32 | f32 * param_count
//   2 global:  round u32 | param_count u32 | f32 * param_count
//   3 command: user_id u32 | kind u8 | intensity f32 | timestamp_ms u64
//   4 ack:     round u32 | client_id u32 | status u8
// Payloads carry full post-training parameters, not deltas.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "holo/error.hpp"

namespace holo::proto {

inline constexpr std::uint8_t kMagic[4] = {'H', 'A', 'F', 'L'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kCommonHeaderSize = 11;
inline constexpr std::size_t kUpdateHeaderSize = kCommonHeaderSize + 16;
inline constexpr std::size_t kGlobalHeaderSize = kCommonHeaderSize + 8;
inline constexpr std::size_t kCommandFrameSize = kCommonHeaderSize + 17;
inline constexpr std::size_t kAckFrameSize = kCommonHeaderSize + 9;
/// Upper bound on body_len accepted from the wire (256 MiB).
inline constexpr std::uint32_t kMaxBodySize = 256u << 20u;

enum class MsgType : std::uint8_t { Update = 1, Global = 2, Command = 3, Ack = 4 };

struct UpdateMessage {
  std::uint32_t round = 0;
  std::uint32_t client_id = 0;
  std::uint32_t n_samples = 0;
  std::vector<float> params;

  bool operator==(const UpdateMessage&) const = default;
};

struct GlobalModelMessage {
  std::uint32_t round = 0;
  std::vector<float> params;

  bool operator==(const GlobalModelMessage&) const = default;
};

/// kind: 0 Neutral, 1 Smile, 2 SpeakReply, 3 Gaze; intensity in [0, 1].
struct CommandMessage {
  std::uint32_t user_id = 0;
  std::uint8_t kind = 0;
  float intensity = 0.0f;
  std::uint64_t timestamp_ms = 0;

  bool operator==(const CommandMessage&) const = default;
};

enum class AckStatus : std::uint8_t {
  Accepted = 0,
  Duplicate = 1,   // client already reported this round
  LateRound = 2,   // round already closed
  BadLayout = 3,   // parameter count does not match the global model
};

struct AckMessage {
  std::uint32_t round = 0;
  std::uint32_t client_id = 0;
  AckStatus status = AckStatus::Accepted;

  bool operator==(const AckMessage&) const = default;
};

using Message = std::variant<UpdateMessage, GlobalModelMessage, CommandMessage, AckMessage>;

enum class DecodeErrc : std::uint8_t {
  BadMagic,
  UnsupportedVersion,
  UnknownType,
  Truncated,     // fewer bytes than the header or declared body needs
  Overflow,      // declared lengths disagree or exceed kMaxBodySize
  InvalidField,  // out-of-range kind, intensity or ack status
};

std::string_view to_string(DecodeErrc e) noexcept;

class DecodeError : public Error {
 public:
  DecodeError(DecodeErrc errc, const std::string& message);
  DecodeErrc errc() const noexcept { return errc_; }

 private:
  DecodeErrc errc_;
};

struct FrameHeader {
  MsgType type = MsgType::Update;
  std::uint32_t body_len = 0;
};

std::vector<std::uint8_t> encode(const Message& msg);

/// Decodes exactly one frame; trailing bytes are an Overflow error.
Message decode(std::span<const std::uint8_t> frame);

/// Validates the 11-byte common header and returns type and body length.
FrameHeader decode_header(std::span<const std::uint8_t> header);

/// Total frame size for an update carrying `param_count` parameters.
constexpr std::size_t update_frame_size(std::size_t param_count) noexcept {
  return kUpdateHeaderSize + 4 * param_count;
}

}  // namespace holo::proto
