#include "holo/proto.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace holo::proto {

std::string_view to_string(DecodeErrc e) noexcept {
  switch (e) {
    case DecodeErrc::BadMagic: return "bad_magic";
    case DecodeErrc::UnsupportedVersion: return "unsupported_version";
    case DecodeErrc::UnknownType: return "unknown_type";
    case DecodeErrc::Truncated: return "truncated";
    case DecodeErrc::Overflow: return "overflow";
    case DecodeErrc::InvalidField: return "invalid_field";
  }
  return "unknown";
}

DecodeError::DecodeError(DecodeErrc errc, const std::string& message)
    : Error("proto." + std::string(to_string(errc)), message), errc_(errc) {}

namespace {

class Writer {
 public:
  explicit Writer(std::size_t reserve) { buf_.reserve(reserve); }

  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

  std::vector<std::uint8_t> finish() { return std::move(buf_); }

 private:
  void put(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  std::uint64_t get(std::size_t bytes) {
    if (remaining() < bytes) throw DecodeError(DecodeErrc::Truncated, "frame ends early");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bytes; ++i) {
      v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += bytes;
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void header(Writer& w, MsgType type, std::size_t body_len) {
  if (body_len > kMaxBodySize) throw Error("proto.too_large", "message body too large");
  for (auto b : kMagic) w.u8(b);
  w.u16(kVersion);
  w.u8(static_cast<std::uint8_t>(type));
  w.u32(static_cast<std::uint32_t>(body_len));
}

void check_command(std::uint8_t kind, float intensity) {
  if (kind > 3) throw DecodeError(DecodeErrc::InvalidField, "command kind out of range");
  if (!(intensity >= 0.0f && intensity <= 1.0f)) {
    throw DecodeError(DecodeErrc::InvalidField, "command intensity outside [0,1]");
  }
}

std::vector<float> read_params(Reader& r, std::uint32_t count) {
  if (static_cast<std::uint64_t>(count) * 4 != r.remaining()) {
    if (static_cast<std::uint64_t>(count) * 4 > r.remaining()) {
      throw DecodeError(DecodeErrc::Overflow, "param_count exceeds the declared body");
    }
    throw DecodeError(DecodeErrc::Overflow, "bytes left over after the payload");
  }
  std::vector<float> p(count);
  for (auto& v : p) v = r.f32();
  return p;
}

}  // namespace

std::vector<std::uint8_t> encode(const Message& msg) {
  return std::visit(
      [](const auto& m) -> std::vector<std::uint8_t> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UpdateMessage>) {
          Writer w(update_frame_size(m.params.size()));
          header(w, MsgType::Update, 16 + 4 * m.params.size());
          w.u32(m.round);
          w.u32(m.client_id);
          w.u32(m.n_samples);
          w.u32(static_cast<std::uint32_t>(m.params.size()));
          for (float v : m.params) w.f32(v);
          return w.finish();
        } else if constexpr (std::is_same_v<T, GlobalModelMessage>) {
          Writer w(kGlobalHeaderSize + 4 * m.params.size());
          header(w, MsgType::Global, 8 + 4 * m.params.size());
          w.u32(m.round);
          w.u32(static_cast<std::uint32_t>(m.params.size()));
          for (float v : m.params) w.f32(v);
          return w.finish();
        } else if constexpr (std::is_same_v<T, CommandMessage>) {
          if (m.kind > 3 || !(m.intensity >= 0.0f && m.intensity <= 1.0f)) {
            throw Error("proto.invalid_message", "command kind or intensity out of range");
          }
          Writer w(kCommandFrameSize);
          header(w, MsgType::Command, 17);
          w.u32(m.user_id);
          w.u8(m.kind);
          w.f32(m.intensity);
          w.u64(m.timestamp_ms);
          return w.finish();
        } else {
          Writer w(kAckFrameSize);
          header(w, MsgType::Ack, 9);
          w.u32(m.round);
          w.u32(m.client_id);
          w.u8(static_cast<std::uint8_t>(m.status));
          return w.finish();
        }
      },
      msg);
}

FrameHeader decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kCommonHeaderSize) {
    throw DecodeError(DecodeErrc::Truncated, "frame shorter than the common header");
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DecodeError(DecodeErrc::BadMagic, "frame does not start with HAFL");
  }
  Reader r(bytes.subspan(4, kCommonHeaderSize - 4));
  const std::uint16_t version = r.u16();
  if (version != kVersion) {
    throw DecodeError(DecodeErrc::UnsupportedVersion,
                      "protocol version " + std::to_string(version) + " is not supported");
  }
  const std::uint8_t type = r.u8();
  if (type < 1 || type > 4) {
    throw DecodeError(DecodeErrc::UnknownType, "message type " + std::to_string(type));
  }
  const std::uint32_t body = r.u32();
  if (body > kMaxBodySize) throw DecodeError(DecodeErrc::Overflow, "declared body too large");
  return {static_cast<MsgType>(type), body};
}

Message decode(std::span<const std::uint8_t> frame) {
  const FrameHeader h = decode_header(frame);
  const std::size_t available = frame.size() - kCommonHeaderSize;
  if (available < h.body_len) {
    throw DecodeError(DecodeErrc::Truncated, "frame shorter than the declared body");
  }
  if (available > h.body_len) {
    throw DecodeError(DecodeErrc::Overflow, "bytes beyond the declared body");
  }
  Reader r(frame.subspan(kCommonHeaderSize));
  switch (h.type) {
    case MsgType::Update: {
      UpdateMessage m;
      m.round = r.u32();
      m.client_id = r.u32();
      m.n_samples = r.u32();
      m.params = read_params(r, r.u32());
      return m;
    }
    case MsgType::Global: {
      GlobalModelMessage m;
      m.round = r.u32();
      m.params = read_params(r, r.u32());
      return m;
    }
    case MsgType::Command: {
      CommandMessage m;
      m.user_id = r.u32();
      m.kind = r.u8();
      m.intensity = r.f32();
      m.timestamp_ms = r.u64();
      if (r.remaining() != 0) throw DecodeError(DecodeErrc::Overflow, "command body too long");
      check_command(m.kind, m.intensity);
      return m;
    }
    case MsgType::Ack: {
      AckMessage m;
      m.round = r.u32();
      m.client_id = r.u32();
      const std::uint8_t status = r.u8();
      if (r.remaining() != 0) throw DecodeError(DecodeErrc::Overflow, "ack body too long");
      if (status > 3) throw DecodeError(DecodeErrc::InvalidField, "ack status out of range");
      m.status = static_cast<AckStatus>(status);
      return m;
    }
  }
  throw DecodeError(DecodeErrc::UnknownType, "unreachable message type");
}

}  // namespace holo::proto
