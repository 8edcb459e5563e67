#include "streamforge/wire.hpp"

#include <cstring>

#include "streamforge/error.hpp"

namespace streamforge {

namespace {

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u64le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

std::uint64_t get_u64le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void put_f64le(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64le(out, bits);
}

double get_f64le(const std::uint8_t* p) {
  const std::uint64_t bits = get_u64le(p);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

void put_f32le(std::vector<std::uint8_t>& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32le(out, bits);
}

float get_f32le(const std::uint8_t* p) {
  const std::uint32_t bits = get_u32le(p);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

[[noreturn]] void payload_fail(const char* what) {
  raise(ErrorKind::kProtocol, what);
}

}  // namespace

bool is_known_frame_type(std::uint8_t byte) {
  switch (byte) {
    case 0x01: case 0x02: case 0x03: case 0x04: case 0x05: case 0x7F:
      return true;
    default:
      return false;
  }
}

const char* to_string(FrameType type) {
  switch (type) {
    case FrameType::kHello: return "hello";
    case FrameType::kAudio: return "audio";
    case FrameType::kPrompt: return "prompt";
    case FrameType::kChunkOut: return "chunk_out";
    case FrameType::kMetrics: return "metrics";
    case FrameType::kEnd: return "end";
  }
  return "?";
}

std::vector<std::uint8_t> encode_frame(const WireFrame& frame) {
  if (frame.payload.size() > kMaxPayloadBytes) {
    raise(ErrorKind::kProtocol, "payload exceeds maximum frame size");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kWireHeaderBytes + frame.payload.size());
  put_u32le(out, static_cast<std::uint32_t>(frame.payload.size()));
  out.push_back(static_cast<std::uint8_t>(frame.type));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

DecodeOutcome decode_frame(std::span<const std::uint8_t> bytes) {
  DecodeOutcome outcome;
  if (bytes.size() < kWireHeaderBytes) {
    outcome.status = DecodeOutcome::Status::kIncomplete;
    return outcome;
  }
  const std::uint32_t length = get_u32le(bytes.data());
  if (length > kMaxPayloadBytes) {
    outcome.status = DecodeOutcome::Status::kError;
    outcome.error = {0, "length " + std::to_string(length) + " exceeds maximum payload"};
    return outcome;
  }
  const std::uint8_t type_byte = bytes[4];
  if (!is_known_frame_type(type_byte)) {
    outcome.status = DecodeOutcome::Status::kError;
    outcome.error = {4, "unknown frame type 0x" + std::to_string(type_byte)};
    return outcome;
  }
  if (bytes.size() < kWireHeaderBytes + length) {
    outcome.status = DecodeOutcome::Status::kIncomplete;
    return outcome;
  }
  outcome.status = DecodeOutcome::Status::kFrame;
  outcome.frame.type = static_cast<FrameType>(type_byte);
  outcome.frame.payload.assign(bytes.begin() + kWireHeaderBytes,
                               bytes.begin() + kWireHeaderBytes + length);
  outcome.consumed = kWireHeaderBytes + length;
  return outcome;
}

std::vector<std::uint8_t> encode_audio_payload(const AudioPayload& payload) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + payload.samples.size() * 4);
  put_f64le(out, payload.pts);
  for (const float s : payload.samples) put_f32le(out, s);
  return out;
}

AudioPayload parse_audio_payload(std::span<const std::uint8_t> payload) {
  if (payload.size() < 8 || (payload.size() - 8) % 4 != 0) {
    payload_fail("audio payload must be pts f64 + f32 samples");
  }
  AudioPayload out;
  out.pts = get_f64le(payload.data());
  const std::size_t count = (payload.size() - 8) / 4;
  out.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.samples.push_back(get_f32le(payload.data() + 8 + i * 4));
  }
  return out;
}

std::vector<std::uint8_t> encode_prompt_payload(const PromptPayload& payload) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + payload.text.size());
  put_f64le(out, payload.pts);
  out.insert(out.end(), payload.text.begin(), payload.text.end());
  return out;
}

PromptPayload parse_prompt_payload(std::span<const std::uint8_t> payload) {
  if (payload.size() < 8) {
    payload_fail("prompt payload must be pts f64 + utf-8 text");
  }
  PromptPayload out;
  out.pts = get_f64le(payload.data());
  out.text.assign(payload.begin() + 8, payload.end());
  return out;
}

std::vector<std::uint8_t> encode_chunk_out_payload(const ChunkOutPayload& payload) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + 16 + payload.latent_values.size() * 4 + 8);
  put_u64le(out, payload.chunk_id);
  put_f64le(out, payload.video_pts_start);
  put_f64le(out, payload.video_pts_end);
  for (const float v : payload.latent_values) put_f32le(out, v);
  put_f64le(out, payload.emit_timestamp);
  return out;
}

ChunkOutPayload parse_chunk_out_payload(std::span<const std::uint8_t> payload) {
  constexpr std::size_t kFixed = 8 + 8 + 8 + 8;
  if (payload.size() < kFixed || (payload.size() - kFixed) % 4 != 0) {
    payload_fail("chunk_out payload has malformed layout");
  }
  ChunkOutPayload out;
  out.chunk_id = get_u64le(payload.data());
  out.video_pts_start = get_f64le(payload.data() + 8);
  out.video_pts_end = get_f64le(payload.data() + 16);
  const std::size_t count = (payload.size() - kFixed) / 4;
  out.latent_values.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.latent_values.push_back(get_f32le(payload.data() + 24 + i * 4));
  }
  out.emit_timestamp = get_f64le(payload.data() + payload.size() - 8);
  return out;
}

}  // namespace streamforge
