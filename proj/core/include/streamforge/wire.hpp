#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace streamforge {

/// Framed streaming transport. Layout on the wire:
///   length  u32 LE  (payload size in bytes)
///   type    u8
///   payload length bytes
enum class FrameType : std::uint8_t {
  kHello = 0x01,
  kAudio = 0x02,
  kPrompt = 0x03,
  kChunkOut = 0x04,
  kMetrics = 0x05,
  kEnd = 0x7F,
};

bool is_known_frame_type(std::uint8_t byte);
const char* to_string(FrameType type);

struct WireFrame {
  FrameType type = FrameType::kHello;
  std::vector<std::uint8_t> payload;

  bool operator==(const WireFrame&) const = default;
};

inline constexpr std::size_t kWireHeaderBytes = 5;
inline constexpr std::size_t kMaxPayloadBytes = 64u << 20;

std::vector<std::uint8_t> encode_frame(const WireFrame& frame);

struct WireDecodeError {
  std::size_t offset = 0;
  std::string message;
};

/// Non-throwing decode: a malformed prefix yields a structured error, a
/// truncated one yields kIncomplete (wait for more bytes). Never crashes on
/// arbitrary input.
struct DecodeOutcome {
  enum class Status : std::uint8_t { kFrame, kIncomplete, kError };
  Status status = Status::kIncomplete;
  WireFrame frame;
  std::size_t consumed = 0;
  WireDecodeError error;
};

DecodeOutcome decode_frame(std::span<const std::uint8_t> bytes);

// Typed payloads. Multi-byte integers and floats are little-endian.

struct AudioPayload {
  double pts = 0.0;
  std::vector<float> samples;
};

struct PromptPayload {
  double pts = 0.0;
  std::string text;
};

/// chunk_id u64 + video_pts_start/end f64 x2 + latent f32 x (latent_dim *
/// latents_per_chunk) + emit timestamp f64.
struct ChunkOutPayload {
  std::uint64_t chunk_id = 0;
  double video_pts_start = 0.0;
  double video_pts_end = 0.0;
  std::vector<float> latent_values;
  double emit_timestamp = 0.0;
};

std::vector<std::uint8_t> encode_audio_payload(const AudioPayload& payload);
AudioPayload parse_audio_payload(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> encode_prompt_payload(const PromptPayload& payload);
PromptPayload parse_prompt_payload(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> encode_chunk_out_payload(const ChunkOutPayload& payload);
ChunkOutPayload parse_chunk_out_payload(std::span<const std::uint8_t> payload);

}  // namespace streamforge
