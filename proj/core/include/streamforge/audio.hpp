#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "streamforge/config.hpp"

namespace streamforge {

/// One 40 ms conditioning feature frame (25 per second). Frame i covers input
/// samples [i*640, (i+1)*640) at 16 kHz.
struct AudioFeatureFrame {
  std::int64_t index = 0;
  std::vector<double> features;  // RMS followed by fixed band energies

  bool operator==(const AudioFeatureFrame&) const = default;
};

/// Toy feature extractor standing in for a speech encoder: RMS plus Goertzel
/// band energies at fixed center frequencies. Deterministic; the final
/// partial window is zero-padded, so the output count is ceil(samples/640).
std::vector<AudioFeatureFrame> aggregate_audio(std::span<const float> pcm,
                                               const SessionConfig& config);

/// Half-open feature-frame index range.
struct FrameRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  std::int64_t size() const { return hi - lo; }
  bool operator==(const FrameRange&) const = default;
};

/// Feature frames whose span intersects the chunk's video span, extended by
/// audio_overlap_features on both sides and clamped to [0, total_frames).
FrameRange window_for_chunk(std::int64_t chunk_id, std::int64_t total_frames,
                            const SessionConfig& config);

std::vector<AudioFeatureFrame> slice_window(std::span<const AudioFeatureFrame> frames,
                                            FrameRange range);

/// Rule-based planner stub with the interface a multimodal planner would
/// implement: mean window RMS > 0.1 -> "speaking-gesture", > 0.025 ->
/// "listening-nod", else "idle".
std::string plan_action(std::span<const AudioFeatureFrame> window,
                        std::uint64_t reference_digest, std::uint64_t seed);

}  // namespace streamforge
