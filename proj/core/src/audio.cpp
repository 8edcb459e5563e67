#include "streamforge/audio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "streamforge/error.hpp"

namespace streamforge {

namespace {

// Center frequencies for the band-energy features; chosen to cover the
// speech range below the 8 kHz Nyquist of 16 kHz input.
constexpr double kBandHz[] = {125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 7000.0};

double goertzel_power(std::span<const float> window, double frequency_hz, int sample_hz) {
  const double omega = 2.0 * std::numbers::pi * frequency_hz / sample_hz;
  const double coeff = 2.0 * std::cos(omega);
  double s_prev = 0.0, s_prev2 = 0.0;
  for (const float x : window) {
    const double s = x + coeff * s_prev - s_prev2;
    s_prev2 = s_prev;
    s_prev = s;
  }
  const double power =
      s_prev * s_prev + s_prev2 * s_prev2 - coeff * s_prev * s_prev2;
  return power / static_cast<double>(window.size() * window.size());
}

}  // namespace

std::vector<AudioFeatureFrame> aggregate_audio(std::span<const float> pcm,
                                               const SessionConfig& config) {
  if (config.audio_hz != 16000) {
    raise(ErrorKind::kConfig, "audio sample rate must be exactly 16000 (got " +
                                  std::to_string(config.audio_hz) + ")");
  }
  const std::size_t window = static_cast<std::size_t>(config.audio_hz) /
                             static_cast<std::size_t>(kFeatureFramesPerSecond);
  std::vector<AudioFeatureFrame> frames;
  if (pcm.empty()) return frames;

  const std::size_t count = (pcm.size() + window - 1) / window;
  frames.reserve(count);
  std::vector<float> padded;
  for (std::size_t i = 0; i < count; ++i) {
    std::span<const float> slice = pcm.subspan(i * window, std::min(window, pcm.size() - i * window));
    if (slice.size() < window) {
      padded.assign(window, 0.0f);
      std::copy(slice.begin(), slice.end(), padded.begin());
      slice = std::span<const float>(padded);
    }

    AudioFeatureFrame frame;
    frame.index = static_cast<std::int64_t>(i);
    frame.features.resize(static_cast<std::size_t>(config.audio_feature_dim), 0.0);

    double sum_sq = 0.0;
    for (const float x : slice) sum_sq += static_cast<double>(x) * x;
    frame.features[0] = std::sqrt(sum_sq / static_cast<double>(window));

    const int bands = config.audio_feature_dim - 1;
    for (int b = 0; b < bands; ++b) {
      const double hz = kBandHz[std::min<std::size_t>(static_cast<std::size_t>(b),
                                                      std::size(kBandHz) - 1)];
      frame.features[static_cast<std::size_t>(b) + 1] =
          std::sqrt(goertzel_power(slice, hz, config.audio_hz));
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

FrameRange window_for_chunk(std::int64_t chunk_id, std::int64_t total_frames,
                            const SessionConfig& config) {
  const double duration = chunk_duration(config);
  const double start_s = static_cast<double>(chunk_id) * duration;
  const double end_s = static_cast<double>(chunk_id + 1) * duration;
  // Nudged floor/ceil keeps exact rational boundaries (0.48 s = 12 frames)
  // stable under floating-point rounding.
  const double rate = static_cast<double>(kFeatureFramesPerSecond);
  std::int64_t lo = static_cast<std::int64_t>(std::floor(start_s * rate + 1e-9));
  std::int64_t hi = static_cast<std::int64_t>(std::ceil(end_s * rate - 1e-9));
  lo -= config.audio_overlap_features;
  hi += config.audio_overlap_features;
  lo = std::max<std::int64_t>(lo, 0);
  hi = std::min(hi, total_frames);
  hi = std::max(hi, lo);
  return FrameRange{lo, hi};
}

std::vector<AudioFeatureFrame> slice_window(std::span<const AudioFeatureFrame> frames,
                                            FrameRange range) {
  std::vector<AudioFeatureFrame> window;
  window.reserve(static_cast<std::size_t>(range.size()));
  for (std::int64_t i = range.lo; i < range.hi; ++i) {
    window.push_back(frames[static_cast<std::size_t>(i)]);
  }
  return window;
}

std::string plan_action(std::span<const AudioFeatureFrame> window,
                        std::uint64_t reference_digest, std::uint64_t seed) {
  (void)reference_digest;  // a learned planner would condition on these
  (void)seed;
  constexpr double kSpeakingThreshold = 0.1;
  double mean_rms = 0.0;
  if (!window.empty()) {
    for (const auto& frame : window) mean_rms += frame.features.at(0);
    mean_rms /= static_cast<double>(window.size());
  }
  if (mean_rms > kSpeakingThreshold) return "speaking-gesture";
  if (mean_rms > kSpeakingThreshold / 4.0) return "listening-nod";
  return "idle";
}

}  // namespace streamforge
