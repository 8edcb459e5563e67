#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace streamforge {

// Audio conditioning features arrive at a fixed 25 per second regardless of
// the video frame rate.
inline constexpr int kFeatureFramesPerSecond = 25;

// Session parameters. Counts are chunk/latent granularity; times are seconds.
struct SessionConfig {
  double fps = 25.0;                // video frames per second
  int audio_hz = 16000;             // input PCM sample rate
  int latents_per_chunk = 3;        // latents grouped under one noise level
  int stream_chunks = 3;            // denoising stream capacity, in chunks
  int micro_steps = 1;              // denoise step calls per tick
  int frames_per_latent = 4;        // temporal compression of the toy VAE
  int long_term_capacity = 3;       // long-term memory queue capacity
  int latent_dim = 16;              // latent vector length
  int refine_interval_chunks = 8;   // emissions between memory refinements
  double refine_noise_t = 0.0;      // refinement injection level; 0 = auto
                                    // (second ladder level)
  int audio_overlap_features = 2;   // condition window overlap, each side
  int audio_feature_dim = 8;        // RMS + band energies
  std::uint64_t rng_seed = 42;      // root of every random draw in a session
};

struct ConfigViolation {
  std::string field;
  std::string constraint;
};

// Uniform partition of (0, 1] into stream_chunks * micro_steps flow-time
// levels, descending; index 0 is pure noise (t = 1). A chunk that has taken
// n step calls sits at index n, and reaches t = 0 after traversing the whole
// ladder.
std::vector<double> build_noise_ladder(int stream_chunks, int micro_steps);

// Seconds of video carried by one chunk: latents_per_chunk * frames_per_latent / fps.
double chunk_duration(const SessionConfig& config);

// Fills derived defaults (refine_noise_t) without validating.
SessionConfig resolve_defaults(SessionConfig config);

// Every violated invariant, by field name. Empty means valid. Operates on
// the resolved config.
std::vector<ConfigViolation> config_violations(const SessionConfig& config);

// Resolves defaults and returns the config iff it is valid; otherwise throws
// a config error naming every violation.
SessionConfig validate_config(SessionConfig config);

// Flat key/value document: one `key = value` per line, `#` starts a comment,
// unknown keys are errors. Missing keys keep the values of `base` (the
// defaults, unless overriding an existing config).
SessionConfig parse_config(std::string_view text, SessionConfig base = {});
SessionConfig load_config_file(const std::string& path);

// Inverse of parse_config for the resolved config; used by the session
// protocol handshake and for debugging.
std::string render_config(const SessionConfig& config);

}  // namespace streamforge
