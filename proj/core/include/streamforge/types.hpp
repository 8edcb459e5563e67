#pragma once

#include <cstdint>
#include <vector>

#include "streamforge/config.hpp"

namespace streamforge {

using LatentVector = std::vector<double>;

/// One temporally compressed video latent; the atomic unit of the stream.
struct Latent {
  std::int64_t id = 0;
  LatentVector data;
  int frames_covered = 1;
  double video_pts = 0.0;  // start time in seconds

  bool operator==(const Latent&) const = default;
};

/// Position on the noise ladder. t is flow time: 1 = pure noise, 0 = clean.
/// ladder_index counts step calls already applied; a clean chunk sits one
/// past the last ladder entry.
struct NoiseLevel {
  double t = 1.0;
  int ladder_index = 0;

  bool clean() const { return t == 0.0; }
  bool operator==(const NoiseLevel&) const = default;
};

/// Ordered group of latents sharing one noise level; the unit of scheduling
/// and emission.
struct Chunk {
  std::int64_t chunk_id = 0;
  std::vector<Latent> latents;
  NoiseLevel noise;

  bool clean() const { return noise.clean(); }
  bool operator==(const Chunk&) const = default;
};

/// Descending flow-time schedule shared by the scheduler and the denoisers.
class NoiseLadder {
 public:
  NoiseLadder() = default;
  NoiseLadder(int stream_chunks, int micro_steps)
      : levels_(build_noise_ladder(stream_chunks, micro_steps)) {}
  explicit NoiseLadder(std::vector<double> levels) : levels_(std::move(levels)) {}

  int depth() const { return static_cast<int>(levels_.size()); }
  double at(int index) const { return levels_.at(static_cast<std::size_t>(index)); }
  const std::vector<double>& levels() const { return levels_; }

  /// Level after n step calls; n == depth() is clean.
  NoiseLevel after_steps(int n) const;
  NoiseLevel top() const { return after_steps(0); }
  NoiseLevel next_below(const NoiseLevel& level) const;

  /// First ladder level strictly below a flow time (clean if none); lets a
  /// chunk re-noised to an off-ladder level rejoin the schedule.
  NoiseLevel next_below_time(double t) const;

  /// Index of a flow time on the ladder, or -1 (tolerance 1e-12).
  int index_of(double t) const;
  bool contains(double t) const { return index_of(t) >= 0; }

 private:
  std::vector<double> levels_;
};

/// Pure-noise chunk with seeded Gaussian content, ready for admission.
/// Latent ids are consecutive from chunk_id * latents_per_chunk.
Chunk make_noise_chunk(std::int64_t chunk_id, const SessionConfig& config);

/// Seeded stand-in for the encoded reference image (id -1, pts 0).
Latent make_reference_latent(const SessionConfig& config);

std::uint64_t latent_digest(const Latent& latent);

}  // namespace streamforge
