#include "streamforge/types.hpp"

#include <cmath>
#include <cstring>

#include "streamforge/error.hpp"
#include "streamforge/rng.hpp"

namespace streamforge {

NoiseLevel NoiseLadder::after_steps(int n) const {
  if (n < 0 || n > depth()) {
    raise(ErrorKind::kSchedule,
          "step count " + std::to_string(n) + " outside ladder of depth " +
              std::to_string(depth()));
  }
  if (n == depth()) return NoiseLevel{0.0, depth()};
  return NoiseLevel{levels_[static_cast<std::size_t>(n)], n};
}

NoiseLevel NoiseLadder::next_below(const NoiseLevel& level) const {
  if (level.clean()) {
    raise(ErrorKind::kSchedule, "no level below clean");
  }
  return after_steps(level.ladder_index + 1);
}

NoiseLevel NoiseLadder::next_below_time(double t) const {
  if (t <= 0.0) {
    raise(ErrorKind::kSchedule, "no level below clean");
  }
  for (int i = 0; i < depth(); ++i) {
    if (levels_[static_cast<std::size_t>(i)] < t - 1e-12) return after_steps(i);
  }
  return NoiseLevel{0.0, depth()};
}

int NoiseLadder::index_of(double t) const {
  for (int i = 0; i < depth(); ++i) {
    if (std::abs(levels_[static_cast<std::size_t>(i)] - t) <= 1e-12) return i;
  }
  return -1;
}

namespace {

LatentVector gaussian_vector(std::uint64_t seed, int dim) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  LatentVector v(static_cast<std::size_t>(dim));
  for (auto& x : v) x = normal(rng);
  return v;
}

}  // namespace

Chunk make_noise_chunk(std::int64_t chunk_id, const SessionConfig& config) {
  Chunk chunk;
  chunk.chunk_id = chunk_id;
  chunk.noise = NoiseLevel{1.0, 0};
  const double latent_duration =
      static_cast<double>(config.frames_per_latent) / config.fps;
  chunk.latents.reserve(static_cast<std::size_t>(config.latents_per_chunk));
  for (int j = 0; j < config.latents_per_chunk; ++j) {
    Latent latent;
    latent.id = chunk_id * config.latents_per_chunk + j;
    latent.frames_covered = config.frames_per_latent;
    latent.video_pts = static_cast<double>(latent.id) * latent_duration;
    latent.data = gaussian_vector(
        derive_seed(config.rng_seed, 0x6e6f6973u /* "nois" */,
                    static_cast<std::uint64_t>(latent.id)),
        config.latent_dim);
    chunk.latents.push_back(std::move(latent));
  }
  return chunk;
}

Latent make_reference_latent(const SessionConfig& config) {
  Latent reference;
  reference.id = -1;
  reference.frames_covered = 1;
  reference.video_pts = 0.0;
  reference.data = gaussian_vector(derive_seed(config.rng_seed, 0x72656600u /* "ref" */),
                                   config.latent_dim);
  return reference;
}

std::uint64_t latent_digest(const Latent& latent) {
  // FNV-1a over the id and raw data bytes.
  std::uint64_t h = 1469598103934665603ULL;
  auto absorb = [&h](const void* bytes, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  absorb(&latent.id, sizeof(latent.id));
  absorb(latent.data.data(), latent.data.size() * sizeof(double));
  return h;
}

}  // namespace streamforge
