#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "streamforge/attention_mask.hpp"
#include "streamforge/conditioning.hpp"
#include "streamforge/memory_bank.hpp"
#include "streamforge/types.hpp"

namespace streamforge {

/// One denoise pass over the stream: every chunk advances exactly one ladder
/// level (one NFE per chunk). conds is aligned with stream order, one slice
/// per chunk. Implementations are immutable after construction and safe to
/// call from multiple threads.
class DenoiseStep {
 public:
  virtual ~DenoiseStep() = default;
  virtual void step(std::span<Chunk> stream, const ContextView& context,
                    const GroupMask& mask,
                    std::span<const ConditionSlice> conds) const = 0;
};

/// Backward Euler step on the linear flow x_t = (1-t)*x0 + t*eps:
/// x + (t_next - t) * (x - target) / t. Stepping to t_next = 0 lands on the
/// target exactly from any state.
LatentVector toy_flow_step(const LatentVector& x, double t, double t_next,
                           const LatentVector& target);

/// uncond + scale * (cond - uncond); the teacher target a guidance-embedding
/// layer is distilled to match.
LatentVector cfg_fold(const LatentVector& uncond, const LatentVector& cond,
                      double scale);

/// Contiguous [begin, end) index ranges covering 0..total_nfe, sizes differing
/// by at most one with the larger segments first.
std::vector<std::pair<int, int>> partition_steps(int total_nfe, int segments);

/// Analytic stand-in for the video diffusion backbone. The per-chunk target
/// is alpha * reference + beta * embedding(cond digest), so conditioning is
/// observable in outputs and every trajectory has a closed form.
class ToyFlowModel : public DenoiseStep {
 public:
  ToyFlowModel(NoiseLadder ladder, int latent_dim, std::uint64_t seed,
               double alpha = 0.5, double beta = 0.5);

  LatentVector condition_embedding(std::int64_t chunk_id,
                                   std::uint64_t cond_digest) const;
  LatentVector target(std::int64_t chunk_id, std::uint64_t cond_digest,
                      const Latent& reference) const;

  void step(std::span<Chunk> stream, const ContextView& context,
            const GroupMask& mask,
            std::span<const ConditionSlice> conds) const override;

  const NoiseLadder& ladder() const { return ladder_; }
  int latent_dim() const { return latent_dim_; }

 private:
  NoiseLadder ladder_;
  int latent_dim_;
  std::uint64_t seed_;
  double alpha_;
  double beta_;
};

/// Error-accumulation model: anchors each chunk's target to the short-term
/// memory content when a context provides one (so errors chain across
/// promotions) and adds a constant bias after every Euler step. With a fixed
/// base target the n-th promoted chunk carries exactly n * bias of drift --
/// the quantity memory refinement exists to reduce.
class DriftModel : public DenoiseStep {
 public:
  DriftModel(ToyFlowModel base, LatentVector bias);

  void step(std::span<Chunk> stream, const ContextView& context,
            const GroupMask& mask,
            std::span<const ConditionSlice> conds) const override;

  const ToyFlowModel& base() const { return base_; }
  const LatentVector& bias() const { return bias_; }

 private:
  ToyFlowModel base_;
  LatentVector bias_;
};

/// Bias vector of the given Euclidean norm, spread evenly across dimensions.
LatentVector constant_bias(int latent_dim, double norm);

/// Noise-inject-and-repair on a clean ground-truth chunk: corrupt to t_inject
/// (which must lie on the ladder) with seeded noise, then denoise back to
/// t = 0 with the given model. Training-side data preparation for closing the
/// train/inference memory gap.
Chunk make_generated_gt(const Chunk& gt, double t_inject, const DenoiseStep& model,
                        const NoiseLadder& ladder, const ContextView& context,
                        const ConditionSlice& cond, std::uint64_t noise_seed);

enum class MemorySourceTag : std::uint8_t { kGroundTruth, kGenerated };

struct MixedMemorySource {
  Chunk chunk;
  MemorySourceTag tag = MemorySourceTag::kGroundTruth;
};

/// Picks the generated chunk with probability p, else the ground truth.
MixedMemorySource mix_memory_source(const Chunk& gt, const Chunk& generated,
                                    double p, std::mt19937_64& rng);

/// Non-streaming reference: denoises all chunks jointly from t = 1 to t = 0
/// under full visibility, same ladder. Equivalence baseline for the streaming
/// scheduler.
std::vector<Chunk> full_sequence_oracle(std::int64_t num_chunks,
                                        const std::vector<ConditionSlice>& conds,
                                        const DenoiseStep& model,
                                        const NoiseLadder& ladder,
                                        const Latent& reference,
                                        const SessionConfig& config);

}  // namespace streamforge
