#include "streamforge/denoise.hpp"

#include <cmath>
#include <string>

#include "streamforge/error.hpp"
#include "streamforge/rng.hpp"

namespace streamforge {

LatentVector toy_flow_step(const LatentVector& x, double t, double t_next,
                           const LatentVector& target) {
  if (t == 0.0) {
    raise(ErrorKind::kSchedule, "toy_flow_step at singular time t = 0");
  }
  if (!(0.0 <= t_next && t_next < t && t <= 1.0)) {
    raise(ErrorKind::kSchedule, "toy_flow_step requires 0 <= t_next < t <= 1");
  }
  if (x.size() != target.size()) {
    raise(ErrorKind::kDimension, "toy_flow_step dimension mismatch");
  }
  LatentVector out(x.size());
  const double scale = (t_next - t) / t;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] + scale * (x[i] - target[i]);
  }
  return out;
}

LatentVector cfg_fold(const LatentVector& uncond, const LatentVector& cond,
                      double scale) {
  if (uncond.size() != cond.size()) {
    raise(ErrorKind::kDimension, "cfg_fold dimension mismatch");
  }
  LatentVector out(uncond.size());
  for (std::size_t i = 0; i < uncond.size(); ++i) {
    out[i] = uncond[i] + scale * (cond[i] - uncond[i]);
  }
  return out;
}

std::vector<std::pair<int, int>> partition_steps(int total_nfe, int segments) {
  if (segments < 1 || total_nfe < segments) {
    raise(ErrorKind::kConfig, "partition_steps requires total_nfe >= segments >= 1");
  }
  const int base = total_nfe / segments;
  const int remainder = total_nfe % segments;
  std::vector<std::pair<int, int>> ranges;
  ranges.reserve(static_cast<std::size_t>(segments));
  int begin = 0;
  for (int s = 0; s < segments; ++s) {
    const int size = base + (s < remainder ? 1 : 0);
    ranges.emplace_back(begin, begin + size);
    begin += size;
  }
  return ranges;
}

ToyFlowModel::ToyFlowModel(NoiseLadder ladder, int latent_dim, std::uint64_t seed,
                           double alpha, double beta)
    : ladder_(std::move(ladder)),
      latent_dim_(latent_dim),
      seed_(seed),
      alpha_(alpha),
      beta_(beta) {}

LatentVector ToyFlowModel::condition_embedding(std::int64_t chunk_id,
                                               std::uint64_t cond_digest) const {
  auto rng = make_rng(derive_seed(seed_, cond_digest,
                                  static_cast<std::uint64_t>(chunk_id)));
  std::normal_distribution<double> normal(0.0, 1.0);
  LatentVector v(static_cast<std::size_t>(latent_dim_));
  for (auto& x : v) x = normal(rng);
  return v;
}

LatentVector ToyFlowModel::target(std::int64_t chunk_id, std::uint64_t cond_digest,
                                  const Latent& reference) const {
  if (static_cast<int>(reference.data.size()) != latent_dim_) {
    raise(ErrorKind::kDimension, "reference dim does not match model latent_dim");
  }
  const LatentVector embedding = condition_embedding(chunk_id, cond_digest);
  LatentVector out(static_cast<std::size_t>(latent_dim_));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = alpha_ * reference.data[i] + beta_ * embedding[i];
  }
  return out;
}

void ToyFlowModel::step(std::span<Chunk> stream, const ContextView& context,
                        const GroupMask& mask,
                        std::span<const ConditionSlice> conds) const {
  (void)mask;  // the linear model only reads groups the mask already permits
  if (conds.size() != stream.size()) {
    raise(ErrorKind::kEngine, "one condition slice per stream chunk required");
  }
  for (std::size_t i = 0; i < stream.size(); ++i) {
    Chunk& chunk = stream[i];
    const NoiseLevel next = ladder_.next_below_time(chunk.noise.t);
    const LatentVector tgt =
        target(chunk.chunk_id, conds[i].digest(), context.reference());
    for (auto& latent : chunk.latents) {
      latent.data = toy_flow_step(latent.data, chunk.noise.t, next.t, tgt);
    }
    chunk.noise = next;
  }
}

DriftModel::DriftModel(ToyFlowModel base, LatentVector bias)
    : base_(std::move(base)), bias_(std::move(bias)) {
  if (static_cast<int>(bias_.size()) != base_.latent_dim()) {
    raise(ErrorKind::kDimension, "drift bias dim does not match latent_dim");
  }
}

void DriftModel::step(std::span<Chunk> stream, const ContextView& context,
                      const GroupMask& mask,
                      std::span<const ConditionSlice> conds) const {
  (void)mask;
  if (conds.size() != stream.size()) {
    raise(ErrorKind::kEngine, "one condition slice per stream chunk required");
  }
  const Chunk* anchor =
      context.short_term().has_value() ? &*context.short_term() : nullptr;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    Chunk& chunk = stream[i];
    const NoiseLevel next = base_.ladder().next_below_time(chunk.noise.t);
    LatentVector fallback;
    if (anchor == nullptr) {
      fallback = base_.target(chunk.chunk_id, conds[i].digest(), context.reference());
    }
    for (std::size_t j = 0; j < chunk.latents.size(); ++j) {
      const LatentVector& tgt =
          anchor != nullptr && j < anchor->latents.size()
              ? anchor->latents[j].data
              : fallback;
      LatentVector out = toy_flow_step(chunk.latents[j].data, chunk.noise.t, next.t, tgt);
      for (std::size_t d = 0; d < out.size(); ++d) out[d] += bias_[d];
      chunk.latents[j].data = std::move(out);
    }
    chunk.noise = next;
  }
}

LatentVector constant_bias(int latent_dim, double norm) {
  LatentVector bias(static_cast<std::size_t>(latent_dim),
                    norm / std::sqrt(static_cast<double>(latent_dim)));
  return bias;
}

Chunk make_generated_gt(const Chunk& gt, double t_inject, const DenoiseStep& model,
                        const NoiseLadder& ladder, const ContextView& context,
                        const ConditionSlice& cond, std::uint64_t noise_seed) {
  if (!gt.clean()) {
    raise(ErrorKind::kSchedule, "generated-GT source chunk must be clean");
  }
  const int inject_index = ladder.index_of(t_inject);
  if (inject_index < 0) {
    raise(ErrorKind::kSchedule,
          "t_inject " + std::to_string(t_inject) + " is not a ladder level");
  }

  Chunk noised = gt;
  noised.noise = ladder.after_steps(inject_index);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t j = 0; j < noised.latents.size(); ++j) {
    auto rng = make_rng(derive_seed(noise_seed, static_cast<std::uint64_t>(j)));
    for (auto& x : noised.latents[j].data) {
      x = (1.0 - t_inject) * x + t_inject * normal(rng);
    }
  }

  const GroupMask mask = build_group_mask(context.layout());
  std::vector<ConditionSlice> conds{cond};
  std::vector<Chunk> one{std::move(noised)};
  while (!one.front().clean()) {
    model.step(std::span<Chunk>(one), context, mask, conds);
  }
  return std::move(one.front());
}

MixedMemorySource mix_memory_source(const Chunk& gt, const Chunk& generated,
                                    double p, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    raise(ErrorKind::kConfig, "mix probability must be in [0, 1]");
  }
  std::bernoulli_distribution pick_generated(p);
  if (pick_generated(rng)) {
    return MixedMemorySource{generated, MemorySourceTag::kGenerated};
  }
  return MixedMemorySource{gt, MemorySourceTag::kGroundTruth};
}

std::vector<Chunk> full_sequence_oracle(std::int64_t num_chunks,
                                        const std::vector<ConditionSlice>& conds,
                                        const DenoiseStep& model,
                                        const NoiseLadder& ladder,
                                        const Latent& reference,
                                        const SessionConfig& config) {
  if (static_cast<std::int64_t>(conds.size()) < num_chunks) {
    raise(ErrorKind::kEngine, "oracle needs one condition slice per chunk");
  }
  std::vector<Chunk> chunks;
  chunks.reserve(static_cast<std::size_t>(num_chunks));
  std::vector<GroupTag> layout{{GroupKind::kReference, 0}};
  for (std::int64_t c = 0; c < num_chunks; ++c) {
    chunks.push_back(make_noise_chunk(c, config));
    layout.push_back({GroupKind::kStream, static_cast<int>(c)});
  }
  if (num_chunks == 0) return chunks;

  const ContextView context = ContextView::reference_only(reference);
  const GroupMask mask = GroupMask::full_visibility(std::move(layout));
  const std::span<const ConditionSlice> cond_span(conds.data(),
                                                  static_cast<std::size_t>(num_chunks));
  for (int k = 0; k < ladder.depth(); ++k) {
    model.step(std::span<Chunk>(chunks), context, mask, cond_span);
  }
  return chunks;
}

}  // namespace streamforge
