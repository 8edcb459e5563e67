#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streamforge/types.hpp"

namespace streamforge {

enum class GroupKind : std::uint8_t { kReference, kLongTerm, kShortTerm, kStream };

/// Position of a buffer group in a context layout. index is meaningful for
/// LongTerm (oldest -> newest) and Stream (cleanest -> noisiest).
struct GroupTag {
  GroupKind kind = GroupKind::kReference;
  int index = 0;

  auto operator<=>(const GroupTag&) const = default;
};

std::string to_string(const GroupTag& tag);

/// Immutable deep snapshot of the bank handed to denoise/decode stages.
/// Layout order is fixed: Reference, LongTerm oldest->newest, ShortTerm,
/// Stream cleanest->noisiest.
class ContextView {
 public:
  ContextView(Latent reference, std::vector<Chunk> long_term,
              std::optional<Chunk> short_term, std::vector<Chunk> stream);

  static ContextView reference_only(Latent reference);

  const Latent& reference() const { return reference_; }
  const std::vector<Chunk>& long_term() const { return long_term_; }
  const std::optional<Chunk>& short_term() const { return short_term_; }
  const std::vector<Chunk>& stream() const { return stream_; }
  const std::vector<GroupTag>& layout() const { return layout_; }

 private:
  Latent reference_;
  std::vector<Chunk> long_term_;
  std::optional<Chunk> short_term_;
  std::vector<Chunk> stream_;
  std::vector<GroupTag> layout_;
};

enum class SnapshotScope {
  kFull,             // every group
  kRefineGuidance,   // reference + long-term only; stream and short-term excluded
};

/// The fixed-size stream buffer: reference latent, long-term queue, short-term
/// chunk, and the denoising stream. Single-writer: exactly one owner calls the
/// mutating operations; concurrent readers go through snapshot_context().
class MemoryBank {
 public:
  MemoryBank(Latent reference, const SessionConfig& config);

  /// Appends a fresh pure-noise chunk at the stream tail. The chunk must be
  /// at the top ladder level and its id must follow the last admission.
  void admit_noise_chunk(Chunk chunk);

  /// Pops the clean stream head for emission. The previous short-term chunk
  /// moves to long-term (evicting the oldest entry at capacity) and the
  /// promoted chunk becomes the new short-term.
  Chunk promote_clean_chunk();

  ContextView snapshot_context(SnapshotScope scope = SnapshotScope::kFull) const;

  /// Overwrites the short-term chunk with a repaired copy (same id, clean).
  void replace_short_term(Chunk chunk);

  const Latent& reference() const { return reference_; }
  const std::vector<Chunk>& long_term() const { return long_term_; }
  const std::optional<Chunk>& short_term() const { return short_term_; }
  const std::vector<Chunk>& stream() const { return stream_; }

  /// Writable view of the denoising stream for the single writer's step
  /// calls; every other group is reachable only through the typed operations.
  std::span<Chunk> stream_mut() { return std::span<Chunk>(stream_); }

  std::int64_t last_admitted_id() const { return last_admitted_; }

  /// Throws on any violated structural invariant. Test and debug support.
  void check_invariants() const;

  /// Deterministic text rendering (group layout + ids + noise levels).
  std::string debug_dump() const;

 private:
  Latent reference_;
  std::vector<Chunk> long_term_;
  std::optional<Chunk> short_term_;
  std::vector<Chunk> stream_;
  int long_term_capacity_ = 0;
  int stream_capacity_ = 0;
  int latent_dim_ = 0;
  std::int64_t last_admitted_ = -1;
};

}  // namespace streamforge
