#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "streamforge/audio.hpp"
#include "streamforge/trace.hpp"

namespace streamforge {

enum class Transition : std::uint8_t { kNone, kCrossPrompt };

/// Conditioning attached to one chunk: overlapping audio window, the active
/// prompt, the planner's action tag, and whether a prompt update lands inside
/// the chunk's video span.
struct ConditionSlice {
  std::int64_t chunk_id = 0;
  std::vector<AudioFeatureFrame> audio_window;
  std::string prompt;
  std::string action_tag;
  Transition transition = Transition::kNone;

  /// Stable FNV-1a digest of the whole slice; the toy denoisers key their
  /// condition embeddings on it.
  std::uint64_t digest() const;
};

struct PromptAssignment {
  std::string prompt;
  Transition transition = Transition::kNone;
};

/// Prompt active at each chunk's start (half-open spans; an update exactly on
/// a boundary belongs to the later chunk and is not a cross-prompt). Requires
/// an initial prompt event at pts <= 0.
std::vector<PromptAssignment> segment_prompts(const std::vector<TraceEvent>& events,
                                              std::int64_t num_chunks,
                                              const SessionConfig& config);

/// Action planning hook, called once per chunk over its audio window. The
/// default is the rule-based plan_action stub; a multimodal planner plugs in
/// through the same signature.
using ActionPlanner = std::function<std::string(
    std::span<const AudioFeatureFrame> window, std::uint64_t reference_digest,
    std::uint64_t seed)>;

/// Supplies per-chunk conditioning to the scheduler. acquire blocks (for
/// streaming sources) until the slice is available and returns nullopt once
/// conditioning is exhausted.
class ConditionSource {
 public:
  virtual ~ConditionSource() = default;
  virtual std::optional<ConditionSlice> acquire(std::int64_t chunk_id) = 0;
};

/// Precomputed conditioning for a fully known trace.
class TraceConditionSource : public ConditionSource {
 public:
  TraceConditionSource(const std::vector<TraceEvent>& events, const SessionConfig& config,
                       std::uint64_t reference_digest, ActionPlanner planner = {});
  explicit TraceConditionSource(std::vector<ConditionSlice> slices);

  std::optional<ConditionSlice> acquire(std::int64_t chunk_id) override;

  std::int64_t total_chunks() const { return static_cast<std::int64_t>(slices_.size()); }
  const std::vector<ConditionSlice>& slices() const { return slices_; }

 private:
  std::vector<ConditionSlice> slices_;
};

/// Incremental conditioning for the session server: a reader thread feeds
/// audio and prompts as they arrive; the scheduler actor blocks in acquire
/// until the chunk's window is covered or the input has finished.
class StreamingConditionSource : public ConditionSource {
 public:
  StreamingConditionSource(const SessionConfig& config, std::uint64_t reference_digest,
                           ActionPlanner planner = {});

  void push_audio(double pts, const std::vector<float>& samples);
  void push_prompt(double pts, std::string text);
  void finish();
  void abort();

  std::optional<ConditionSlice> acquire(std::int64_t chunk_id) override;

 private:
  bool chunk_ready_locked(std::int64_t chunk_id) const;
  std::optional<ConditionSlice> build_slice_locked(std::int64_t chunk_id);

  SessionConfig config_;
  std::uint64_t reference_digest_ = 0;
  ActionPlanner planner_;
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::vector<float> audio_;                            // contiguous from pts 0
  std::vector<std::pair<double, std::string>> prompts_; // sorted by pts
  bool finished_ = false;
  bool aborted_ = false;
  std::int64_t total_chunks_ = -1;  // known after finish()
};

/// Deterministic placeholder slices for rollout simulation and tests.
std::vector<ConditionSlice> make_synthetic_slices(std::int64_t num_chunks);

}  // namespace streamforge
