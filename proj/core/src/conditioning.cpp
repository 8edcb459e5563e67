#include "streamforge/conditioning.hpp"

#include <algorithm>
#include <cmath>

#include "streamforge/error.hpp"
#include "streamforge/rng.hpp"

namespace streamforge {

namespace {

void absorb_bytes(std::uint64_t& h, const void* bytes, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

std::int64_t chunks_for_duration(double duration_s, const SessionConfig& config) {
  if (duration_s <= 0.0) return 0;
  const double exact = duration_s / chunk_duration(config);
  return static_cast<std::int64_t>(std::ceil(exact - 1e-9));
}

}  // namespace

std::uint64_t ConditionSlice::digest() const {
  std::uint64_t h = 1469598103934665603ULL;
  absorb_bytes(h, &chunk_id, sizeof(chunk_id));
  for (const auto& frame : audio_window) {
    absorb_bytes(h, &frame.index, sizeof(frame.index));
    absorb_bytes(h, frame.features.data(), frame.features.size() * sizeof(double));
  }
  absorb_bytes(h, prompt.data(), prompt.size());
  absorb_bytes(h, action_tag.data(), action_tag.size());
  const auto t = static_cast<std::uint8_t>(transition);
  absorb_bytes(h, &t, sizeof(t));
  return h;
}

std::vector<PromptAssignment> segment_prompts(const std::vector<TraceEvent>& events,
                                              std::int64_t num_chunks,
                                              const SessionConfig& config) {
  std::vector<std::pair<double, std::string>> prompts;
  for (const auto& event : events) {
    if (event.is_prompt()) {
      prompts.emplace_back(event.pts, std::get<PromptEvent>(event.kind).text);
    }
  }
  if (prompts.empty() || prompts.front().first > 0.0) {
    raise(ErrorKind::kTrace, "trace has no initial prompt at pts <= 0");
  }

  const double duration = chunk_duration(config);
  std::vector<PromptAssignment> assignments;
  assignments.reserve(static_cast<std::size_t>(num_chunks));
  for (std::int64_t c = 0; c < num_chunks; ++c) {
    const double start = static_cast<double>(c) * duration;
    const double end = static_cast<double>(c + 1) * duration;
    PromptAssignment assignment;
    for (const auto& [pts, text] : prompts) {
      if (pts <= start) assignment.prompt = text;
      if (pts > start && pts < end) assignment.transition = Transition::kCrossPrompt;
    }
    assignments.push_back(std::move(assignment));
  }
  return assignments;
}

TraceConditionSource::TraceConditionSource(const std::vector<TraceEvent>& events,
                                           const SessionConfig& config,
                                           std::uint64_t reference_digest,
                                           ActionPlanner planner) {
  if (!planner) planner = plan_action;
  const double duration = trace_duration(events, config.audio_hz);
  const std::int64_t num_chunks = chunks_for_duration(duration, config);

  const std::vector<float> pcm = flatten_audio(events, config.audio_hz);
  std::vector<AudioFeatureFrame> frames = aggregate_audio(pcm, config);

  // Zero-pad features so the last chunks' windows are fully covered.
  std::int64_t needed = 0;
  if (num_chunks > 0) {
    needed = window_for_chunk(num_chunks - 1,
                              std::numeric_limits<std::int64_t>::max(), config)
                 .hi;
  }
  while (static_cast<std::int64_t>(frames.size()) < needed) {
    AudioFeatureFrame pad;
    pad.index = static_cast<std::int64_t>(frames.size());
    pad.features.assign(static_cast<std::size_t>(config.audio_feature_dim), 0.0);
    frames.push_back(std::move(pad));
  }

  const auto prompts = segment_prompts(events, num_chunks, config);
  slices_.reserve(static_cast<std::size_t>(num_chunks));
  for (std::int64_t c = 0; c < num_chunks; ++c) {
    ConditionSlice slice;
    slice.chunk_id = c;
    const FrameRange range =
        window_for_chunk(c, static_cast<std::int64_t>(frames.size()), config);
    slice.audio_window = slice_window(frames, range);
    slice.prompt = prompts[static_cast<std::size_t>(c)].prompt;
    slice.transition = prompts[static_cast<std::size_t>(c)].transition;
    slice.action_tag = planner(slice.audio_window, reference_digest,
                               derive_seed(config.rng_seed, 0x706c616eu /* "plan" */,
                                           static_cast<std::uint64_t>(c)));
    slices_.push_back(std::move(slice));
  }
}

TraceConditionSource::TraceConditionSource(std::vector<ConditionSlice> slices)
    : slices_(std::move(slices)) {}

std::optional<ConditionSlice> TraceConditionSource::acquire(std::int64_t chunk_id) {
  if (chunk_id < 0 || chunk_id >= total_chunks()) return std::nullopt;
  return slices_[static_cast<std::size_t>(chunk_id)];
}

StreamingConditionSource::StreamingConditionSource(const SessionConfig& config,
                                                   std::uint64_t reference_digest,
                                                   ActionPlanner planner)
    : config_(config),
      reference_digest_(reference_digest),
      planner_(planner ? std::move(planner) : ActionPlanner(plan_action)) {}

void StreamingConditionSource::push_audio(double pts, const std::vector<float>& samples) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (finished_) return;
  const auto start = static_cast<std::size_t>(
      std::llround(std::max(pts, 0.0) * config_.audio_hz));
  if (audio_.size() < start + samples.size()) {
    audio_.resize(start + samples.size(), 0.0f);
  }
  std::copy(samples.begin(), samples.end(), audio_.begin() + static_cast<std::ptrdiff_t>(start));
  ready_.notify_all();
}

void StreamingConditionSource::push_prompt(double pts, std::string text) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (finished_) return;
  prompts_.emplace_back(pts, std::move(text));
  ready_.notify_all();
}

void StreamingConditionSource::finish() {
  std::lock_guard<std::mutex> lock(mutex_);
  finished_ = true;
  const double duration =
      static_cast<double>(audio_.size()) / static_cast<double>(config_.audio_hz);
  total_chunks_ = chunks_for_duration(duration, config_);
  ready_.notify_all();
}

void StreamingConditionSource::abort() {
  std::lock_guard<std::mutex> lock(mutex_);
  aborted_ = true;
  ready_.notify_all();
}

bool StreamingConditionSource::chunk_ready_locked(std::int64_t chunk_id) const {
  // A chunk is admittable once the audio covering its overlapped window has
  // arrived; after finish() the remaining windows are zero-padded.
  if (finished_) return true;
  const FrameRange range = window_for_chunk(
      chunk_id, std::numeric_limits<std::int64_t>::max(), config_);
  const std::size_t samples_needed = static_cast<std::size_t>(range.hi) *
                                     static_cast<std::size_t>(config_.audio_hz) /
                                     static_cast<std::size_t>(kFeatureFramesPerSecond);
  return audio_.size() >= samples_needed;
}

std::optional<ConditionSlice> StreamingConditionSource::build_slice_locked(
    std::int64_t chunk_id) {
  // TODO: extract features incrementally instead of re-aggregating the whole
  // timeline on every acquire; fine at session scale, quadratic in the limit.
  std::vector<AudioFeatureFrame> frames =
      aggregate_audio(std::span<const float>(audio_), config_);
  const std::int64_t needed = window_for_chunk(
      chunk_id, std::numeric_limits<std::int64_t>::max(), config_).hi;
  while (static_cast<std::int64_t>(frames.size()) < needed) {
    AudioFeatureFrame pad;
    pad.index = static_cast<std::int64_t>(frames.size());
    pad.features.assign(static_cast<std::size_t>(config_.audio_feature_dim), 0.0);
    frames.push_back(std::move(pad));
  }

  ConditionSlice slice;
  slice.chunk_id = chunk_id;
  const FrameRange range =
      window_for_chunk(chunk_id, static_cast<std::int64_t>(frames.size()), config_);
  slice.audio_window = slice_window(frames, range);

  const double duration = chunk_duration(config_);
  const double start = static_cast<double>(chunk_id) * duration;
  const double end = static_cast<double>(chunk_id + 1) * duration;
  std::vector<std::pair<double, std::string>> sorted = prompts_;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  if (sorted.empty() || sorted.front().first > 0.0) {
    raise(ErrorKind::kTrace, "no initial prompt at pts <= 0");
  }
  for (const auto& [pts, text] : sorted) {
    if (pts <= start) slice.prompt = text;
    if (pts > start && pts < end) slice.transition = Transition::kCrossPrompt;
  }
  slice.action_tag = planner_(slice.audio_window, reference_digest_,
                              derive_seed(config_.rng_seed, 0x706c616eu,
                                          static_cast<std::uint64_t>(chunk_id)));
  return slice;
}

std::optional<ConditionSlice> StreamingConditionSource::acquire(std::int64_t chunk_id) {
  std::unique_lock<std::mutex> lock(mutex_);
  ready_.wait(lock, [&] {
    return aborted_ || chunk_ready_locked(chunk_id);
  });
  if (aborted_) return std::nullopt;
  if (finished_ && chunk_id >= total_chunks_) return std::nullopt;
  return build_slice_locked(chunk_id);
}

std::vector<ConditionSlice> make_synthetic_slices(std::int64_t num_chunks) {
  std::vector<ConditionSlice> slices;
  slices.reserve(static_cast<std::size_t>(num_chunks));
  for (std::int64_t c = 0; c < num_chunks; ++c) {
    ConditionSlice slice;
    slice.chunk_id = c;
    slice.prompt = "synthetic";
    slice.action_tag = "idle";
    slices.push_back(std::move(slice));
  }
  return slices;
}

}  // namespace streamforge
