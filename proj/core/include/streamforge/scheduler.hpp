#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <ostream>

#include "streamforge/conditioning.hpp"
#include "streamforge/denoise.hpp"
#include "streamforge/memory_bank.hpp"
#include "streamforge/pipeline.hpp"

namespace streamforge {

/// Session time source. One tick of the scheduler consumes one tick duration
/// of clock time; emissions are stamped at tick end.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
  virtual void advance(double dt) = 0;
};

class SimClock : public Clock {
 public:
  double now() const override { return now_; }
  void advance(double dt) override { now_ += dt; }

 private:
  double now_ = 0.0;
};

/// Paces ticks against the monotonic clock and counts overruns (ticks whose
/// work exceeded the budget).
class RealtimeClock : public Clock {
 public:
  RealtimeClock();
  double now() const override;
  void advance(double dt) override;
  int overruns() const { return overruns_; }

 private:
  std::chrono::steady_clock::time_point start_;
  double cursor_s_ = 0.0;
  int overruns_ = 0;
};

enum class Phase : std::uint8_t { kWarmup, kSteady, kDrain, kDone };

const char* to_string(Phase phase);

/// Per-chunk log entry emitted at promotion; the substrate TTFF/RTF/jitter
/// are computed from.
struct EmissionRecord {
  std::int64_t chunk_id = 0;
  double video_pts_start = 0.0;
  double video_pts_end = 0.0;
  double wall_time_emitted = 0.0;
  std::vector<double> noise_history;  // ladder levels traversed, then 0
  bool refined_memory_flag = false;
};

struct SessionStats {
  std::int64_t ticks = 0;
  std::int64_t step_calls = 0;   // engine invocations over the whole stream
  std::int64_t stream_nfe = 0;   // per-chunk level advancements
  std::int64_t refine_nfe = 0;   // refinement advancements, accounted apart
  std::int64_t refine_runs = 0;
  std::int64_t refine_skips = 0;
};

/// One denoise advancement of one chunk, as consumed by a chunked
/// distillation trainer.
struct StepRecord {
  std::int64_t chunk_id = 0;
  int nfe_index = 0;
  double t_before = 0.0;
  double t_after = 0.0;
};

using TrajectorySink = std::function<void(const StepRecord&)>;
using EmissionCallback = std::function<void(const EmissionRecord&, const Chunk&)>;

/// The diffusion-forcing tick loop. Each tick: admit one fresh pure-noise
/// chunk (unless draining), run micro_steps step calls over the stream with a
/// fresh context snapshot and mask, promote the head once clean, and run
/// memory refinement when the emission count crosses the refinement schedule.
/// Single logical actor; the sole writer of its MemoryBank.
class Scheduler {
 public:
  Scheduler(SessionConfig config, const DenoiseStep& engine, Clock& clock,
            const DenoiseStep* repair_engine = nullptr);

  /// Initializes the bank from the reference latent. Must be called exactly
  /// once, before the first tick.
  void warmup(Latent reference);
  void warmup(MemoryBank bank);

  std::optional<EmissionRecord> tick(ConditionSource& conds);

  /// Noise-inject-and-repair of the short-term chunk guided only by the
  /// reference and long-term memory. Skips (with a logged warning) when no
  /// short-term chunk exists yet.
  bool refine();

  Phase phase() const { return phase_; }
  std::int64_t tick_index() const { return tick_index_; }
  std::int64_t chunks_emitted() const { return chunks_emitted_; }
  std::int64_t next_refine_at() const { return next_refine_at_; }
  const MemoryBank& bank() const;
  const SessionConfig& config() const { return config_; }
  const NoiseLadder& ladder() const { return ladder_; }
  const SessionStats& stats() const { return stats_; }
  double tick_duration() const { return tick_duration_; }

  void set_trajectory_sink(TrajectorySink sink) { sink_ = std::move(sink); }
  void set_emission_callback(EmissionCallback cb) { on_emission_ = std::move(cb); }

 private:
  void run_steps();
  std::optional<EmissionRecord> promote_if_clean();

  SessionConfig config_;
  const DenoiseStep* engine_;
  const DenoiseStep* repair_engine_;
  Clock* clock_;
  NoiseLadder ladder_;
  double tick_duration_;
  std::optional<MemoryBank> bank_;
  Phase phase_ = Phase::kWarmup;
  std::int64_t tick_index_ = 0;      // ticks completed
  std::int64_t chunks_emitted_ = 0;
  std::int64_t admitted_ = 0;
  std::int64_t next_refine_at_ = 0;
  std::vector<ConditionSlice> stream_conds_;         // aligned with bank stream
  std::vector<std::vector<double>> noise_histories_;  // aligned with bank stream
  std::optional<ConditionSlice> short_term_cond_;
  std::optional<Chunk> pending_emission_chunk_;
  bool warmed_up_ = false;
  SessionStats stats_;
  TrajectorySink sink_;
  EmissionCallback on_emission_;
};

struct SessionResult {
  std::vector<EmissionRecord> records;
  SessionStats stats;
};

/// Drives warmup, ticks until conditioning is exhausted, and drains in-flight
/// chunks. The record list is gapless in chunk id and video pts.
SessionResult run_session(const SessionConfig& config, const Latent& reference,
                          ConditionSource& conds, const DenoiseStep& engine,
                          Clock& clock, const DenoiseStep* repair_engine = nullptr,
                          const EmissionCallback& on_emission = {},
                          TrajectorySink sink = {});

/// Convenience overload: parses conditioning straight from trace events.
SessionResult run_session(const SessionConfig& config, const Latent& reference,
                          const std::vector<TraceEvent>& trace,
                          const DenoiseStep& engine, Clock& clock,
                          const DenoiseStep* repair_engine = nullptr);

/// Line-delimited emission log, one JSON object per record; the primary test
/// artifact. Byte-identical for identical (config, trace, seed).
std::string emission_record_json(const EmissionRecord& record);
void write_emission_log(std::ostream& out, const std::vector<EmissionRecord>& records);

/// Metrics over a session's emission timeline (scheduler wall times only;
/// no decode stage).
PipelineMetrics session_metrics(const std::vector<EmissionRecord>& records,
                                double tick_duration_s);

}  // namespace streamforge
