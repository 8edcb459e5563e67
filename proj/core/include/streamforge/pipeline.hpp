#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace streamforge {

/// Stage costs of the two-stage inference pipeline. Quantization and kernel
/// fusion are modeled as multipliers (<= 1) on the denoise cost, not
/// implemented numerics.
struct StageCost {
  double denoise_ms_per_tick = 480.0;
  double decode_ms_per_chunk = 60.0;
  std::map<std::string, double> speedup_factors;  // e.g. "fp8", "kernel_fusion"

  double effective_denoise_ms() const;
};

struct PipelineMetrics {
  double ttff_s = 0.0;        // session start to first decoded chunk
  double rtf = 0.0;           // emitted video seconds / elapsed wall seconds
  double mean_period_ms = 0.0;
  double jitter_ms = 0.0;     // stddev of steady inter-emission periods
  int max_queue_depth = 0;
  std::int64_t chunks_emitted = 0;
  double elapsed_s = 0.0;
};

enum class PipelineEventType : std::uint8_t {
  kDenoiseStart,
  kDenoiseEnd,
  kDecodeStart,
  kDecodeEnd,
  kStall,
};

const char* to_string(PipelineEventType type);

/// Event log entry; timestamps are integer microseconds (the simulation
/// quantum), rendered as milliseconds. chunk_id is -1 for warm-up ticks that
/// emit nothing.
struct PipelineEvent {
  PipelineEventType type = PipelineEventType::kDenoiseStart;
  std::int64_t chunk_id = -1;
  std::int64_t timestamp_us = 0;
};

struct PipelineOptions {
  int queue_capacity = 2;   // bounded inter-stage queue
  int warmup_ticks = 3;     // denoise ticks before the first chunk completes
};

struct PipelineRun {
  PipelineMetrics metrics;
  std::vector<PipelineEvent> events;
};

/// Discrete-event simulation of the asynchronous denoise -> decode pipeline:
/// decode of chunk i overlaps the denoise tick of chunk i+1, so the steady
/// emission period is max(denoise, decode). Deterministic.
PipelineRun run_pipelined(std::int64_t num_chunks, const StageCost& costs,
                          const PipelineOptions& options, double chunk_duration_s);

/// Same stages strictly serialized; the control for the async claim
/// (period = denoise + decode).
PipelineRun sequential_baseline(std::int64_t num_chunks, const StageCost& costs,
                                const PipelineOptions& options,
                                double chunk_duration_s);

/// Threaded execution with real sleeps and a bounded channel; stamps come
/// from the monotonic clock, so metrics are approximate.
PipelineRun run_pipelined_realtime(std::int64_t num_chunks, const StageCost& costs,
                                   const PipelineOptions& options,
                                   double chunk_duration_s);

enum class ParallelStrategy : std::uint8_t { kTokenLevel, kFrameLevel };

/// Distributed attention sharding shape: W workers, L layers, N_f latent
/// frames of T tokens, M context frames gathered per step.
struct CommConfig {
  int workers = 1;
  int layers = 1;
  int frames = 1;
  int tokens_per_frame = 1;
  int context_frames = 1;
};

struct CommCost {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
};

/// Declared communication-cost model. Token-level sharding pays two
/// all-to-all collectives per layer moving N_f*T/W tokens per peer message;
/// frame-level sharding gathers context-frame K/V only: one collective per
/// layer, 2*M*T/W values per peer message. Single worker communicates
/// nothing.
CommCost comm_cost(ParallelStrategy strategy, const CommConfig& config);

/// Metrics from an event log. TTFF is the first decode completion; rtf is
/// emitted video over elapsed wall time; jitter is the stddev of
/// steady-phase inter-emission periods. Empty logs are an error.
PipelineMetrics compute_metrics(std::span<const PipelineEvent> events,
                                double tick_duration_s);

/// Line records `event_type,chunk_id,timestamp_ms`.
std::string render_event_log(std::span<const PipelineEvent> events);

std::string metrics_json(const PipelineMetrics& metrics);

}  // namespace streamforge
