#include "streamforge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "streamforge/channel.hpp"
#include "streamforge/error.hpp"

namespace streamforge {

namespace {

constexpr double kUsPerMs = 1000.0;
constexpr double kUsPerS = 1e6;

std::int64_t to_us(double ms) { return std::llround(ms * kUsPerMs); }

// Tie order at equal timestamps: the decoder's pop frees a queue slot before
// the producer's enqueue lands, keeping the depth sweep exact.
int type_rank(PipelineEventType type) {
  switch (type) {
    case PipelineEventType::kDecodeEnd: return 0;
    case PipelineEventType::kDecodeStart: return 1;
    case PipelineEventType::kStall: return 2;
    case PipelineEventType::kDenoiseEnd: return 3;
    case PipelineEventType::kDenoiseStart: return 4;
  }
  return 5;
}

void sort_events(std::vector<PipelineEvent>& events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const PipelineEvent& a, const PipelineEvent& b) {
                     if (a.timestamp_us != b.timestamp_us) {
                       return a.timestamp_us < b.timestamp_us;
                     }
                     return type_rank(a.type) < type_rank(b.type);
                   });
}

}  // namespace

double StageCost::effective_denoise_ms() const {
  double ms = denoise_ms_per_tick;
  for (const auto& [name, factor] : speedup_factors) {
    if (!(factor > 0.0 && factor <= 1.0)) {
      raise(ErrorKind::kConfig, "speedup factor '" + name + "' must be in (0, 1]");
    }
    ms *= factor;
  }
  return ms;
}

const char* to_string(PipelineEventType type) {
  switch (type) {
    case PipelineEventType::kDenoiseStart: return "denoise_start";
    case PipelineEventType::kDenoiseEnd: return "denoise_end";
    case PipelineEventType::kDecodeStart: return "decode_start";
    case PipelineEventType::kDecodeEnd: return "decode_end";
    case PipelineEventType::kStall: return "stall";
  }
  return "?";
}

PipelineRun run_pipelined(std::int64_t num_chunks, const StageCost& costs,
                          const PipelineOptions& options, double chunk_duration_s) {
  if (options.queue_capacity < 1) {
    raise(ErrorKind::kConfig, "inter-stage queue capacity must be >= 1");
  }
  PipelineRun run;
  if (num_chunks <= 0) return run;

  const std::int64_t d = to_us(costs.effective_denoise_ms());
  const std::int64_t v = to_us(costs.decode_ms_per_chunk);
  const std::int64_t warmup = std::max(1, options.warmup_ticks);
  const std::int64_t queue_capacity = options.queue_capacity;

  std::vector<std::int64_t> decode_start(static_cast<std::size_t>(num_chunks));
  std::vector<std::int64_t> decode_end(static_cast<std::size_t>(num_chunks));
  std::int64_t denoise_free = 0;
  std::int64_t decode_prev_end = 0;

  auto& events = run.events;
  for (std::int64_t j = 0; j < warmup + num_chunks - 1; ++j) {
    const std::int64_t chunk = j - (warmup - 1);
    const std::int64_t start = denoise_free;
    const std::int64_t compute_end = start + d;
    events.push_back({PipelineEventType::kDenoiseStart, chunk >= 0 ? chunk : -1, start});

    if (chunk < 0) {
      events.push_back({PipelineEventType::kDenoiseEnd, -1, compute_end});
      denoise_free = compute_end;
      continue;
    }

    // Push blocks while the bounded queue is full; a slot frees when the
    // decoder pops (decode start) of the item queue_capacity places back.
    std::int64_t slot_free = 0;
    if (chunk >= queue_capacity) {
      slot_free = decode_start[static_cast<std::size_t>(chunk - queue_capacity)];
    }
    const std::int64_t enqueue = std::max(compute_end, slot_free);
    if (enqueue > compute_end) {
      events.push_back({PipelineEventType::kStall, chunk, compute_end});
    }
    events.push_back({PipelineEventType::kDenoiseEnd, chunk, enqueue});
    denoise_free = enqueue;

    const std::int64_t ds = std::max(enqueue, decode_prev_end);
    decode_start[static_cast<std::size_t>(chunk)] = ds;
    decode_end[static_cast<std::size_t>(chunk)] = ds + v;
    decode_prev_end = ds + v;
    events.push_back({PipelineEventType::kDecodeStart, chunk, ds});
    events.push_back({PipelineEventType::kDecodeEnd, chunk, ds + v});
  }

  sort_events(events);
  run.metrics = compute_metrics(events, chunk_duration_s);
  return run;
}

PipelineRun sequential_baseline(std::int64_t num_chunks, const StageCost& costs,
                                const PipelineOptions& options,
                                double chunk_duration_s) {
  PipelineRun run;
  if (num_chunks <= 0) return run;

  const std::int64_t d = to_us(costs.effective_denoise_ms());
  const std::int64_t v = to_us(costs.decode_ms_per_chunk);
  const std::int64_t warmup = std::max(1, options.warmup_ticks);

  std::int64_t t = 0;
  auto& events = run.events;
  for (std::int64_t j = 0; j < warmup + num_chunks - 1; ++j) {
    const std::int64_t chunk = j - (warmup - 1);
    events.push_back({PipelineEventType::kDenoiseStart, chunk >= 0 ? chunk : -1, t});
    t += d;
    events.push_back({PipelineEventType::kDenoiseEnd, chunk >= 0 ? chunk : -1, t});
    if (chunk >= 0) {
      events.push_back({PipelineEventType::kDecodeStart, chunk, t});
      t += v;
      events.push_back({PipelineEventType::kDecodeEnd, chunk, t});
    }
  }
  run.metrics = compute_metrics(events, chunk_duration_s);
  return run;
}

PipelineRun run_pipelined_realtime(std::int64_t num_chunks, const StageCost& costs,
                                   const PipelineOptions& options,
                                   double chunk_duration_s) {
  PipelineRun run;
  if (num_chunks <= 0) return run;

  const auto d = std::chrono::duration<double, std::milli>(costs.effective_denoise_ms());
  const auto v = std::chrono::duration<double, std::milli>(costs.decode_ms_per_chunk);
  const std::int64_t warmup = std::max(1, options.warmup_ticks);

  std::mutex events_mutex;
  auto& events = run.events;
  const auto start_time = std::chrono::steady_clock::now();
  auto stamp = [&start_time] {
    return std::chrono::duration_cast<std::chrono::microseconds>(
               std::chrono::steady_clock::now() - start_time)
        .count();
  };
  auto record = [&](PipelineEventType type, std::int64_t chunk, std::int64_t ts) {
    std::lock_guard<std::mutex> lock(events_mutex);
    events.push_back({type, chunk, ts});
  };

  BoundedChannel<std::int64_t> queue(static_cast<std::size_t>(options.queue_capacity));

  std::thread producer([&] {
    for (std::int64_t j = 0; j < warmup + num_chunks - 1; ++j) {
      const std::int64_t chunk = j - (warmup - 1);
      record(PipelineEventType::kDenoiseStart, chunk >= 0 ? chunk : -1, stamp());
      std::this_thread::sleep_for(d);
      if (chunk >= 0) queue.push(chunk);
      record(PipelineEventType::kDenoiseEnd, chunk >= 0 ? chunk : -1, stamp());
    }
    queue.close();
  });
  std::thread consumer([&] {
    while (auto chunk = queue.pop()) {
      record(PipelineEventType::kDecodeStart, *chunk, stamp());
      std::this_thread::sleep_for(v);
      record(PipelineEventType::kDecodeEnd, *chunk, stamp());
    }
  });
  producer.join();
  consumer.join();

  sort_events(events);
  run.metrics = compute_metrics(events, chunk_duration_s);
  return run;
}

CommCost comm_cost(ParallelStrategy strategy, const CommConfig& config) {
  if (config.workers < 1 || config.layers < 1 || config.frames < 1 ||
      config.tokens_per_frame < 1 || config.context_frames < 1) {
    raise(ErrorKind::kConfig, "comm config values must all be >= 1");
  }
  const auto w = static_cast<std::uint64_t>(config.workers);
  const auto l = static_cast<std::uint64_t>(config.layers);
  const auto nf = static_cast<std::uint64_t>(config.frames);
  const auto t = static_cast<std::uint64_t>(config.tokens_per_frame);
  const auto m = static_cast<std::uint64_t>(config.context_frames);
  constexpr std::uint64_t kBytesPerValue = 4;

  if (w == 1) return CommCost{0, 0};

  CommCost cost;
  if (strategy == ParallelStrategy::kTokenLevel) {
    // Two all-to-alls per layer, N_f*T/W tokens per peer message; the /W
    // cancels against the W message sources.
    cost.messages = 2 * l * w * (w - 1);
    cost.bytes = 2 * l * (w - 1) * nf * t * kBytesPerValue;
  } else {
    // One gather of context-frame keys and values: M*T/W each per peer.
    cost.messages = l * w * (w - 1);
    cost.bytes = 2 * l * (w - 1) * m * t * kBytesPerValue;
  }
  return cost;
}

PipelineMetrics compute_metrics(std::span<const PipelineEvent> events,
                                double tick_duration_s) {
  if (events.empty()) {
    raise(ErrorKind::kState, "empty pipeline event log");
  }

  PipelineMetrics metrics;
  std::vector<std::int64_t> decode_ends;
  int depth = 0;
  for (const auto& event : events) {
    switch (event.type) {
      case PipelineEventType::kDecodeEnd:
        decode_ends.push_back(event.timestamp_us);
        break;
      case PipelineEventType::kDenoiseEnd:
        if (event.chunk_id >= 0) {
          ++depth;
          metrics.max_queue_depth = std::max(metrics.max_queue_depth, depth);
        }
        break;
      case PipelineEventType::kDecodeStart:
        --depth;
        break;
      default:
        break;
    }
  }

  metrics.chunks_emitted = static_cast<std::int64_t>(decode_ends.size());
  if (decode_ends.empty()) return metrics;

  metrics.ttff_s = static_cast<double>(decode_ends.front()) / kUsPerS;
  metrics.elapsed_s = static_cast<double>(decode_ends.back()) / kUsPerS;
  metrics.rtf = metrics.elapsed_s > 0.0
                    ? tick_duration_s * static_cast<double>(decode_ends.size()) /
                          metrics.elapsed_s
                    : 0.0;

  if (decode_ends.size() >= 2) {
    std::vector<double> periods_ms;
    periods_ms.reserve(decode_ends.size() - 1);
    for (std::size_t i = 1; i < decode_ends.size(); ++i) {
      periods_ms.push_back(static_cast<double>(decode_ends[i] - decode_ends[i - 1]) /
                           kUsPerMs);
    }
    double mean = 0.0;
    for (const double p : periods_ms) mean += p;
    mean /= static_cast<double>(periods_ms.size());
    double var = 0.0;
    for (const double p : periods_ms) var += (p - mean) * (p - mean);
    var /= static_cast<double>(periods_ms.size());
    metrics.mean_period_ms = mean;
    metrics.jitter_ms = std::sqrt(var);
  }
  return metrics;
}

std::string render_event_log(std::span<const PipelineEvent> events) {
  std::ostringstream oss;
  char line[96];
  for (const auto& event : events) {
    std::snprintf(line, sizeof(line), "%s,%lld,%.3f", to_string(event.type),
                  static_cast<long long>(event.chunk_id),
                  static_cast<double>(event.timestamp_us) / kUsPerMs);
    oss << line << '\n';
  }
  return oss.str();
}

std::string metrics_json(const PipelineMetrics& metrics) {
  nlohmann::json j;
  j["ttff_s"] = metrics.ttff_s;
  j["rtf"] = metrics.rtf;
  j["mean_period_ms"] = metrics.mean_period_ms;
  j["jitter_ms"] = metrics.jitter_ms;
  j["max_queue_depth"] = metrics.max_queue_depth;
  j["chunks_emitted"] = metrics.chunks_emitted;
  j["elapsed_s"] = metrics.elapsed_s;
  return j.dump(2);
}

}  // namespace streamforge
