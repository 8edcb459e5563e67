#include "streamforge/scheduler.hpp"

#include <cmath>
#include <thread>

#include <nlohmann/json.hpp>

#include "streamforge/error.hpp"
#include "streamforge/log.hpp"
#include "streamforge/rng.hpp"

namespace streamforge {

RealtimeClock::RealtimeClock() : start_(std::chrono::steady_clock::now()) {}

double RealtimeClock::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void RealtimeClock::advance(double dt) {
  cursor_s_ += dt;
  const auto target = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(cursor_s_));
  if (std::chrono::steady_clock::now() > target) {
    ++overruns_;
    log_warn("tick overran its " + std::to_string(dt) + " s budget");
  } else {
    std::this_thread::sleep_until(target);
  }
}

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::kWarmup: return "Warmup";
    case Phase::kSteady: return "Steady";
    case Phase::kDrain: return "Drain";
    case Phase::kDone: return "Done";
  }
  return "?";
}

Scheduler::Scheduler(SessionConfig config, const DenoiseStep& engine, Clock& clock,
                     const DenoiseStep* repair_engine)
    : config_(validate_config(std::move(config))),
      engine_(&engine),
      repair_engine_(repair_engine != nullptr ? repair_engine : &engine),
      clock_(&clock),
      ladder_(config_.stream_chunks, config_.micro_steps),
      tick_duration_(chunk_duration(config_)),
      next_refine_at_(config_.refine_interval_chunks) {}

void Scheduler::warmup(Latent reference) {
  warmup(MemoryBank(std::move(reference), config_));
}

void Scheduler::warmup(MemoryBank bank) {
  if (warmed_up_) {
    raise(ErrorKind::kState, "warmup called twice");
  }
  bank_ = std::move(bank);
  warmed_up_ = true;
  phase_ = Phase::kWarmup;
}

const MemoryBank& Scheduler::bank() const {
  if (!bank_.has_value()) {
    raise(ErrorKind::kState, "scheduler not warmed up");
  }
  return *bank_;
}

void Scheduler::run_steps() {
  auto stream = bank_->stream_mut();
  if (stream.empty()) return;
  for (int m = 0; m < config_.micro_steps; ++m) {
    const ContextView context = bank_->snapshot_context();
    const GroupMask mask = build_group_mask(context);
    std::vector<double> before(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) before[i] = stream[i].noise.t;
    try {
      engine_->step(stream, context, mask,
                    std::span<const ConditionSlice>(stream_conds_.data(), stream.size()));
    } catch (const std::exception& e) {
      raise(ErrorKind::kEngine,
            "tick " + std::to_string(tick_index_) + ": " + e.what());
    }
    ++stats_.step_calls;
    stats_.stream_nfe += static_cast<std::int64_t>(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
      noise_histories_[i].push_back(stream[i].noise.t);
      if (sink_) {
        sink_(StepRecord{stream[i].chunk_id,
                         static_cast<int>(noise_histories_[i].size()) - 2,
                         before[i], stream[i].noise.t});
      }
    }
  }
}

std::optional<EmissionRecord> Scheduler::promote_if_clean() {
  if (bank_->stream().empty() || !bank_->stream().front().clean()) {
    return std::nullopt;
  }
  const Chunk promoted = bank_->promote_clean_chunk();
  short_term_cond_ = stream_conds_.front();
  stream_conds_.erase(stream_conds_.begin());

  EmissionRecord record;
  record.chunk_id = promoted.chunk_id;
  record.video_pts_start = static_cast<double>(promoted.chunk_id) * tick_duration_;
  record.video_pts_end = static_cast<double>(promoted.chunk_id + 1) * tick_duration_;
  record.noise_history = std::move(noise_histories_.front());
  noise_histories_.erase(noise_histories_.begin());
  ++chunks_emitted_;

  if (on_emission_) {
    // wall_time is stamped after the clock advances; defer the callback too.
    pending_emission_chunk_ = promoted;
  }
  return record;
}

std::optional<EmissionRecord> Scheduler::tick(ConditionSource& conds) {
  if (!warmed_up_) {
    raise(ErrorKind::kState, "tick before warmup");
  }
  if (phase_ == Phase::kDone) {
    raise(ErrorKind::kState, "tick after session completed");
  }

  // (a) admission: one fresh pure-noise chunk per tick while conditioning
  // lasts and the stream has room.
  if (phase_ != Phase::kDrain &&
      static_cast<int>(bank_->stream().size()) < config_.stream_chunks) {
    std::optional<ConditionSlice> slice = conds.acquire(admitted_);
    if (!slice.has_value()) {
      phase_ = Phase::kDrain;
    } else {
      Chunk chunk = make_noise_chunk(admitted_, config_);
      bank_->admit_noise_chunk(std::move(chunk));
      stream_conds_.push_back(std::move(*slice));
      noise_histories_.push_back({1.0});
      ++admitted_;
    }
  }

  if (phase_ == Phase::kDrain && bank_->stream().empty()) {
    phase_ = Phase::kDone;
    return std::nullopt;
  }

  // (b) exactly micro_steps step calls over the stream.
  run_steps();

  // (c) promotion and emission.
  std::optional<EmissionRecord> record = promote_if_clean();
  if (record.has_value() && phase_ == Phase::kWarmup) {
    phase_ = Phase::kSteady;
  }

  // (d) periodic memory refinement.
  if (chunks_emitted_ >= next_refine_at_) {
    bool refined = false;
    try {
      refined = refine();
    } catch (const std::exception& e) {
      raise(ErrorKind::kEngine,
            "tick " + std::to_string(tick_index_) + " (refinement): " + e.what());
    }
    if (refined && record.has_value()) {
      record->refined_memory_flag = true;
    }
  }

  clock_->advance(tick_duration_);
  ++tick_index_;
  ++stats_.ticks;

  if (record.has_value()) {
    record->wall_time_emitted = clock_->now();
    if (on_emission_ && pending_emission_chunk_.has_value()) {
      on_emission_(*record, *pending_emission_chunk_);
      pending_emission_chunk_.reset();
    }
  }

  if (phase_ == Phase::kDrain && bank_->stream().empty()) {
    phase_ = Phase::kDone;
  }
  return record;
}

bool Scheduler::refine() {
  if (!warmed_up_) {
    raise(ErrorKind::kState, "refine before warmup");
  }
  if (!bank_->short_term().has_value()) {
    log_warn("refinement scheduled with no short-term chunk; skipping");
    ++stats_.refine_skips;
    return false;
  }

  const double t_inject = config_.refine_noise_t;
  Chunk chunk = *bank_->short_term();
  int index = ladder_.index_of(t_inject);
  if (index < 0) {
    index = 0;
    while (index < ladder_.depth() && ladder_.at(index) > t_inject) ++index;
  }
  chunk.noise = NoiseLevel{t_inject, index};

  const std::uint64_t noise_seed =
      derive_seed(config_.rng_seed, 0x72656669u /* "refi" */,
                  static_cast<std::uint64_t>(stats_.refine_runs));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t j = 0; j < chunk.latents.size(); ++j) {
    auto rng = make_rng(derive_seed(noise_seed, static_cast<std::uint64_t>(j)));
    for (auto& x : chunk.latents[j].data) {
      x = (1.0 - t_inject) * x + t_inject * normal(rng);
    }
  }

  // Repair sees only the stable groups: reference and long-term memory.
  const ContextView context = bank_->snapshot_context(SnapshotScope::kRefineGuidance);
  const GroupMask mask = build_group_mask(context);
  ConditionSlice cond;
  if (short_term_cond_.has_value()) {
    cond = *short_term_cond_;
  } else {
    cond.chunk_id = chunk.chunk_id;
  }
  std::vector<ConditionSlice> conds{cond};
  std::vector<Chunk> one{std::move(chunk)};
  while (!one.front().clean()) {
    repair_engine_->step(std::span<Chunk>(one), context, mask, conds);
    ++stats_.refine_nfe;
  }
  bank_->replace_short_term(std::move(one.front()));

  ++stats_.refine_runs;
  next_refine_at_ += config_.refine_interval_chunks;
  return true;
}

SessionResult run_session(const SessionConfig& config, const Latent& reference,
                          ConditionSource& conds, const DenoiseStep& engine,
                          Clock& clock, const DenoiseStep* repair_engine,
                          const EmissionCallback& on_emission, TrajectorySink sink) {
  Scheduler scheduler(config, engine, clock, repair_engine);
  if (on_emission) scheduler.set_emission_callback(on_emission);
  if (sink) scheduler.set_trajectory_sink(std::move(sink));
  scheduler.warmup(reference);

  SessionResult result;
  while (scheduler.phase() != Phase::kDone) {
    auto record = scheduler.tick(conds);
    if (record.has_value()) {
      result.records.push_back(std::move(*record));
    }
  }
  result.stats = scheduler.stats();
  return result;
}

SessionResult run_session(const SessionConfig& config, const Latent& reference,
                          const std::vector<TraceEvent>& trace,
                          const DenoiseStep& engine, Clock& clock,
                          const DenoiseStep* repair_engine) {
  const SessionConfig resolved = validate_config(config);
  TraceConditionSource conds(trace, resolved, latent_digest(reference));
  return run_session(resolved, reference, conds, engine, clock, repair_engine);
}

std::string emission_record_json(const EmissionRecord& record) {
  nlohmann::json j;
  j["chunk_id"] = record.chunk_id;
  j["video_pts_start"] = record.video_pts_start;
  j["video_pts_end"] = record.video_pts_end;
  j["wall_time_emitted"] = record.wall_time_emitted;
  j["noise_history"] = record.noise_history;
  j["refined_memory"] = record.refined_memory_flag;
  return j.dump();
}

void write_emission_log(std::ostream& out, const std::vector<EmissionRecord>& records) {
  for (const auto& record : records) {
    out << emission_record_json(record) << '\n';
  }
}

PipelineMetrics session_metrics(const std::vector<EmissionRecord>& records,
                                double tick_duration_s) {
  std::vector<PipelineEvent> events;
  events.reserve(records.size());
  for (const auto& record : records) {
    events.push_back({PipelineEventType::kDecodeEnd, record.chunk_id,
                      std::llround(record.wall_time_emitted * 1e6)});
  }
  if (events.empty()) return PipelineMetrics{};
  return compute_metrics(events, tick_duration_s);
}

}  // namespace streamforge
