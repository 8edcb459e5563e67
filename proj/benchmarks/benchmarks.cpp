#include <benchmark/benchmark.h>

#include "streamforge/attention_mask.hpp"
#include "streamforge/pipeline.hpp"
#include "streamforge/scheduler.hpp"
#include "streamforge/wire.hpp"

namespace {

using namespace streamforge;

SessionConfig config_with_dim(int latent_dim) {
  SessionConfig config;
  config.latent_dim = latent_dim;
  config.refine_interval_chunks = 8;
  return validate_config(config);
}

void BM_SchedulerSession(benchmark::State& state) {
  const auto config = config_with_dim(static_cast<int>(state.range(0)));
  const ToyFlowModel engine(NoiseLadder(config.stream_chunks, config.micro_steps),
                            config.latent_dim, config.rng_seed);
  const Latent reference = make_reference_latent(config);
  const auto slices = make_synthetic_slices(64);
  for (auto _ : state) {
    TraceConditionSource conds(slices);
    SimClock clock;
    const auto result = run_session(config, reference, conds, engine, clock);
    benchmark::DoNotOptimize(result.records.data());
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_SchedulerSession)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_GroupMaskBuild(benchmark::State& state) {
  std::vector<GroupTag> layout{{GroupKind::kReference, 0}};
  for (int i = 0; i < 3; ++i) layout.push_back({GroupKind::kLongTerm, i});
  layout.push_back({GroupKind::kShortTerm, 0});
  for (int j = 0; j < 3; ++j) layout.push_back({GroupKind::kStream, j});
  for (auto _ : state) {
    const GroupMask mask = build_group_mask(layout);
    benchmark::DoNotOptimize(mask.false_cell_count());
  }
}
BENCHMARK(BM_GroupMaskBuild);

void BM_TokenMaskExpand(benchmark::State& state) {
  std::vector<GroupTag> layout{{GroupKind::kReference, 0}, {GroupKind::kShortTerm, 0}};
  for (int j = 0; j < 3; ++j) layout.push_back({GroupKind::kStream, j});
  const GroupMask mask = build_group_mask(layout);
  std::map<GroupTag, int> counts;
  for (const auto& tag : layout) counts[tag] = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const TokenMask tokens = expand_to_token_mask(mask, counts);
    benchmark::DoNotOptimize(tokens.cells.data());
  }
}
BENCHMARK(BM_TokenMaskExpand)->Arg(16)->Arg(128);

void BM_PipelineSimulation(benchmark::State& state) {
  StageCost costs;
  costs.denoise_ms_per_tick = 480.0;
  costs.decode_ms_per_chunk = 60.0;
  const PipelineOptions options;
  for (auto _ : state) {
    const auto run = run_pipelined(state.range(0), costs, options, 0.48);
    benchmark::DoNotOptimize(run.metrics.mean_period_ms);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PipelineSimulation)->Arg(1000)->Arg(10000);

void BM_AggregateAudio(benchmark::State& state) {
  const auto config = config_with_dim(16);
  const std::vector<float> pcm(16000, 0.25f);  // one second
  for (auto _ : state) {
    const auto frames = aggregate_audio(pcm, config);
    benchmark::DoNotOptimize(frames.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(pcm.size()) * 4);
}
BENCHMARK(BM_AggregateAudio);

void BM_ChunkOutRoundTrip(benchmark::State& state) {
  ChunkOutPayload payload;
  payload.chunk_id = 12;
  payload.video_pts_start = 5.76;
  payload.video_pts_end = 6.24;
  payload.latent_values.assign(16 * 3, 1.5f);
  payload.emit_timestamp = 6.3;
  for (auto _ : state) {
    WireFrame frame;
    frame.type = FrameType::kChunkOut;
    frame.payload = encode_chunk_out_payload(payload);
    const auto bytes = encode_frame(frame);
    const auto outcome = decode_frame(bytes);
    benchmark::DoNotOptimize(outcome.frame.payload.data());
  }
}
BENCHMARK(BM_ChunkOutRoundTrip);

}  // namespace

BENCHMARK_MAIN();
