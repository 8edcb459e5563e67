// Acceptance suite: every runtime contract in one binary, one verdict line
// per criterion. Returns nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "streamforge/attention_mask.hpp"
#include "streamforge/denoise.hpp"
#include "streamforge/pipeline.hpp"
#include "streamforge/scheduler.hpp"
#include "streamforge/wire.hpp"

using namespace streamforge;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& name, const std::function<bool()>& body) {
  bool ok = false;
  std::string detail;
  try {
    ok = body();
  } catch (const std::exception& e) {
    detail = std::string(" (") + e.what() + ")";
  }
  std::printf("[%s] criterion %2d: %s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
              detail.c_str());
  if (!ok) ++g_failures;
}

SessionConfig default_config(int latent_dim = 8) {
  SessionConfig config;
  config.latent_dim = latent_dim;
  return validate_config(config);
}

double norm_diff(const LatentVector& a, const LatentVector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum);
}

std::vector<TraceEvent> silence_trace(double seconds) {
  std::ostringstream oss;
  oss << "0 prompt idle\n0 audio silence " << seconds << "\n" << seconds << " end\n";
  return parse_trace(oss.str());
}

// 1. Buffer capacity contract: 10,000 randomized operations, capacities never
//    exceeded, under five seconds.
bool buffer_capacity_contract() {
  const auto start = std::chrono::steady_clock::now();
  const auto config = default_config();
  const NoiseLadder ladder(config.stream_chunks, config.micro_steps);
  MemoryBank bank(make_reference_latent(config), config);
  std::mt19937_64 rng(1);
  std::int64_t next_id = 0;

  for (int op = 0; op < 10000; ++op) {
    switch (rng() % 4) {
      case 0:
        if (bank.stream().size() < 3 &&
            (bank.stream().empty() || bank.stream().back().noise.t < 1.0)) {
          bank.admit_noise_chunk(make_noise_chunk(next_id++, config));
        }
        break;
      case 1:
        if (!bank.stream().empty() && !bank.stream().front().clean()) {
          for (auto& chunk : bank.stream_mut()) {
            chunk.noise = ladder.after_steps(chunk.noise.ladder_index + 1);
          }
        }
        break;
      case 2:
        if (!bank.stream().empty() && bank.stream().front().clean()) {
          bank.promote_clean_chunk();
        }
        break;
      case 3:
        if (bank.short_term().has_value()) {
          Chunk repaired = *bank.short_term();
          repaired.latents[0].data[0] += 1e-3;
          bank.replace_short_term(repaired);
        }
        break;
    }
    bank.check_invariants();
    if (bank.long_term().size() > 3 || bank.stream().size() > 3) return false;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("       capacity sequences: 10000 ops in %.3f s\n", elapsed);
  return elapsed < 5.0;
}

// 2. Throughput contract: every steady tick of a 200-chunk session emits
//    exactly one chunk; emitted video time is exact.
bool throughput_contract() {
  const auto config = default_config();
  const ToyFlowModel engine(NoiseLadder(3, 1), config.latent_dim, config.rng_seed);
  SimClock clock;
  Scheduler scheduler(config, engine, clock);
  scheduler.warmup(make_reference_latent(config));
  TraceConditionSource conds(make_synthetic_slices(200));

  std::vector<EmissionRecord> records;
  while (scheduler.phase() != Phase::kDone) {
    const bool steady_before = scheduler.phase() == Phase::kSteady;
    const auto record = scheduler.tick(conds);
    const bool steady_after = scheduler.phase() == Phase::kSteady;
    if (steady_before && steady_after && !record.has_value()) return false;
    if (record.has_value()) records.push_back(*record);
  }
  if (records.size() != 200) return false;

  const double duration = chunk_duration(config);
  for (std::size_t c = 0; c < records.size(); ++c) {
    if (records[c].video_pts_start != static_cast<double>(c) * duration) return false;
    if (records[c].video_pts_end != static_cast<double>(c + 1) * duration) return false;
  }
  return records.back().video_pts_end == 200.0 * duration;
}

// 3. 3-NFE contract: noise histories walk [1, 2/3, 1/3, 0]; stream NFEs are
//    exactly three per chunk with refinement accounted apart.
bool three_nfe_contract() {
  const auto config = default_config();
  const ToyFlowModel engine(NoiseLadder(3, 1), config.latent_dim, config.rng_seed);
  SimClock clock;
  TraceConditionSource conds(make_synthetic_slices(200));
  const auto result = run_session(config, make_reference_latent(config), conds,
                                  engine, clock);
  if (result.records.size() != 200) return false;

  const double expected[] = {1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0};
  for (const auto& record : result.records) {
    if (record.noise_history.size() != 4) return false;
    for (int i = 0; i < 4; ++i) {
      if (std::abs(record.noise_history[static_cast<std::size_t>(i)] - expected[i]) >
          1e-9) {
        return false;
      }
    }
  }
  std::printf("       stream NFEs: %lld (3 x 200), refinement NFEs: %lld\n",
              static_cast<long long>(result.stats.stream_nfe),
              static_cast<long long>(result.stats.refine_nfe));
  return result.stats.stream_nfe == 3 * 200;
}

// 4. TTFF contract: 0.48 s ticks + 60 ms decode give 1.50 s; the nominal
//    0.5 s tick gives 1.56 s.
bool ttff_contract() {
  StageCost costs;
  costs.decode_ms_per_chunk = 60.0;
  const PipelineOptions options;

  costs.denoise_ms_per_tick = 480.0;
  const double ttff_a = run_pipelined(10, costs, options, 0.48).metrics.ttff_s;
  costs.denoise_ms_per_tick = 500.0;
  const double ttff_b = run_pipelined(10, costs, options, 0.5).metrics.ttff_s;
  std::printf("       ttff: %.6f s at 0.48 s ticks, %.6f s at 0.5 s ticks\n", ttff_a,
              ttff_b);
  return std::abs(ttff_a - 1.50) <= 1e-6 && std::abs(ttff_b - 1.56) <= 1e-6;
}

// 5. Mask asymmetry over 1000 randomized bank layouts.
bool mask_asymmetry() {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<GroupTag> layout{{GroupKind::kReference, 0}};
    const int long_term = static_cast<int>(rng() % 4);
    for (int i = 0; i < long_term; ++i) layout.push_back({GroupKind::kLongTerm, i});
    const bool short_term = (rng() % 2) == 0;
    if (short_term) layout.push_back({GroupKind::kShortTerm, 0});
    const int stream = static_cast<int>(rng() % 4);
    for (int j = 0; j < stream; ++j) layout.push_back({GroupKind::kStream, j});

    const GroupMask mask = build_group_mask(layout);
    std::size_t context_count = 0, stream_count = 0;
    for (const auto& tag : layout) {
      (tag.kind == GroupKind::kStream ? stream_count : context_count)++;
    }
    if (mask.false_cell_count() != context_count * stream_count) return false;
    for (std::size_t q = 0; q < mask.size(); ++q) {
      const bool q_stream = layout[q].kind == GroupKind::kStream;
      for (std::size_t k = 0; k < mask.size(); ++k) {
        const bool k_stream = layout[k].kind == GroupKind::kStream;
        const bool expected = q_stream || !k_stream;
        if (mask.allowed(q, k) != expected) return false;
      }
    }
  }
  return true;
}

// 6. Refinement efficacy: drifting engine + exact repair over 100 chunks;
//    the short-term error drops at every firing and nothing else changes.
bool refinement_efficacy() {
  SessionConfig config = default_config();
  config.refine_interval_chunks = 8;
  config = validate_config(config);
  const NoiseLadder ladder(3, 1);
  const ToyFlowModel exact(ladder, config.latent_dim, config.rng_seed, 0.5, 0.0);
  const DriftModel drift(exact, constant_bias(config.latent_dim, 0.01));
  const Latent reference = make_reference_latent(config);
  const LatentVector truth = exact.target(0, ConditionSlice{}.digest(), reference);

  SimClock clock;
  Scheduler scheduler(config, drift, clock, &exact);
  scheduler.warmup(reference);
  TraceConditionSource conds(make_synthetic_slices(100));

  std::optional<Chunk> promoted;
  scheduler.set_emission_callback(
      [&promoted](const EmissionRecord&, const Chunk& chunk) { promoted = chunk; });

  int firings = 0;
  while (scheduler.phase() != Phase::kDone) {
    const auto record = scheduler.tick(conds);
    if (!record.has_value() || !record->refined_memory_flag) continue;
    ++firings;
    const Chunk& post = *scheduler.bank().short_term();
    for (std::size_t j = 0; j < post.latents.size(); ++j) {
      const double before = norm_diff(promoted->latents[j].data, truth);
      const double after = norm_diff(post.latents[j].data, truth);
      if (!(after < before)) return false;
    }
  }

  // Isolation probe: a direct refinement touches only the short-term bytes.
  const Latent ref_before = scheduler.bank().reference();
  const auto long_term_before = scheduler.bank().long_term();
  const auto stream_before = scheduler.bank().stream();
  const Chunk short_before = *scheduler.bank().short_term();
  if (!scheduler.refine()) return false;
  const bool isolated = scheduler.bank().reference() == ref_before &&
                        scheduler.bank().long_term() == long_term_before &&
                        scheduler.bank().stream() == stream_before &&
                        scheduler.bank().short_term()->chunk_id == short_before.chunk_id;
  std::printf("       refinement firings: %d, isolation verified: %s\n", firings,
              isolated ? "yes" : "no");
  return firings == 12 && isolated;  // emissions 8, 16, ..., 96
}

// 7. Pipeline bottleneck law over 50 randomized cost pairs.
bool pipeline_bottleneck_law() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> cost_ms(1.0, 1000.0);
  const PipelineOptions options;
  for (int trial = 0; trial < 50; ++trial) {
    const double d = cost_ms(rng);
    const double v = cost_ms(rng);
    StageCost costs;
    costs.denoise_ms_per_tick = d;
    costs.decode_ms_per_chunk = v;
    const auto pipelined = run_pipelined(30, costs, options, 0.48);
    const auto sequential = sequential_baseline(30, costs, options, 0.48);
    if (std::abs(pipelined.metrics.mean_period_ms - std::max(d, v)) > 1e-3 + 1e-9) {
      return false;
    }
    if (!(pipelined.metrics.elapsed_s < sequential.metrics.elapsed_s)) return false;
  }
  return true;
}

// 8. Parallelism cost model over a 100-configuration sweep.
bool parallelism_cost_model() {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    CommConfig config;
    config.workers = 2 + static_cast<int>(rng() % 15);
    config.layers = 1 + static_cast<int>(rng() % 64);
    config.frames = 1 + static_cast<int>(rng() % 48);
    config.tokens_per_frame = 1 + static_cast<int>(rng() % 4096);
    config.context_frames = 1 + static_cast<int>(rng() % 48);
    const CommCost token = comm_cost(ParallelStrategy::kTokenLevel, config);
    const CommCost frame = comm_cost(ParallelStrategy::kFrameLevel, config);
    if (frame.messages * 2 != token.messages) return false;
    if ((frame.bytes < token.bytes) != (config.context_frames < config.frames)) {
      return false;
    }
  }
  return true;
}

// 9. Audio rate contract: 25 features per second, count = ceil(n / 640).
bool audio_rate_contract() {
  SessionConfig config = default_config();
  const std::vector<float> one_second(16000, 0.1f);
  if (aggregate_audio(one_second, config).size() != 25) return false;

  config.audio_feature_dim = 1;
  const std::vector<float> buffer(160000, 0.0f);
  const std::span<const float> all(buffer);
  for (std::size_t n = 0; n <= buffer.size(); n += 7) {
    if (aggregate_audio(all.subspan(0, n), config).size() != (n + 639) / 640) {
      return false;
    }
  }
  return true;
}

// 10. Oracle equivalence on a 20-chunk session with memory-independent targets.
bool oracle_equivalence() {
  const auto config = default_config();
  const NoiseLadder ladder(3, 1);
  const ToyFlowModel model(ladder, config.latent_dim, config.rng_seed);
  const Latent reference = make_reference_latent(config);
  const auto slices = make_synthetic_slices(20);

  std::vector<Chunk> streamed;
  TraceConditionSource conds(slices);
  SimClock clock;
  Scheduler scheduler(config, model, clock);
  scheduler.set_emission_callback(
      [&streamed](const EmissionRecord&, const Chunk& chunk) {
        streamed.push_back(chunk);
      });
  scheduler.warmup(reference);
  while (scheduler.phase() != Phase::kDone) scheduler.tick(conds);

  const auto oracle = full_sequence_oracle(20, slices, model, ladder, reference, config);
  if (streamed.size() != oracle.size()) return false;
  for (std::size_t c = 0; c < oracle.size(); ++c) {
    for (std::size_t j = 0; j < oracle[c].latents.size(); ++j) {
      if (norm_diff(streamed[c].latents[j].data, oracle[c].latents[j].data) > 1e-9) {
        return false;
      }
    }
  }
  return true;
}

// 11. Self-forcing data preparation: exact reconstruction and mixing rate.
bool self_forcing_data_prep() {
  const auto config = default_config();
  const NoiseLadder ladder(3, 1);
  const Latent reference = make_reference_latent(config);
  const ContextView context = ContextView::reference_only(reference);

  Chunk gt = make_noise_chunk(0, config);
  gt.noise = NoiseLevel{0.0, 3};
  for (auto& latent : gt.latents) {
    latent.data.assign(static_cast<std::size_t>(config.latent_dim), 0.4);
  }

  // A model whose target is the ground truth itself must reproduce it.
  class IdentityModel : public DenoiseStep {
   public:
    IdentityModel(NoiseLadder ladder, LatentVector target)
        : ladder_(std::move(ladder)), target_(std::move(target)) {}
    void step(std::span<Chunk> stream, const ContextView&, const GroupMask&,
              std::span<const ConditionSlice>) const override {
      for (auto& chunk : stream) {
        const NoiseLevel next = ladder_.next_below_time(chunk.noise.t);
        for (auto& latent : chunk.latents) {
          latent.data = toy_flow_step(latent.data, chunk.noise.t, next.t, target_);
        }
        chunk.noise = next;
      }
    }

   private:
    NoiseLadder ladder_;
    LatentVector target_;
  };
  const IdentityModel identity(ladder, gt.latents[0].data);
  const Chunk regenerated =
      make_generated_gt(gt, 1.0, identity, ladder, context, ConditionSlice{}, 33);
  for (std::size_t j = 0; j < regenerated.latents.size(); ++j) {
    if (norm_diff(regenerated.latents[j].data, gt.latents[j].data) > 1e-9) return false;
  }

  Chunk generated = gt;
  generated.latents[0].data[0] += 1.0;
  auto rng = std::mt19937_64(42);
  int picked_generated = 0;
  for (int i = 0; i < 10000; ++i) {
    if (mix_memory_source(gt, generated, 0.3, rng).tag == MemorySourceTag::kGenerated) {
      ++picked_generated;
    }
  }
  const double freq = picked_generated / 10000.0;
  std::printf("       generated-GT mix frequency at p=0.3: %.4f\n", freq);
  return std::abs(freq - 0.3) <= 0.02;
}

// 12. Protocol robustness: decode fuzzing and the round-trip property.
bool protocol_robustness() {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 100000; ++trial) {
    std::vector<std::uint8_t> junk(rng() % 96);
    for (auto& byte : junk) byte = static_cast<std::uint8_t>(rng());
    const auto outcome = decode_frame(junk);
    if (outcome.status != DecodeOutcome::Status::kFrame &&
        outcome.status != DecodeOutcome::Status::kIncomplete &&
        outcome.status != DecodeOutcome::Status::kError) {
      return false;
    }
  }
  const FrameType types[] = {FrameType::kHello, FrameType::kAudio, FrameType::kPrompt,
                             FrameType::kChunkOut, FrameType::kMetrics, FrameType::kEnd};
  for (int trial = 0; trial < 2000; ++trial) {
    WireFrame frame;
    frame.type = types[rng() % std::size(types)];
    frame.payload.resize(rng() % 256);
    for (auto& byte : frame.payload) byte = static_cast<std::uint8_t>(rng());
    const auto bytes = encode_frame(frame);
    const auto outcome = decode_frame(bytes);
    if (outcome.status != DecodeOutcome::Status::kFrame) return false;
    if (!(outcome.frame == frame) || outcome.consumed != bytes.size()) return false;
  }
  return true;
}

// 13. Determinism: two CLI runs with identical config/trace/seed produce
//     byte-identical emission logs.
bool cli_determinism() {
#ifndef STREAMFORGE_CLI_PATH
  std::printf("       CLI path not configured\n");
  return false;
#else
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "streamforge_acceptance";
  fs::create_directories(dir);
  const fs::path trace = dir / "determinism.trace";
  {
    std::ofstream out(trace);
    out << "0 prompt hello there\n0 audio sine 440 3.0 0.5\n1.5 prompt keep going\n"
        << "4.0 end\n";
  }
  auto run_once = [&](const fs::path& log) {
    std::ostringstream cmd;
    cmd << STREAMFORGE_CLI_PATH << " run --trace " << trace << " --out " << log
        << " --seed 99 --sim-clock > /dev/null 2>&1";
    return std::system(cmd.str().c_str()) == 0;
  };
  const fs::path log_a = dir / "a.jsonl";
  const fs::path log_b = dir / "b.jsonl";
  if (!run_once(log_a) || !run_once(log_b)) return false;

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
  };
  const std::string a = slurp(log_a);
  const std::string b = slurp(log_b);
  std::printf("       emission log: %zu bytes, identical: %s\n", a.size(),
              a == b ? "yes" : "no");
  return !a.empty() && a == b;
#endif
}

}  // namespace

int main() {
  std::printf("streamforge acceptance suite\n");
  criterion(1, "buffer capacity contract (10k randomized ops, < 5 s)",
            buffer_capacity_contract);
  criterion(2, "throughput contract (one chunk per steady tick, exact video time)",
            throughput_contract);
  criterion(3, "3-NFE contract (noise history and step accounting)",
            three_nfe_contract);
  criterion(4, "TTFF contract (1.50 s / 1.56 s decompositions)", ttff_contract);
  criterion(5, "mask asymmetry (1000 randomized layouts)", mask_asymmetry);
  criterion(6, "refinement efficacy (drift repair + isolation)", refinement_efficacy);
  criterion(7, "pipeline bottleneck law (50 randomized cost pairs)",
            pipeline_bottleneck_law);
  criterion(8, "parallelism cost model (100-configuration sweep)",
            parallelism_cost_model);
  criterion(9, "audio rate contract (25 features/s, ceil sweep)", audio_rate_contract);
  criterion(10, "oracle equivalence (20-chunk streaming vs joint denoise)",
            oracle_equivalence);
  criterion(11, "self-forcing data prep (exact regen + mix frequency)",
            self_forcing_data_prep);
  criterion(12, "protocol robustness (100k fuzz + round trip)", protocol_robustness);
  criterion(13, "determinism (byte-identical CLI emission logs)", cli_determinism);

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 13 criteria passed\n");
  return 0;
}
