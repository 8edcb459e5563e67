#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

#include "streamforge/denoise.hpp"
#include "streamforge/error.hpp"

using namespace streamforge;

namespace {

SessionConfig test_config() {
  SessionConfig config;
  config.latent_dim = 4;
  return validate_config(config);
}

double max_abs_diff(const LatentVector& a, const LatentVector& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Test-only model with a constant target; lets every trajectory be checked
// against the hand-derived linear-flow recursion.
class ConstTargetModel : public DenoiseStep {
 public:
  ConstTargetModel(NoiseLadder ladder, LatentVector target)
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

Chunk clean_chunk_with(const SessionConfig& config, double value) {
  Chunk chunk = make_noise_chunk(0, config);
  for (auto& latent : chunk.latents) {
    latent.data.assign(static_cast<std::size_t>(config.latent_dim), value);
  }
  chunk.noise = NoiseLevel{0.0, 3};
  return chunk;
}

}  // namespace

TEST_CASE("toy flow step closed forms") {
  SUBCASE("one step to zero lands on the target from anywhere") {
    const LatentVector x{3.7, -2.1, 100.0};
    const LatentVector target{0.5, 0.25, -1.0};
    CHECK(max_abs_diff(toy_flow_step(x, 1.0, 0.0, target), target) <= 1e-12);
    CHECK(max_abs_diff(toy_flow_step(x, 0.25, 0.0, target), target) <= 1e-12);
  }
  SUBCASE("the target is a fixed point") {
    const LatentVector target{1.0, 2.0};
    CHECK(max_abs_diff(toy_flow_step(target, 0.9, 0.4, target), target) == 0.0);
  }
  SUBCASE("half step from 2 toward 0") {
    const LatentVector out = toy_flow_step({2.0}, 1.0, 0.5, {0.0});
    CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("singular and unordered times are errors") {
    CHECK_THROWS_AS(toy_flow_step({1.0}, 0.0, 0.0, {0.0}), Error);
    CHECK_THROWS_AS(toy_flow_step({1.0}, 0.5, 0.5, {0.0}), Error);
    CHECK_THROWS_AS(toy_flow_step({1.0}, 0.5, 0.9, {0.0}), Error);
  }
  SUBCASE("dimension mismatch is an error") {
    CHECK_THROWS_AS(toy_flow_step({1.0, 2.0}, 1.0, 0.0, {0.0}), Error);
  }
}

TEST_CASE("multi-step and single-step descents agree at t = 0") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 2.0);
  const NoiseLadder ladder(3, 2);
  for (int trial = 0; trial < 50; ++trial) {
    LatentVector x(5), target(5);
    for (auto& v : x) v = normal(rng);
    for (auto& v : target) v = normal(rng);

    LatentVector multi = x;
    double t = 1.0;
    for (int i = 1; i <= ladder.depth(); ++i) {
      const double t_next = i == ladder.depth() ? 0.0 : ladder.at(i);
      multi = toy_flow_step(multi, t, t_next, target);
      t = t_next;
    }
    const LatentVector single = toy_flow_step(x, 1.0, 0.0, target);
    CHECK(max_abs_diff(multi, single) <= 1e-9);
  }
}

TEST_CASE("cfg fold") {
  CHECK(cfg_fold({1.0, 2.0}, {5.0, -3.0}, 1.0) == LatentVector{5.0, -3.0});
  CHECK(cfg_fold({1.0, 2.0}, {5.0, -3.0}, 0.0) == LatentVector{1.0, 2.0});
  const LatentVector folded = cfg_fold({1.0, 1.0}, {3.0, 1.0}, 2.5);
  CHECK(folded[0] == doctest::Approx(6.0));
  CHECK(folded[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(cfg_fold({1.0}, {1.0, 2.0}, 1.0), Error);
}

TEST_CASE("cfg fold linearity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uniform(-4.0, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    LatentVector u(3), c(3);
    for (auto& v : u) v = uniform(rng);
    for (auto& v : c) v = uniform(rng);
    const double s1 = uniform(rng), s2 = uniform(rng);
    const LatentVector lhs_a = cfg_fold(u, c, s1);
    const LatentVector lhs_b = cfg_fold(u, c, s2);
    const LatentVector rhs = cfg_fold(u, c, s1 + s2);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(lhs_a[i] + lhs_b[i] - u[i] - rhs[i]) <= 1e-12);
    }
  }
}

TEST_CASE("step partition") {
  SUBCASE("even split") {
    const auto ranges = partition_steps(24, 3);
    REQUIRE(ranges.size() == 3);
    CHECK(ranges[0] == std::pair<int, int>{0, 8});
    CHECK(ranges[1] == std::pair<int, int>{8, 16});
    CHECK(ranges[2] == std::pair<int, int>{16, 24});
  }
  SUBCASE("singleton segments") {
    const auto ranges = partition_steps(3, 3);
    CHECK(ranges == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}});
  }
  SUBCASE("remainder goes to the front") {
    const auto ranges = partition_steps(10, 3);
    CHECK(ranges == std::vector<std::pair<int, int>>{{0, 4}, {4, 7}, {7, 10}});
  }
  SUBCASE("more segments than steps is an error") {
    CHECK_THROWS_AS(partition_steps(2, 3), Error);
    CHECK_THROWS_AS(partition_steps(5, 0), Error);
  }
}

TEST_CASE("step partition properties") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int total = 1 + static_cast<int>(rng() % 1000);
    const int segments = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(total));
    const auto ranges = partition_steps(total, segments);
    REQUIRE(static_cast<int>(ranges.size()) == segments);
    int cursor = 0;
    int min_size = total, max_size = 0, prev_size = total + 1;
    for (const auto& [begin, end] : ranges) {
      CHECK(begin == cursor);
      CHECK(end > begin);
      cursor = end;
      const int size = end - begin;
      min_size = std::min(min_size, size);
      max_size = std::max(max_size, size);
      CHECK(size <= prev_size);  // larger segments first
      prev_size = size;
    }
    CHECK(cursor == total);
    CHECK(max_size - min_size <= 1);
  }
}

TEST_CASE("toy flow model targets are deterministic and conditioned") {
  const auto config = test_config();
  const NoiseLadder ladder(3, 1);
  const ToyFlowModel model(ladder, config.latent_dim, config.rng_seed);
  const Latent reference = make_reference_latent(config);

  const LatentVector a = model.target(0, 1234, reference);
  const LatentVector b = model.target(0, 1234, reference);
  CHECK(a == b);
  const LatentVector c = model.target(0, 9999, reference);
  CHECK(max_abs_diff(a, c) > 0.0);  // different conditioning moves the target

  // alpha * reference + beta * embedding, with the defaults 0.5 / 0.5.
  const LatentVector embedding = model.condition_embedding(0, 1234);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == doctest::Approx(0.5 * reference.data[i] + 0.5 * embedding[i]));
  }
}

TEST_CASE("a full ladder descent lands every chunk on its target") {
  const auto config = test_config();
  const NoiseLadder ladder(3, 1);
  const ToyFlowModel model(ladder, config.latent_dim, config.rng_seed);
  const Latent reference = make_reference_latent(config);
  const ContextView context = ContextView::reference_only(reference);
  const GroupMask mask = build_group_mask(context);

  const auto conds = make_synthetic_slices(1);
  std::vector<Chunk> stream{make_noise_chunk(0, config)};
  for (int i = 0; i < 3; ++i) {
    model.step(std::span<Chunk>(stream), context, mask,
               std::span<const ConditionSlice>(conds.data(), 1));
  }
  REQUIRE(stream.front().clean());
  const LatentVector expected = model.target(0, conds[0].digest(), reference);
  for (const auto& latent : stream.front().latents) {
    CHECK(max_abs_diff(latent.data, expected) <= 1e-12);
  }
}

TEST_CASE("generated-GT construction") {
  const auto config = test_config();
  const NoiseLadder ladder(3, 1);
  const Latent reference = make_reference_latent(config);
  const ContextView context = ContextView::reference_only(reference);
  const ConditionSlice cond;
  const Chunk gt = clean_chunk_with(config, 0.8);

  SUBCASE("an exact model reproduces the ground truth") {
    const ConstTargetModel exact(ladder, gt.latents[0].data);
    for (const double t_inject : {1.0, 2.0 / 3.0, 1.0 / 3.0}) {
      const Chunk out = make_generated_gt(gt, t_inject, exact, ladder, context, cond, 99);
      REQUIRE(out.clean());
      for (const auto& latent : out.latents) {
        CHECK(max_abs_diff(latent.data, gt.latents[0].data) <= 1e-12);
      }
    }
  }
  SUBCASE("a drifting model deviates by the bias that survives the descent") {
    // Independent oracle: propagate the per-step error e' = e * (t_next/t) + b
    // down the ladder suffix. Every step ending at t = 0 keeps only the final
    // bias, so the surviving deviation is exactly one bias regardless of the
    // injection level.
    const LatentVector bias = constant_bias(config.latent_dim, 0.05);
    const ToyFlowModel base(ladder, config.latent_dim, config.rng_seed, 0.5, 0.0);
    const DriftModel drift(base, bias);

    for (const double t_inject : {1.0, 2.0 / 3.0, 1.0 / 3.0}) {
      double expected_error_scale = 0.0;
      double t = t_inject;
      while (t > 0.0) {
        const double t_next = ladder.next_below_time(t).t;
        expected_error_scale = expected_error_scale * (t > 0.0 ? t_next / t : 0.0) + 1.0;
        t = t_next;
      }
      // The drift model anchors to the base target (no short-term in scope):
      // 0.5 * reference here, not the gt content.
      const LatentVector anchor = base.target(gt.chunk_id, cond.digest(), reference);
      const Chunk out = make_generated_gt(gt, t_inject, drift, ladder, context, cond, 99);
      for (const auto& latent : out.latents) {
        for (std::size_t i = 0; i < latent.data.size(); ++i) {
          CHECK(latent.data[i] ==
                doctest::Approx(anchor[i] + expected_error_scale * bias[i]).epsilon(1e-9));
        }
      }
      CHECK(expected_error_scale == doctest::Approx(1.0));
    }
  }
  SUBCASE("off-ladder injection level is an error") {
    const ConstTargetModel exact(ladder, gt.latents[0].data);
    CHECK_THROWS_AS(make_generated_gt(gt, 0.5, exact, ladder, context, cond, 99), Error);
  }
  SUBCASE("a noisy source chunk is an error") {
    const ConstTargetModel exact(ladder, gt.latents[0].data);
    Chunk noisy = gt;
    noisy.noise = NoiseLevel{1.0, 0};
    CHECK_THROWS_AS(make_generated_gt(noisy, 1.0, exact, ladder, context, cond, 99),
                    Error);
  }
}

TEST_CASE("memory source mixing") {
  const auto config = test_config();
  const Chunk gt = clean_chunk_with(config, 1.0);
  const Chunk generated = clean_chunk_with(config, 2.0);

  SUBCASE("p = 0 always picks ground truth") {
    auto rng = std::mt19937_64(1);
    for (int i = 0; i < 100; ++i) {
      CHECK(mix_memory_source(gt, generated, 0.0, rng).tag ==
            MemorySourceTag::kGroundTruth);
    }
  }
  SUBCASE("p = 1 always picks generated") {
    auto rng = std::mt19937_64(1);
    for (int i = 0; i < 100; ++i) {
      CHECK(mix_memory_source(gt, generated, 1.0, rng).tag ==
            MemorySourceTag::kGenerated);
    }
  }
  SUBCASE("p = 0.3 frequency over 10000 seeded draws") {
    auto rng = std::mt19937_64(42);
    int generated_count = 0;
    for (int i = 0; i < 10000; ++i) {
      if (mix_memory_source(gt, generated, 0.3, rng).tag ==
          MemorySourceTag::kGenerated) {
        ++generated_count;
      }
    }
    const double freq = generated_count / 10000.0;
    CHECK(freq >= 0.28);
    CHECK(freq <= 0.32);
  }
  SUBCASE("probability outside [0, 1] is an error") {
    auto rng = std::mt19937_64(1);
    CHECK_THROWS_AS(mix_memory_source(gt, generated, 1.5, rng), Error);
    CHECK_THROWS_AS(mix_memory_source(gt, generated, -0.1, rng), Error);
  }
  SUBCASE("seeded draws are reproducible") {
    auto rng_a = std::mt19937_64(7);
    auto rng_b = std::mt19937_64(7);
    for (int i = 0; i < 200; ++i) {
      CHECK(mix_memory_source(gt, generated, 0.5, rng_a).tag ==
            mix_memory_source(gt, generated, 0.5, rng_b).tag);
    }
  }
}

TEST_CASE("models are safe to share across threads") {
  const auto config = test_config();
  const NoiseLadder ladder(3, 1);
  const ToyFlowModel model(ladder, config.latent_dim, config.rng_seed);
  const Latent reference = make_reference_latent(config);
  const auto conds = make_synthetic_slices(6);

  std::vector<std::vector<Chunk>> results(4);
  std::vector<std::thread> workers;
  for (auto& out : results) {
    workers.emplace_back([&, out_ptr = &out] {
      *out_ptr = full_sequence_oracle(6, conds, model, ladder, reference, config);
    });
  }
  for (auto& worker : workers) worker.join();
  for (std::size_t i = 1; i < results.size(); ++i) {
    REQUIRE(results[i].size() == results[0].size());
    for (std::size_t c = 0; c < results[0].size(); ++c) {
      CHECK(results[i][c] == results[0][c]);
    }
  }
}

TEST_CASE("full-sequence oracle basics") {
  const auto config = test_config();
  const NoiseLadder ladder(3, 1);
  const ToyFlowModel model(ladder, config.latent_dim, config.rng_seed);
  const Latent reference = make_reference_latent(config);

  SUBCASE("zero chunks give an empty list") {
    CHECK(full_sequence_oracle(0, {}, model, ladder, reference, config).empty());
  }
  SUBCASE("every chunk converges to its own conditioned target") {
    const auto conds = make_synthetic_slices(4);
    const auto chunks = full_sequence_oracle(4, conds, model, ladder, reference, config);
    REQUIRE(chunks.size() == 4);
    for (std::size_t c = 0; c < 4; ++c) {
      REQUIRE(chunks[c].clean());
      const LatentVector expected =
          model.target(static_cast<std::int64_t>(c), conds[c].digest(), reference);
      for (const auto& latent : chunks[c].latents) {
        CHECK(max_abs_diff(latent.data, expected) <= 1e-9);
      }
    }
  }
}
