#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "streamforge/attention_mask.hpp"
#include "streamforge/error.hpp"

using namespace streamforge;

namespace {

std::vector<GroupTag> layout_of(int long_term, bool short_term, int stream) {
  std::vector<GroupTag> layout{{GroupKind::kReference, 0}};
  for (int i = 0; i < long_term; ++i) layout.push_back({GroupKind::kLongTerm, i});
  if (short_term) layout.push_back({GroupKind::kShortTerm, 0});
  for (int j = 0; j < stream; ++j) layout.push_back({GroupKind::kStream, j});
  return layout;
}

bool is_stream(const GroupTag& tag) { return tag.kind == GroupKind::kStream; }

}  // namespace

TEST_CASE("two-group mask") {
  const GroupMask mask = build_group_mask(layout_of(0, false, 1));
  REQUIRE(mask.size() == 2);
  CHECK(mask.allowed(0, 0));
  CHECK_FALSE(mask.allowed(0, 1));  // reference never sees the stream
  CHECK(mask.allowed(1, 0));
  CHECK(mask.allowed(1, 1));
}

TEST_CASE("full bank layout blocks exactly context-rows x stream-cols") {
  const auto layout = layout_of(1, true, 3);  // Ref LT0 ST S0 S1 S2
  const GroupMask mask = build_group_mask(layout);
  std::size_t blocked = 0;
  for (std::size_t q = 0; q < mask.size(); ++q) {
    for (std::size_t k = 0; k < mask.size(); ++k) {
      if (!mask.allowed(q, k)) {
        ++blocked;
        CHECK_FALSE(is_stream(layout[q]));
        CHECK(is_stream(layout[k]));
      }
    }
  }
  CHECK(blocked == 9);  // 3 context groups x 3 stream groups
  CHECK(mask.false_cell_count() == 9);
}

TEST_CASE("reference-only layout is fully visible") {
  const GroupMask mask = build_group_mask(layout_of(0, false, 0));
  REQUIRE(mask.size() == 1);
  CHECK(mask.allowed(0, 0));
}

TEST_CASE("layout must begin with the reference group") {
  CHECK_THROWS_AS(build_group_mask(std::vector<GroupTag>{}), Error);
  CHECK_THROWS_AS(build_group_mask({{GroupKind::kStream, 0}}), Error);
}

TEST_CASE("asymmetry and diagonal over randomized layouts") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const int long_term = static_cast<int>(rng() % 4);
    const bool short_term = (rng() % 2) == 0;
    const int stream = static_cast<int>(rng() % 4);
    const auto layout = layout_of(long_term, short_term, stream);
    const GroupMask mask = build_group_mask(layout);

    std::size_t context_count = 0, stream_count = 0;
    for (std::size_t g = 0; g < layout.size(); ++g) {
      (is_stream(layout[g]) ? stream_count : context_count)++;
    }
    CHECK(mask.false_cell_count() == context_count * stream_count);

    for (std::size_t q = 0; q < mask.size(); ++q) {
      CHECK(mask.allowed(q, q));  // diagonal
      for (std::size_t k = 0; k < mask.size(); ++k) {
        if (is_stream(layout[q])) {
          CHECK(mask.allowed(q, k));  // stream rows all-true
        } else if (is_stream(layout[k])) {
          CHECK_FALSE(mask.allowed(q, k));
          CHECK(mask.allowed(k, q));  // the asymmetry witness
        } else {
          CHECK(mask.allowed(q, k));
        }
      }
    }
  }
}

TEST_CASE("context rows are independent of stream depth") {
  for (int stream_a = 0; stream_a <= 3; ++stream_a) {
    for (int stream_b = 0; stream_b <= 3; ++stream_b) {
      const auto layout_a = layout_of(2, true, stream_a);
      const auto layout_b = layout_of(2, true, stream_b);
      const GroupMask mask_a = build_group_mask(layout_a);
      const GroupMask mask_b = build_group_mask(layout_b);
      // Context block: the first 4 groups (Ref, LT0, LT1, ST) in both.
      for (std::size_t q = 0; q < 4; ++q) {
        for (std::size_t k = 0; k < 4; ++k) {
          CHECK(mask_a.allowed(q, k) == mask_b.allowed(q, k));
        }
      }
    }
  }
}

TEST_CASE("token expansion") {
  SUBCASE("2x3 block expansion of [Ref, S0]") {
    const auto layout = layout_of(0, false, 1);
    const GroupMask mask = build_group_mask(layout);
    std::map<GroupTag, int> counts{{layout[0], 2}, {layout[1], 3}};
    const TokenMask tokens = expand_to_token_mask(mask, counts);
    REQUIRE(tokens.rows == 5);
    REQUIRE(tokens.cols == 5);
    // False block: reference tokens (rows 0..1) x stream tokens (cols 2..4).
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t c = 0; c < 5; ++c) {
        const bool expect = !(r < 2 && c >= 2);
        CHECK(tokens.at(r, c) == expect);
      }
    }
    // Sum of allowed[q][k] * n_q * n_k = 2*2 + 3*2 + 3*3.
    CHECK(tokens.true_count() == 19);
  }
  SUBCASE("single all-true group expands to all-true") {
    const auto layout = layout_of(0, false, 0);
    const GroupMask mask = build_group_mask(layout);
    const TokenMask tokens = expand_to_token_mask(mask, {{layout[0], 4}});
    CHECK(tokens.rows == 4);
    CHECK(tokens.true_count() == 16);
  }
  SUBCASE("unit counts reproduce the group mask") {
    const auto layout = layout_of(1, true, 2);
    const GroupMask mask = build_group_mask(layout);
    std::map<GroupTag, int> counts;
    for (const auto& tag : layout) counts[tag] = 1;
    const TokenMask tokens = expand_to_token_mask(mask, counts);
    REQUIRE(tokens.rows == mask.size());
    for (std::size_t q = 0; q < mask.size(); ++q) {
      for (std::size_t k = 0; k < mask.size(); ++k) {
        CHECK(tokens.at(q, k) == mask.allowed(q, k));
      }
    }
  }
  SUBCASE("missing group count is an error") {
    const auto layout = layout_of(0, false, 1);
    const GroupMask mask = build_group_mask(layout);
    CHECK_THROWS_AS(expand_to_token_mask(mask, {{layout[0], 2}}), Error);
  }
}

TEST_CASE("full visibility factory") {
  const auto layout = layout_of(1, true, 3);
  const GroupMask mask = GroupMask::full_visibility(layout);
  CHECK(mask.false_cell_count() == 0);
}

TEST_CASE("mask pretty printer golden") {
  const GroupMask mask = build_group_mask(layout_of(0, false, 1));
  CHECK(render_mask(mask) ==
        "    Ref S0\n"
        "Ref   1  0\n"
        "S0    1  1\n");

  const TokenMask tokens =
      expand_to_token_mask(mask, {{{GroupKind::kReference, 0}, 1},
                                  {{GroupKind::kStream, 0}, 2}});
  CHECK(render_mask(tokens) ==
        "100\n"
        "111\n"
        "111\n");
}
