#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "streamforge/memory_bank.hpp"

namespace streamforge {

/// Boolean visibility matrix over buffer groups. The rule is asymmetric:
/// stream queries see every group, while reference/memory queries never see
/// a stream group (so fully denoised context stays uncorrupted).
class GroupMask {
 public:
  explicit GroupMask(std::vector<GroupTag> layout);

  /// All-true mask over a layout; the visibility the pre-adaptation
  /// full-attention model has (used by the full-sequence oracle).
  static GroupMask full_visibility(std::vector<GroupTag> layout);

  std::size_t size() const { return layout_.size(); }
  const std::vector<GroupTag>& layout() const { return layout_; }

  bool allowed(std::size_t query, std::size_t key) const {
    return allowed_[query * layout_.size() + key] != 0;
  }

  std::size_t false_cell_count() const;

 private:
  std::vector<GroupTag> layout_;
  std::vector<std::uint8_t> allowed_;
};

/// Builds the fake-causal mask for a context layout. The layout must be
/// nonempty and begin with the Reference group.
GroupMask build_group_mask(const std::vector<GroupTag>& layout);

inline GroupMask build_group_mask(const ContextView& context) {
  return build_group_mask(context.layout());
}

/// Dense boolean token matrix produced by block expansion of a group mask.
struct TokenMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> cells;

  bool at(std::size_t r, std::size_t c) const { return cells[r * cols + c] != 0; }
  std::size_t true_count() const;
};

/// Block expansion: token (i, j) is allowed iff the pair of groups owning i
/// and j is allowed. Every group in the layout needs a token count >= 1.
TokenMask expand_to_token_mask(const GroupMask& mask,
                               const std::map<GroupTag, int>& tokens_per_group);

/// 0/1 grid with row/column group labels; golden-test format.
std::string render_mask(const GroupMask& mask);
std::string render_mask(const TokenMask& mask);

}  // namespace streamforge
