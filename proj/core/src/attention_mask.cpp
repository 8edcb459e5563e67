#include "streamforge/attention_mask.hpp"

#include <algorithm>
#include <sstream>

#include "streamforge/error.hpp"

namespace streamforge {

namespace {

bool is_stream(const GroupTag& tag) { return tag.kind == GroupKind::kStream; }

}  // namespace

GroupMask::GroupMask(std::vector<GroupTag> layout) : layout_(std::move(layout)) {
  const std::size_t n = layout_.size();
  allowed_.assign(n * n, 0);
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t k = 0; k < n; ++k) {
      const bool ok = is_stream(layout_[q]) || !is_stream(layout_[k]);
      allowed_[q * n + k] = ok ? 1 : 0;
    }
  }
}

GroupMask GroupMask::full_visibility(std::vector<GroupTag> layout) {
  GroupMask mask(std::move(layout));
  std::fill(mask.allowed_.begin(), mask.allowed_.end(), std::uint8_t{1});
  return mask;
}

std::size_t GroupMask::false_cell_count() const {
  return allowed_.size() -
         static_cast<std::size_t>(std::count(allowed_.begin(), allowed_.end(), 1));
}

GroupMask build_group_mask(const std::vector<GroupTag>& layout) {
  if (layout.empty() || layout.front().kind != GroupKind::kReference) {
    raise(ErrorKind::kState, "mask layout must be nonempty and begin with Reference");
  }
  return GroupMask(layout);
}

std::size_t TokenMask::true_count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), 1));
}

TokenMask expand_to_token_mask(const GroupMask& mask,
                               const std::map<GroupTag, int>& tokens_per_group) {
  const auto& layout = mask.layout();
  std::vector<int> counts(layout.size());
  std::size_t total = 0;
  for (std::size_t g = 0; g < layout.size(); ++g) {
    const auto it = tokens_per_group.find(layout[g]);
    if (it == tokens_per_group.end()) {
      raise(ErrorKind::kState, "missing token count for group " + to_string(layout[g]));
    }
    if (it->second < 1) {
      raise(ErrorKind::kState, "token count must be >= 1 for group " + to_string(layout[g]));
    }
    counts[g] = it->second;
    total += static_cast<std::size_t>(it->second);
  }

  TokenMask token_mask;
  token_mask.rows = total;
  token_mask.cols = total;
  token_mask.cells.assign(total * total, 0);

  std::vector<std::size_t> offsets(layout.size());
  std::size_t offset = 0;
  for (std::size_t g = 0; g < layout.size(); ++g) {
    offsets[g] = offset;
    offset += static_cast<std::size_t>(counts[g]);
  }

  for (std::size_t gq = 0; gq < layout.size(); ++gq) {
    for (std::size_t gk = 0; gk < layout.size(); ++gk) {
      if (!mask.allowed(gq, gk)) continue;
      for (int i = 0; i < counts[gq]; ++i) {
        const std::size_t row = offsets[gq] + static_cast<std::size_t>(i);
        auto* row_begin = token_mask.cells.data() + row * total + offsets[gk];
        std::fill(row_begin, row_begin + counts[gk], std::uint8_t{1});
      }
    }
  }
  return token_mask;
}

std::string render_mask(const GroupMask& mask) {
  const auto& layout = mask.layout();
  std::size_t label_width = 0;
  std::vector<std::string> labels;
  labels.reserve(layout.size());
  for (const auto& tag : layout) {
    labels.push_back(to_string(tag));
    label_width = std::max(label_width, labels.back().size());
  }

  std::ostringstream oss;
  oss << std::string(label_width, ' ');
  for (const auto& label : labels) oss << ' ' << label;
  oss << '\n';
  for (std::size_t q = 0; q < layout.size(); ++q) {
    oss << labels[q] << std::string(label_width - labels[q].size(), ' ');
    for (std::size_t k = 0; k < layout.size(); ++k) {
      oss << std::string(labels[k].size(), ' ') << (mask.allowed(q, k) ? '1' : '0');
    }
    oss << '\n';
  }
  return oss.str();
}

std::string render_mask(const TokenMask& mask) {
  std::ostringstream oss;
  for (std::size_t r = 0; r < mask.rows; ++r) {
    for (std::size_t c = 0; c < mask.cols; ++c) {
      oss << (mask.at(r, c) ? '1' : '0');
    }
    oss << '\n';
  }
  return oss.str();
}

}  // namespace streamforge
