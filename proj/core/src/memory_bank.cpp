#include "streamforge/memory_bank.hpp"

#include <sstream>

#include "streamforge/error.hpp"

namespace streamforge {

std::string to_string(const GroupTag& tag) {
  switch (tag.kind) {
    case GroupKind::kReference: return "Ref";
    case GroupKind::kLongTerm: return "LT" + std::to_string(tag.index);
    case GroupKind::kShortTerm: return "ST";
    case GroupKind::kStream: return "S" + std::to_string(tag.index);
  }
  return "?";
}

namespace {

std::vector<GroupTag> make_layout(std::size_t long_term_count, bool has_short_term,
                                  std::size_t stream_count) {
  std::vector<GroupTag> layout;
  layout.push_back({GroupKind::kReference, 0});
  for (std::size_t i = 0; i < long_term_count; ++i) {
    layout.push_back({GroupKind::kLongTerm, static_cast<int>(i)});
  }
  if (has_short_term) layout.push_back({GroupKind::kShortTerm, 0});
  for (std::size_t j = 0; j < stream_count; ++j) {
    layout.push_back({GroupKind::kStream, static_cast<int>(j)});
  }
  return layout;
}

}  // namespace

ContextView::ContextView(Latent reference, std::vector<Chunk> long_term,
                         std::optional<Chunk> short_term, std::vector<Chunk> stream)
    : reference_(std::move(reference)),
      long_term_(std::move(long_term)),
      short_term_(std::move(short_term)),
      stream_(std::move(stream)),
      layout_(make_layout(long_term_.size(), short_term_.has_value(), stream_.size())) {}

ContextView ContextView::reference_only(Latent reference) {
  return ContextView(std::move(reference), {}, std::nullopt, {});
}

MemoryBank::MemoryBank(Latent reference, const SessionConfig& config)
    : reference_(std::move(reference)),
      long_term_capacity_(config.long_term_capacity),
      stream_capacity_(config.stream_chunks),
      latent_dim_(config.latent_dim) {
  if (static_cast<int>(reference_.data.size()) != latent_dim_) {
    raise(ErrorKind::kDimension,
          "reference latent dim " + std::to_string(reference_.data.size()) +
              " != configured latent_dim " + std::to_string(latent_dim_));
  }
}

void MemoryBank::admit_noise_chunk(Chunk chunk) {
  if (static_cast<int>(stream_.size()) >= stream_capacity_) {
    raise(ErrorKind::kCapacity,
          "denoising stream full (" + std::to_string(stream_capacity_) + " chunks)");
  }
  if (chunk.noise.t != 1.0) {
    raise(ErrorKind::kSchedule, "admitted chunk must be pure noise (t = 1.0), got t = " +
                                    std::to_string(chunk.noise.t));
  }
  if (chunk.chunk_id != last_admitted_ + 1) {
    raise(ErrorKind::kSequencing,
          "chunk id " + std::to_string(chunk.chunk_id) + " does not follow " +
              std::to_string(last_admitted_));
  }
  for (const auto& latent : chunk.latents) {
    if (static_cast<int>(latent.data.size()) != latent_dim_) {
      raise(ErrorKind::kDimension, "latent dim mismatch in admitted chunk");
    }
  }
  last_admitted_ = chunk.chunk_id;
  stream_.push_back(std::move(chunk));
}

Chunk MemoryBank::promote_clean_chunk() {
  if (stream_.empty()) {
    raise(ErrorKind::kState, "promote on empty stream");
  }
  if (!stream_.front().clean()) {
    raise(ErrorKind::kState, "stream head not clean (t = " +
                                 std::to_string(stream_.front().noise.t) + ")");
  }
  Chunk promoted = std::move(stream_.front());
  stream_.erase(stream_.begin());
  if (short_term_.has_value()) {
    if (static_cast<int>(long_term_.size()) >= long_term_capacity_) {
      long_term_.erase(long_term_.begin());  // FIFO eviction
    }
    long_term_.push_back(std::move(*short_term_));
  }
  short_term_ = promoted;
  return promoted;
}

ContextView MemoryBank::snapshot_context(SnapshotScope scope) const {
  if (scope == SnapshotScope::kRefineGuidance) {
    return ContextView(reference_, long_term_, std::nullopt, {});
  }
  return ContextView(reference_, long_term_, short_term_, stream_);
}

void MemoryBank::replace_short_term(Chunk chunk) {
  if (!short_term_.has_value()) {
    raise(ErrorKind::kState, "replace_short_term with no short-term chunk");
  }
  if (chunk.chunk_id != short_term_->chunk_id) {
    raise(ErrorKind::kSequencing,
          "replacement id " + std::to_string(chunk.chunk_id) + " != short-term id " +
              std::to_string(short_term_->chunk_id));
  }
  if (!chunk.clean()) {
    raise(ErrorKind::kSchedule, "short-term replacement must be clean");
  }
  short_term_ = std::move(chunk);
}

void MemoryBank::check_invariants() const {
  if (static_cast<int>(long_term_.size()) > long_term_capacity_) {
    raise(ErrorKind::kCapacity, "long_term over capacity");
  }
  if (static_cast<int>(stream_.size()) > stream_capacity_) {
    raise(ErrorKind::kCapacity, "stream over capacity");
  }
  for (const auto& chunk : long_term_) {
    if (!chunk.clean()) raise(ErrorKind::kState, "long_term entry not clean");
  }
  if (short_term_.has_value() && !short_term_->clean()) {
    raise(ErrorKind::kState, "short_term not clean");
  }
  for (std::size_t j = 1; j < stream_.size(); ++j) {
    if (!(stream_[j - 1].noise.t < stream_[j].noise.t)) {
      raise(ErrorKind::kState, "stream noise levels not strictly increasing");
    }
  }
}

std::string MemoryBank::debug_dump() const {
  std::ostringstream oss;
  oss.precision(4);
  oss << "Ref id=" << reference_.id << '\n';
  for (std::size_t i = 0; i < long_term_.size(); ++i) {
    oss << "LT" << i << " chunk=" << long_term_[i].chunk_id
        << " t=" << long_term_[i].noise.t << '\n';
  }
  if (short_term_.has_value()) {
    oss << "ST chunk=" << short_term_->chunk_id << " t=" << short_term_->noise.t
        << '\n';
  }
  for (std::size_t j = 0; j < stream_.size(); ++j) {
    oss << "S" << j << " chunk=" << stream_[j].chunk_id
        << " t=" << stream_[j].noise.t << '\n';
  }
  return oss.str();
}

}  // namespace streamforge
