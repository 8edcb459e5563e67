#pragma once

#include <functional>
#include <string>
#include <vector>

#include "streamforge/scheduler.hpp"

namespace streamforge {

using BankFactory = std::function<MemoryBank()>;

/// Runs the exact scheduler loop over num_chunks synthetic chunks, recording
/// every per-chunk advancement (chunk_id, nfe_index, t_before, t_after).
/// The log is what a chunked-distillation trainer would consume.
std::vector<StepRecord> simulate_rollout(std::int64_t num_chunks,
                                         const DenoiseStep& model,
                                         const BankFactory& bank_factory,
                                         const SessionConfig& config);

/// Line-oriented trajectory log: `chunk_id,nfe_index,t_before,t_after`.
std::string render_trajectory(const std::vector<StepRecord>& records);

}  // namespace streamforge
