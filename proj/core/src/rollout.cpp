#include "streamforge/rollout.hpp"

#include <cstdio>
#include <sstream>

namespace streamforge {

std::vector<StepRecord> simulate_rollout(std::int64_t num_chunks,
                                         const DenoiseStep& model,
                                         const BankFactory& bank_factory,
                                         const SessionConfig& config) {
  std::vector<StepRecord> records;
  SimClock clock;
  Scheduler scheduler(config, model, clock);
  scheduler.set_trajectory_sink(
      [&records](const StepRecord& r) { records.push_back(r); });
  scheduler.warmup(bank_factory());

  TraceConditionSource conds(make_synthetic_slices(num_chunks));
  while (scheduler.phase() != Phase::kDone) {
    scheduler.tick(conds);
  }
  return records;
}

std::string render_trajectory(const std::vector<StepRecord>& records) {
  std::ostringstream oss;
  char line[128];
  for (const auto& r : records) {
    std::snprintf(line, sizeof(line), "%lld,%d,%.6f,%.6f",
                  static_cast<long long>(r.chunk_id), r.nfe_index, r.t_before,
                  r.t_after);
    oss << line << '\n';
  }
  return oss.str();
}

}  // namespace streamforge
