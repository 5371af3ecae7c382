#include "sspd/pipeline.hpp"

#include <stdexcept>

namespace sspd {

RunConfig desk_preset() {
  RunConfig rc;
  rc.cfg = RhfgConfig{10, 5, 8, 0};
  rc.eta = 256;
  rc.theta = 128;
  rc.window.k = 30;
  return rc;
}

std::vector<DetectionReport> run_detection(
    const std::vector<std::vector<TraceRecord>>& shards, const RunConfig& rc,
    const std::function<void(uint64_t slot, const Rsea& grid)>& probe) {
  if (shards.empty())
    throw std::invalid_argument("run_detection: no trace shards");
  auto problems = validate_config(rc.cfg, rc.eta, rc.window.k,
                                  rc.theta);
  if (!problems.empty())
    throw std::invalid_argument("run_detection: " + problems.front());
  if (rc.alpha == 0 || rc.workers == 0)
    throw std::invalid_argument("run_detection: alpha and workers must be > 0");

  uint64_t n_slots = 0;
  for (const auto& shard : shards)
    for (const TraceRecord& r : shard) {
      if (r.ts < rc.window.start)
        throw std::invalid_argument("run_detection: record before start");
      n_slots = std::max(n_slots, slot_of(r.ts, rc.window) + 1);
    }

  std::vector<Rsea> nodes;
  nodes.reserve(shards.size());
  for (std::size_t i = 0; i < shards.size(); ++i) {
    nodes.emplace_back(rc.cfg, rc.eta);
    nodes.back().set_candidate_cap(rc.candidate_cap);
  }
  // Shards are time-sorted, so each node keeps a cursor into its stream.
  std::vector<std::size_t> cursor(shards.size(), 0);

  std::vector<DetectionReport> reports;
  std::vector<IpPair> batch;
  batch.reserve(rc.alpha);
  for (uint64_t slot = 0; slot < n_slots; ++slot) {
    // SCAN phase, per node.
    for (std::size_t n = 0; n < shards.size(); ++n) {
      const auto& shard = shards[n];
      std::size_t& pos = cursor[n];
      batch.clear();
      while (pos < shard.size() &&
             slot_of(shard[pos].ts, rc.window) == slot) {
        batch.push_back({shard[pos].cip, shard[pos].oip});
        ++pos;
        if (batch.size() == rc.alpha) {
          nodes[n].scan_batch(batch, rc.workers);
          batch.clear();
        }
      }
      if (!batch.empty()) nodes[n].scan_batch(batch, rc.workers);
    }

    // QUIESCENT phase: merge (if distributed), reconstruct, advance.
    auto reconstruct = [&](const Rsea& grid) {
      if (probe) probe(slot, grid);
      DetectionReport report =
          rc.strategy == Strategy::kRecursive
              ? grid.reconstruct_recursive(rc.window.k, rc.theta)
              : grid.reconstruct_leveled(rc.window.k, rc.theta, rc.workers);
      report.slot = slot;
      return report;
    };
    if (nodes.size() == 1) {
      reports.push_back(reconstruct(nodes[0]));
    } else {
      std::vector<const Rsea*> grids;
      grids.reserve(nodes.size());
      for (const Rsea& n : nodes) grids.push_back(&n);
      Rsea merged = merge_rseas(grids, rc.policy);
      merged.set_candidate_cap(rc.candidate_cap);
      reports.push_back(reconstruct(merged));
    }
    for (Rsea& n : nodes) n.advance_slot(rc.workers);
  }
  return reports;
}

}  // namespace sspd
