#pragma once

#include <functional>
#include <vector>

#include "sspd/rsea.hpp"
#include "sspd/snapshot.hpp"
#include "sspd/workload.hpp"

namespace sspd {

enum class Strategy { kRecursive, kLeveled };

// Everything a detection run needs; defaults follow the reference parameter
// set (eta=2^11, q=14, r=5, delta=6, theta=1024, alpha=2^15).
struct RunConfig {
  RhfgConfig cfg;
  uint32_t eta = 1u << 11;
  WindowConfig window;
  double theta = 1024;
  uint32_t alpha = 1u << 15;  // scan batch capacity
  unsigned workers = 1;
  MergePolicy policy = MergePolicy::kUnionMin;
  Strategy strategy = Strategy::kLeveled;
  std::size_t candidate_cap = std::size_t{1} << 24;
};

// Small test-friendly preset (~2.5 MiB of recorders).
RunConfig desk_preset();

// Runs the phased per-slot cycle over one or more shard streams: scan each
// shard's slot in alpha-sized batches, merge the node grids when n > 1,
// reconstruct on the (merged) grid, then advance every node grid. The
// optional probe sees the grid reconstruction ran on, per slot.
std::vector<DetectionReport> run_detection(
    const std::vector<std::vector<TraceRecord>>& shards, const RunConfig& rc,
    const std::function<void(uint64_t slot, const Rsea& grid)>& probe = {});

}  // namespace sspd
