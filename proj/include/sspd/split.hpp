#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace sspd {

// Splits [0, total) into `workers` contiguous ranges. With U = total/workers
// and W = total%workers, the first W ranges hold U+1 items and the rest U.
inline std::vector<std::pair<std::size_t, std::size_t>>
worker_ranges(std::size_t total, unsigned workers) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  if (workers == 0) return ranges;
  ranges.reserve(workers);
  const std::size_t base = total / workers;
  const std::size_t extra = total % workers;
  std::size_t lo = 0;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t len = base + (w < extra ? 1 : 0);
    ranges.emplace_back(lo, lo + len);
    lo += len;
  }
  return ranges;
}

}  // namespace sspd
