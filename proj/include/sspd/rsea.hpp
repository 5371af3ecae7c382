#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sspd/estimator.hpp"
#include "sspd/hashing.hpp"

namespace sspd {

struct IpPair {
  uint32_t cip;
  uint32_t oip;
};

// Columns of one row whose estimator is hot at the queried (k, theta).
struct HotSet {
  uint32_t row;
  std::vector<uint32_t> cols;
};

struct Detection {
  uint32_t cip;
  double estimate;
};

// Per-slot detection result, deduplicated by cip (larger estimate kept) and
// sorted by cip.
struct DetectionReport {
  uint64_t slot = 0;
  std::vector<Detection> hosts;
};

// Raised when a reconstruction level would exceed the candidate buffer cap.
class CandidateOverflow : public std::runtime_error {
 public:
  CandidateOverflow(uint32_t level, std::size_t count, std::size_t cap);
  uint32_t level;
  std::size_t count;
};

// Reversible sliding estimator array: r rows x 2^q columns of sliding
// estimators, addressed per host by the reversible hash group. Storage is one
// flat recorder array in (row, column, bucket) order.
//
// Phase contract: update/scan_batch may run concurrently (SCAN); hot_sets,
// reconstruction, advance_slot and serialization require no concurrent
// touches (QUIESCENT). The caller provides the barrier between phases.
class Rsea {
 public:
  Rsea(const RhfgConfig& cfg, uint32_t eta);

  const RhfgConfig& cfg() const { return cfg_; }
  uint32_t eta() const { return eta_; }
  const HashSeeds& seeds() const { return seeds_; }
  std::size_t recorder_count() const { return cells_.size(); }

  std::span<Recorder> estimator(uint32_t row, uint32_t col) {
    return {cells_.data() + cell_offset(row, col), eta_};
  }
  std::span<const Recorder> estimator(uint32_t row, uint32_t col) const {
    return {cells_.data() + cell_offset(row, col), eta_};
  }
  std::span<const Recorder> cells() const { return cells_; }
  std::span<Recorder> cells() { return cells_; }

  // Sets recorder H1(oip) of the r estimators addressed by cip to zero.
  void update(uint32_t cip, uint32_t oip);

  // Equivalent to sequential update over the batch in any order; the batch is
  // split across workers with the U/V/W scheme.
  void scan_batch(std::span<const IpPair> pairs, unsigned workers);

  // Slot boundary: ages all eta*r*2^q recorders, split across workers.
  void advance_slot(unsigned workers);

  // One HotSet per row: columns with active_count >= hot_cutoff(eta, theta).
  std::vector<HotSet> hot_sets(uint32_t k, double theta) const;

  // Checks a complete candidate tuple (one column per row): intersect-max of
  // the r estimators must be hot, the assembled address must reproduce its
  // blocks, and its row-0 hash must land on cols[0].
  std::optional<Detection> finalize_candidate(std::span<const uint32_t> cols,
                                              uint32_t k, double theta) const;

  // Serial reference reconstruction: depth-first candidate tuple growth.
  DetectionReport reconstruct_recursive(uint32_t k, double theta) const;

  // Level-synchronous reconstruction with two alternating candidate buffers;
  // returns the same cip set as the recursive strategy.
  DetectionReport reconstruct_leveled(uint32_t k, double theta,
                                      unsigned workers) const;

  void set_candidate_cap(std::size_t cap) { candidate_cap_ = cap; }
  std::size_t candidate_cap() const { return candidate_cap_; }

  bool operator==(const Rsea& other) const {
    return cells_ == other.cells_;
  }

 private:
  std::size_t cell_offset(uint32_t row, uint32_t col) const {
    return (static_cast<std::size_t>(row) * cfg_.columns() + col) * eta_;
  }

  RhfgConfig cfg_;
  uint32_t eta_;
  HashSeeds seeds_;
  std::vector<Recorder> cells_;
  std::size_t candidate_cap_ = std::size_t{1} << 24;
};

}  // namespace sspd
