#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sspd {

// 16-bit distance recorder: slots since the bucket was last touched.
using Recorder = uint16_t;
inline constexpr Recorder kNeverSeen = 0xffff;

// Raw kernels shared between the standalone estimator and the RSEA grid.
namespace rec {

inline void touch(std::span<Recorder> recorders, std::size_t bucket) {
  recorders[bucket] = 0;
}

inline void advance(std::span<Recorder> recorders) {
  for (Recorder& v : recorders)
    if (v < kNeverSeen) ++v;
}

inline std::size_t active_count(std::span<const Recorder> recorders,
                                uint32_t k) {
  std::size_t n = 0;
  for (Recorder v : recorders) n += (v < k);
  return n;
}

inline void combine_min(std::span<Recorder> acc,
                        std::span<const Recorder> other) {
  for (std::size_t i = 0; i < acc.size(); ++i)
    if (other[i] < acc[i]) acc[i] = other[i];
}

inline void combine_max(std::span<Recorder> acc,
                        std::span<const Recorder> other) {
  for (std::size_t i = 0; i < acc.size(); ++i)
    if (other[i] > acc[i]) acc[i] = other[i];
}

}  // namespace rec

// Array of eta distance recorders: the sliding-window analogue of a
// linear-counting bit array. Initialized once to the never-seen sentinel,
// never re-initialized per slot.
class SlidingEstimator {
 public:
  explicit SlidingEstimator(std::size_t eta);

  std::size_t eta() const { return recorders_.size(); }

  // Records an appearance in the current slot. Idempotent; safe to race with
  // other touches (the only write is 0).
  void touch(std::size_t bucket);

  // Slot boundary: every recorder ages by one, saturating at the sentinel.
  void advance() { rec::advance(recorders_); }

  // R_k: buckets touched within the trailing k slots.
  std::size_t active_count(uint32_t k) const;

  std::span<const Recorder> recorders() const { return recorders_; }
  std::span<Recorder> recorders() { return recorders_; }

  bool operator==(const SlidingEstimator&) const = default;

 private:
  std::vector<Recorder> recorders_;
};

// Linear estimate of the distinct count from R_k active recorders out of
// eta. Saturates at eta*ln(eta) when no recorder is empty.
double estimate_cardinality(std::size_t eta, std::size_t r_k);

// Integer threshold on R_k above which an estimator's opposite number is
// judged >= theta: ceil(eta * (1 - e^(-theta/eta))).
std::size_t hot_cutoff(std::size_t eta, double theta);

// Element-wise min: the union of the inputs' observations ("most recent
// appearance anywhere"). Used to merge estimators fed by disjoint streams.
SlidingEstimator merge_min(const std::vector<SlidingEstimator>& inputs);

// Element-wise max: keeps a bucket active only if active in every input.
// Approximates the traffic common to all inputs; this is what the paper-max
// merge policy uses.
SlidingEstimator intersect_max(const std::vector<SlidingEstimator>& inputs);

}  // namespace sspd
