#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sspd/rsea.hpp"

namespace sspd {

enum class MergePolicy {
  kUnionMin,  // element-wise min: true union of distributed observations
  kPaperMax,  // element-wise max: the paper-literal UnionSE merge
};

// Snapshot header. Grids are mergeable only if (seed, q, r, delta, eta)
// match; the remaining fields are informational.
struct SnapshotMeta {
  uint64_t seed = 0;
  uint32_t q = 0;
  uint32_t r = 0;
  uint32_t delta = 0;
  uint32_t eta = 0;
  uint32_t k = 0;
  uint32_t theta = 0;
  uint64_t slot = 0;
  uint32_t node_id = 0;
};

inline constexpr char kSnapshotMagic[4] = {'R', 'S', 'E', 'A'};
inline constexpr uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderSize = 56;

inline std::size_t snapshot_payload_size(uint32_t eta, uint32_t r,
                                         uint32_t q) {
  return 2 * static_cast<std::size_t>(eta) * r * (std::size_t{1} << q);
}

// Writes header + all recorders in (row, column, bucket) order as
// little-endian u16. Deterministic; import reproduces the grid bit-exactly.
void export_snapshot(const Rsea& rsea, const SnapshotMeta& meta,
                     std::ostream& out);

struct ImportedSnapshot {
  Rsea rsea;
  SnapshotMeta meta;
};

// Validates magic, version, parameters and payload length.
ImportedSnapshot import_snapshot(std::istream& in);

// GRSEA: per (row, column, bucket), combines the recorders of all input
// grids. Inputs must share (seed, q, r, delta, eta).
Rsea merge_rseas(const std::vector<const Rsea*>& grids, MergePolicy policy);

}  // namespace sspd
