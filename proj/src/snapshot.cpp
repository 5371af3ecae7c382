#include "sspd/snapshot.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace sspd {
namespace {

void put_u32(char* p, uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_u64(char* p, uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

uint32_t get_u32(const char* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

uint64_t get_u64(const char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

}  // namespace

void export_snapshot(const Rsea& rsea, const SnapshotMeta& meta,
                     std::ostream& out) {
  char header[kSnapshotHeaderSize] = {};
  std::memcpy(header, kSnapshotMagic, 4);
  put_u32(header + 4, kSnapshotVersion);
  put_u64(header + 8, rsea.cfg().seed);
  put_u32(header + 16, rsea.cfg().q);
  put_u32(header + 20, rsea.cfg().r);
  put_u32(header + 24, rsea.cfg().delta);
  put_u32(header + 28, rsea.eta());
  put_u32(header + 32, meta.k);
  put_u32(header + 36, meta.theta);
  put_u64(header + 40, meta.slot);
  put_u32(header + 48, meta.node_id);
  out.write(header, sizeof(header));

  // Recorders are already laid out in (row, column, bucket) order; emit each
  // as little-endian u16.
  std::vector<char> buf;
  buf.resize(std::min<std::size_t>(rsea.cells().size(), 1u << 20) * 2);
  const auto cells = rsea.cells();
  std::size_t pos = 0;
  while (pos < cells.size()) {
    const std::size_t n = std::min(cells.size() - pos, buf.size() / 2);
    for (std::size_t i = 0; i < n; ++i) {
      buf[2 * i] = static_cast<char>(cells[pos + i] & 0xff);
      buf[2 * i + 1] = static_cast<char>(cells[pos + i] >> 8);
    }
    out.write(buf.data(), static_cast<std::streamsize>(2 * n));
    pos += n;
  }
  if (!out) throw std::runtime_error("export_snapshot: write failure");
}

ImportedSnapshot import_snapshot(std::istream& in) {
  char header[kSnapshotHeaderSize];
  in.read(header, sizeof(header));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(header)))
    throw std::runtime_error("import_snapshot: truncated header");
  if (std::memcmp(header, kSnapshotMagic, 4) != 0)
    throw std::runtime_error("import_snapshot: bad magic");
  const uint32_t version = get_u32(header + 4);
  if (version != kSnapshotVersion)
    throw std::runtime_error("import_snapshot: unsupported version " +
                             std::to_string(version));

  SnapshotMeta meta;
  meta.seed = get_u64(header + 8);
  meta.q = get_u32(header + 16);
  meta.r = get_u32(header + 20);
  meta.delta = get_u32(header + 24);
  meta.eta = get_u32(header + 28);
  meta.k = get_u32(header + 32);
  meta.theta = get_u32(header + 36);
  meta.slot = get_u64(header + 40);
  meta.node_id = get_u32(header + 48);

  RhfgConfig cfg{meta.q, meta.r, meta.delta, meta.seed};
  Rsea rsea(cfg, meta.eta);
  auto cells = rsea.cells();
  const std::size_t expected = snapshot_payload_size(meta.eta, meta.r, meta.q);
  std::vector<char> buf(std::min<std::size_t>(expected, 2u << 20));
  std::size_t pos = 0;
  while (pos < cells.size()) {
    const std::size_t n = std::min(cells.size() - pos, buf.size() / 2);
    in.read(buf.data(), static_cast<std::streamsize>(2 * n));
    if (in.gcount() != static_cast<std::streamsize>(2 * n))
      throw std::runtime_error(
          "import_snapshot: truncated payload, expected " +
          std::to_string(expected) + " bytes, got " +
          std::to_string(2 * pos + static_cast<std::size_t>(in.gcount())));
    for (std::size_t i = 0; i < n; ++i) {
      cells[pos + i] = static_cast<Recorder>(
          static_cast<unsigned char>(buf[2 * i]) |
          (static_cast<unsigned char>(buf[2 * i + 1]) << 8));
    }
    pos += n;
  }
  return {std::move(rsea), meta};
}

Rsea merge_rseas(const std::vector<const Rsea*>& grids, MergePolicy policy) {
  if (grids.empty()) throw std::invalid_argument("merge_rseas: empty set");
  const Rsea& first = *grids.front();
  for (const Rsea* g : grids) {
    if (g->cfg().seed != first.cfg().seed ||
        g->cfg().q != first.cfg().q || g->cfg().r != first.cfg().r ||
        g->cfg().delta != first.cfg().delta || g->eta() != first.eta())
      throw std::invalid_argument(
          "merge_rseas: incompatible snapshots (seed/q/r/delta/eta differ)");
  }
  Rsea merged = first;
  auto out = merged.cells();
  for (std::size_t g = 1; g < grids.size(); ++g) {
    const auto in = grids[g]->cells();
    if (policy == MergePolicy::kUnionMin) {
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < static_cast<long long>(out.size()); ++i)
        if (in[i] < out[i]) out[i] = in[i];
    } else {
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < static_cast<long long>(out.size()); ++i)
        if (in[i] > out[i]) out[i] = in[i];
    }
  }
  return merged;
}

}  // namespace sspd
