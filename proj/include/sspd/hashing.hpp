#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sspd {

// Parameters of the reversible hash function group. Columns per row are 2^q,
// r rows, block stride delta bits. The seed deterministically generates every
// hash table so all nodes agree on the mapping.
struct RhfgConfig {
  uint32_t q = 14;
  uint32_t r = 5;
  uint32_t delta = 6;
  uint64_t seed = 0;

  uint32_t columns() const { return 1u << q; }
  uint32_t column_mask() const { return (1u << q) - 1; }
};

// Seeded 4-way tabulation hash over the bytes of a 32-bit key.
class TabulationHash {
 public:
  explicit TabulationHash(uint64_t seed);

  uint64_t operator()(uint32_t key) const {
    return tables_[0][key & 0xff] ^ tables_[1][(key >> 8) & 0xff] ^
           tables_[2][(key >> 16) & 0xff] ^ tables_[3][key >> 24];
  }

 private:
  std::array<std::array<uint64_t, 256>, 4> tables_;
};

// The two independent seeded hashes the detector needs: H1 maps opposite
// hosts into recorder buckets, row0 is RHFG[0]. Immutable after construction.
class HashSeeds {
 public:
  explicit HashSeeds(uint64_t seed);

  uint64_t seed() const { return seed_; }
  uint64_t h1_raw(uint32_t oip) const { return h1_(oip); }
  uint64_t row0_raw(uint32_t cip) const { return row0_(cip); }

 private:
  uint64_t seed_;
  TabulationHash h1_;
  TabulationHash row0_;
};

// Bucket of an opposite host in a sliding estimator of length eta.
inline uint32_t hash_opposite(const HashSeeds& seeds, uint32_t oip,
                              uint32_t eta) {
  return static_cast<uint32_t>(seeds.h1_raw(oip) % eta);
}

// Column of host cip in row i. Row 0 is the random hash; row i >= 1 XORs the
// q-bit address block at offset (i-1)*delta with row 0, so the block can be
// recovered from the two column indices.
uint32_t rhfg(const HashSeeds& seeds, uint32_t row, uint32_t cip,
              const RhfgConfig& cfg);

// Same, with the row-0 column precomputed by the caller.
inline uint32_t rhfg_from_row0(uint32_t row, uint32_t cip, uint32_t col0,
                               const RhfgConfig& cfg) {
  return ((cip >> ((row - 1) * cfg.delta)) ^ col0) & cfg.column_mask();
}

// B(i) = col0 XOR coli: the q-bit block of cip at offset (i-1)*delta.
inline uint32_t recover_block(uint32_t col0, uint32_t coli) {
  return col0 ^ coli;
}

// Adjacent blocks overlap in q-delta bits: the top q-delta bits of B(i) are
// the bottom q-delta bits of B(i+1).
inline bool blocks_consistent(uint32_t b_lo, uint32_t b_hi,
                              const RhfgConfig& cfg) {
  const uint32_t overlap_mask = (1u << (cfg.q - cfg.delta)) - 1;
  return (b_lo >> cfg.delta) == (b_hi & overlap_mask);
}

// Reassembles the 32-bit address from blocks B(1)..B(r-1). Returns nothing if
// the blocks do not agree with the slices of the assembled value (including
// non-zero bits above position 31 in the top block).
std::optional<uint32_t> assemble_ip(std::span<const uint32_t> blocks,
                                    const RhfgConfig& cfg);

// One diagnostic per violated constraint; empty means the configuration is
// usable for detection.
std::vector<std::string> validate_config(const RhfgConfig& cfg, uint32_t eta,
                                         uint32_t k, double theta);

}  // namespace sspd
