#include "sspd/hashing.hpp"

#include <stdexcept>

namespace sspd {
namespace {

uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

TabulationHash::TabulationHash(uint64_t seed) {
  uint64_t state = seed;
  for (auto& table : tables_)
    for (auto& entry : table) entry = splitmix64(state);
}

HashSeeds::HashSeeds(uint64_t seed)
    : seed_(seed),
      h1_([&] {
        uint64_t s = seed;
        return TabulationHash(splitmix64(s));
      }()),
      row0_([&] {
        uint64_t s = seed;
        splitmix64(s);
        return TabulationHash(splitmix64(s));
      }()) {}

uint32_t rhfg(const HashSeeds& seeds, uint32_t row, uint32_t cip,
              const RhfgConfig& cfg) {
  if (row >= cfg.r) throw std::out_of_range("rhfg: row index out of range");
  const uint32_t col0 =
      static_cast<uint32_t>(seeds.row0_raw(cip)) & cfg.column_mask();
  if (row == 0) return col0;
  return rhfg_from_row0(row, cip, col0, cfg);
}

std::optional<uint32_t> assemble_ip(std::span<const uint32_t> blocks,
                                    const RhfgConfig& cfg) {
  if (blocks.size() != cfg.r - 1)
    throw std::invalid_argument("assemble_ip: expected r-1 blocks");
  uint64_t ip = 0;
  for (size_t j = 0; j < blocks.size(); ++j)
    ip |= static_cast<uint64_t>(blocks[j]) << (j * cfg.delta);
  const uint32_t out = static_cast<uint32_t>(ip & 0xffffffffULL);
  // Verify each block against the assembled value; this rejects overlap
  // mismatches and non-zero excess bits above position 31 alike.
  for (size_t j = 0; j < blocks.size(); ++j) {
    const uint32_t slice =
        (out >> (j * cfg.delta)) & cfg.column_mask();
    if (slice != blocks[j]) return std::nullopt;
  }
  return out;
}

std::vector<std::string> validate_config(const RhfgConfig& cfg, uint32_t eta,
                                         uint32_t k, double theta) {
  std::vector<std::string> problems;
  if (cfg.q < 1 || cfg.q > 16)
    problems.push_back("q must be in [1, 16], got " + std::to_string(cfg.q));
  if (cfg.delta == 0 || cfg.delta >= cfg.q)
    problems.push_back("delta must satisfy 0 < delta < q, got delta=" +
                       std::to_string(cfg.delta) +
                       " q=" + std::to_string(cfg.q));
  if (cfg.r < 3)
    problems.push_back("r must be >= 3, got " + std::to_string(cfg.r));
  if (cfg.r >= 3 && cfg.delta < cfg.q) {
    const uint32_t coverage = (cfg.r - 2) * cfg.delta + cfg.q;
    if (coverage < 32)
      problems.push_back("address coverage (r-2)*delta+q = " +
                         std::to_string(coverage) + " < 32");
  }
  if (eta < 2)
    problems.push_back("eta must be >= 2, got " + std::to_string(eta));
  if (k < 1 || k > 65534)
    problems.push_back("k must be in [1, 65534], got " + std::to_string(k));
  if (theta < 1)
    problems.push_back("theta must be >= 1, got " + std::to_string(theta));
  return problems;
}

}  // namespace sspd
