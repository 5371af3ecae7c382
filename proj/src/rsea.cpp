#include "sspd/rsea.hpp"

#include <algorithm>
#include <map>

#include "sspd/split.hpp"

namespace sspd {

CandidateOverflow::CandidateOverflow(uint32_t level, std::size_t count,
                                     std::size_t cap)
    : std::runtime_error("candidate buffer cap exceeded at level " +
                         std::to_string(level) + ": " + std::to_string(count) +
                         " tuples, cap " + std::to_string(cap)),
      level(level),
      count(count) {}

Rsea::Rsea(const RhfgConfig& cfg, uint32_t eta)
    : cfg_(cfg),
      eta_(eta),
      seeds_(cfg.seed),
      cells_(static_cast<std::size_t>(cfg.r) * cfg.columns() * eta,
             kNeverSeen) {
  auto problems = validate_config(cfg, eta, 1, 1.0);
  if (!problems.empty())
    throw std::invalid_argument("Rsea: " + problems.front());
}

void Rsea::update(uint32_t cip, uint32_t oip) {
  const uint32_t bucket = hash_opposite(seeds_, oip, eta_);
  const uint32_t col0 =
      static_cast<uint32_t>(seeds_.row0_raw(cip)) & cfg_.column_mask();
  cells_[cell_offset(0, col0) + bucket] = 0;
  for (uint32_t row = 1; row < cfg_.r; ++row) {
    const uint32_t col = rhfg_from_row0(row, cip, col0, cfg_);
    cells_[cell_offset(row, col) + bucket] = 0;
  }
}

void Rsea::scan_batch(std::span<const IpPair> pairs, unsigned workers) {
  if (workers == 0) throw std::invalid_argument("scan_batch: workers == 0");
  if (workers == 1) {
    for (const IpPair& p : pairs) update(p.cip, p.oip);
    return;
  }
  const auto ranges = worker_ranges(pairs.size(), workers);
  // Racing writers all store 0, so the final grid is worker-count invariant.
#pragma omp parallel for schedule(static, 1) num_threads(static_cast<int>(workers))
  for (int w = 0; w < static_cast<int>(workers); ++w) {
    for (std::size_t i = ranges[w].first; i < ranges[w].second; ++i)
      update(pairs[i].cip, pairs[i].oip);
  }
}

void Rsea::advance_slot(unsigned workers) {
  if (workers == 0) throw std::invalid_argument("advance_slot: workers == 0");
  const auto ranges = worker_ranges(cells_.size(), workers);
#pragma omp parallel for schedule(static, 1) num_threads(static_cast<int>(workers))
  for (int w = 0; w < static_cast<int>(workers); ++w) {
    rec::advance(std::span<Recorder>(cells_.data() + ranges[w].first,
                                     ranges[w].second - ranges[w].first));
  }
}

std::vector<HotSet> Rsea::hot_sets(uint32_t k, double theta) const {
  const std::size_t cutoff = hot_cutoff(eta_, theta);
  const uint32_t cols = cfg_.columns();
  std::vector<HotSet> result(cfg_.r);
  std::vector<uint8_t> hot(static_cast<std::size_t>(cfg_.r) * cols);
#pragma omp parallel for schedule(static)
  for (long long cell = 0;
       cell < static_cast<long long>(cfg_.r) * cols; ++cell) {
    const uint32_t row = static_cast<uint32_t>(cell / cols);
    const uint32_t col = static_cast<uint32_t>(cell % cols);
    hot[cell] = rec::active_count(estimator(row, col), k) >= cutoff;
  }
  for (uint32_t row = 0; row < cfg_.r; ++row) {
    result[row].row = row;
    for (uint32_t col = 0; col < cols; ++col)
      if (hot[static_cast<std::size_t>(row) * cols + col])
        result[row].cols.push_back(col);
  }
  return result;
}

std::optional<Detection> Rsea::finalize_candidate(
    std::span<const uint32_t> cols, uint32_t k, double theta) const {
  // Union sliding estimator: a bucket stays active only if active in all r
  // referenced estimators.
  std::vector<Recorder> use(estimator(0, cols[0]).begin(),
                            estimator(0, cols[0]).end());
  for (uint32_t row = 1; row < cfg_.r; ++row)
    rec::combine_max(use, estimator(row, cols[row]));
  const std::size_t r_k = rec::active_count(use, k);
  if (r_k < hot_cutoff(eta_, theta)) return std::nullopt;

  std::vector<uint32_t> blocks(cfg_.r - 1);
  for (uint32_t i = 1; i < cfg_.r; ++i)
    blocks[i - 1] = recover_block(cols[0], cols[i]);
  const auto ip = assemble_ip(blocks, cfg_);
  if (!ip) return std::nullopt;
  // Bit-consistent tuples can still be hash-inconsistent: the assembled
  // address must actually map to the tuple's row-0 column.
  const uint32_t col0 =
      static_cast<uint32_t>(seeds_.row0_raw(*ip)) & cfg_.column_mask();
  if (col0 != cols[0]) return std::nullopt;
  return Detection{*ip, estimate_cardinality(eta_, r_k)};
}

namespace {

DetectionReport dedup_report(std::vector<Detection>&& hosts) {
  std::map<uint32_t, double> best;
  for (const Detection& d : hosts) {
    auto [it, inserted] = best.emplace(d.cip, d.estimate);
    if (!inserted && d.estimate > it->second) it->second = d.estimate;
  }
  DetectionReport report;
  report.hosts.reserve(best.size());
  for (const auto& [cip, est] : best) report.hosts.push_back({cip, est});
  return report;
}

}  // namespace

DetectionReport Rsea::reconstruct_recursive(uint32_t k, double theta) const {
  const auto hot = hot_sets(k, theta);
  std::vector<Detection> found;
  std::vector<uint32_t> tuple(cfg_.r);

  // Depth-first growth; on appending row i only the newly exposed block pair
  // (B(i-1), B(i)) needs checking.
  auto extend = [&](auto&& self, uint32_t row) -> void {
    if (row == cfg_.r) {
      if (auto d = finalize_candidate(tuple, k, theta)) found.push_back(*d);
      return;
    }
    const uint32_t b_prev = recover_block(tuple[0], tuple[row - 1]);
    for (uint32_t col : hot[row].cols) {
      const uint32_t b_new = recover_block(tuple[0], col);
      if (!blocks_consistent(b_prev, b_new, cfg_)) continue;
      tuple[row] = col;
      self(self, row + 1);
    }
  };

  for (uint32_t c0 : hot[0].cols) {
    tuple[0] = c0;
    for (uint32_t c1 : hot[1].cols) {
      tuple[1] = c1;
      const uint32_t b1 = recover_block(c0, c1);
      for (uint32_t c2 : hot[2].cols) {
        const uint32_t b2 = recover_block(c0, c2);
        if (!blocks_consistent(b1, b2, cfg_)) continue;
        tuple[2] = c2;
        if (cfg_.r == 3) {
          if (auto d = finalize_candidate(tuple, k, theta))
            found.push_back(*d);
        } else {
          extend(extend, 3);
        }
      }
    }
  }
  return dedup_report(std::move(found));
}

DetectionReport Rsea::reconstruct_leveled(uint32_t k, double theta,
                                          unsigned workers) const {
  if (workers == 0)
    throw std::invalid_argument("reconstruct_leveled: workers == 0");
  const auto hot = hot_sets(k, theta);
  for (uint32_t row = 0; row < cfg_.r; ++row)
    if (hot[row].cols.empty()) return {};

  const int v = static_cast<int>(workers);
  std::vector<std::vector<uint32_t>> worker_out(workers);

  // Level 2: all |HSE(0)|*|HSE(1)|*|HSE(2)| triples, split evenly.
  const std::size_t n0 = hot[0].cols.size();
  const std::size_t n1 = hot[1].cols.size();
  const std::size_t n2 = hot[2].cols.size();
  {
    const std::size_t q_total = n0 * n1 * n2;
    const auto ranges = worker_ranges(q_total, workers);
#pragma omp parallel for schedule(static, 1) num_threads(v)
    for (int w = 0; w < v; ++w) {
      auto& out = worker_out[w];
      for (std::size_t idx = ranges[w].first; idx < ranges[w].second; ++idx) {
        const uint32_t c0 = hot[0].cols[idx / (n1 * n2)];
        const uint32_t c1 = hot[1].cols[(idx / n2) % n1];
        const uint32_t c2 = hot[2].cols[idx % n2];
        if (!blocks_consistent(recover_block(c0, c1), recover_block(c0, c2),
                               cfg_))
          continue;
        out.push_back(c0);
        out.push_back(c1);
        out.push_back(c2);
      }
    }
  }

  std::vector<uint32_t> read_buf;
  std::vector<uint32_t> store_buf;
  std::size_t m = 3;  // tuple length at the current level
  auto collect = [&](uint32_t level) {
    store_buf.clear();
    for (auto& out : worker_out) {
      store_buf.insert(store_buf.end(), out.begin(), out.end());
      out.clear();
    }
    if (store_buf.size() / m > candidate_cap_)
      throw CandidateOverflow(level, store_buf.size() / m, candidate_cap_);
    store_buf.swap(read_buf);
  };
  collect(2);

  for (uint32_t row = 3; row < cfg_.r; ++row) {
    const std::size_t n_tuples = read_buf.size() / m;
    const std::size_t n_hot = hot[row].cols.size();
    const auto ranges = worker_ranges(n_tuples * n_hot, workers);
#pragma omp parallel for schedule(static, 1) num_threads(v)
    for (int w = 0; w < v; ++w) {
      auto& out = worker_out[w];
      for (std::size_t idx = ranges[w].first; idx < ranges[w].second; ++idx) {
        const uint32_t* tuple = read_buf.data() + (idx / n_hot) * m;
        const uint32_t col = hot[row].cols[idx % n_hot];
        const uint32_t b_prev = recover_block(tuple[0], tuple[m - 1]);
        const uint32_t b_new = recover_block(tuple[0], col);
        if (!blocks_consistent(b_prev, b_new, cfg_)) continue;
        out.insert(out.end(), tuple, tuple + m);
        out.push_back(col);
      }
    }
    ++m;
    collect(row);
  }

  // Finalization pass over the complete tuples, again work-split.
  const std::size_t n_final = read_buf.size() / cfg_.r;
  const auto ranges = worker_ranges(n_final, workers);
  std::vector<std::vector<Detection>> worker_found(workers);
#pragma omp parallel for schedule(static, 1) num_threads(v)
  for (int w = 0; w < v; ++w) {
    for (std::size_t idx = ranges[w].first; idx < ranges[w].second; ++idx) {
      std::span<const uint32_t> tuple(read_buf.data() + idx * cfg_.r, cfg_.r);
      if (auto d = finalize_candidate(tuple, k, theta))
        worker_found[w].push_back(*d);
    }
  }
  std::vector<Detection> found;
  for (auto& part : worker_found)
    found.insert(found.end(), part.begin(), part.end());
  return dedup_report(std::move(found));
}

}  // namespace sspd
