#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "sspd/pipeline.hpp"

using namespace sspd;

namespace {

std::set<uint32_t> report_cips(const DetectionReport& report) {
  std::set<uint32_t> cips;
  for (const auto& d : report.hosts) cips.insert(d.cip);
  return cips;
}

RunConfig test_config() {
  RunConfig rc = desk_preset();
  rc.cfg.seed = 0x5eedULL;
  rc.window.k = 5;
  rc.alpha = 1024;
  return rc;
}

// Every window overlapping a planted host's active range sees its full
// opposite set, so detection should hold for all covering slots.
SynthResult make_workload(uint32_t supers, uint32_t count, uint32_t slots,
                          const RunConfig& rc, uint64_t seed) {
  SynthSpec spec;
  spec.slots = slots;
  for (uint32_t i = 0; i < supers; ++i)
    spec.planted.push_back({0x0A000000 + i, count, 0, slots - 1});
  spec.background_hosts = 200;
  spec.pairs_per_slot = 500;
  spec.max_distinct_per_host = 8;
  return synth_trace(spec, seed, rc.window);
}

std::vector<std::vector<TraceRecord>> shard_split(
    const std::vector<TraceRecord>& trace, unsigned n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<TraceRecord>> shards(n);
  for (const TraceRecord& r : trace) shards[rng() % n].push_back(r);
  return shards;
}

}  // namespace

TEST_CASE("empty trace produces no reports") {
  const auto reports = run_detection({{}}, test_config());
  CHECK(reports.empty());
}

TEST_CASE("invalid config rejected") {
  RunConfig rc = test_config();
  rc.cfg.q = 8;  // coverage too small
  CHECK_THROWS_AS(run_detection({{}}, rc), std::invalid_argument);
}

TEST_CASE("planted supers detected in every covering window") {
  const RunConfig rc = test_config();
  const auto workload = make_workload(3, 2 * 128, 8, rc, 77);
  const auto reports = run_detection({workload.trace}, rc);
  REQUIRE(reports.size() == 8);
  for (const auto& report : reports) {
    const auto cips = report_cips(report);
    for (uint32_t i = 0; i < 3; ++i) CHECK(cips.count(0x0A000000 + i) == 1);
  }
}

TEST_CASE("strategies agree through the pipeline") {
  RunConfig rc = test_config();
  const auto workload = make_workload(2, 2 * 128, 5, rc, 78);
  rc.strategy = Strategy::kRecursive;
  const auto a = run_detection({workload.trace}, rc);
  rc.strategy = Strategy::kLeveled;
  rc.workers = 4;
  const auto b = run_detection({workload.trace}, rc);
  REQUIRE(a.size() == b.size());
  for (std::size_t s = 0; s < a.size(); ++s)
    CHECK(report_cips(a[s]) == report_cips(b[s]));
}

TEST_CASE("worker count does not change reports") {
  const auto workload = make_workload(2, 2 * 128, 5, test_config(), 79);
  std::vector<std::vector<DetectionReport>> runs;
  for (unsigned workers : {1u, 2u, 8u}) {
    RunConfig rc = test_config();
    rc.workers = workers;
    runs.push_back(run_detection({workload.trace}, rc));
  }
  for (std::size_t i = 1; i < runs.size(); ++i) {
    REQUIRE(runs[i].size() == runs[0].size());
    for (std::size_t s = 0; s < runs[0].size(); ++s) {
      CHECK(report_cips(runs[i][s]) == report_cips(runs[0][s]));
      REQUIRE(runs[i][s].hosts.size() == runs[0][s].hosts.size());
      for (std::size_t h = 0; h < runs[0][s].hosts.size(); ++h)
        CHECK(runs[i][s].hosts[h].estimate == runs[0][s].hosts[h].estimate);
    }
  }
}

TEST_CASE("4-way union-min sharding equals the single-node run") {
  const RunConfig rc = test_config();
  const auto workload = make_workload(3, 2 * 128, 6, rc, 80);
  const auto shards = shard_split(workload.trace, 4, 81);

  std::vector<std::vector<Recorder>> single_grids;
  auto single = run_detection(
      {workload.trace}, rc, [&](uint64_t, const Rsea& grid) {
        single_grids.emplace_back(grid.cells().begin(), grid.cells().end());
      });
  std::vector<std::vector<Recorder>> merged_grids;
  auto multi = run_detection(shards, rc, [&](uint64_t, const Rsea& grid) {
    merged_grids.emplace_back(grid.cells().begin(), grid.cells().end());
  });

  REQUIRE(single.size() == multi.size());
  REQUIRE(single_grids.size() == merged_grids.size());
  for (std::size_t s = 0; s < single.size(); ++s) {
    CHECK(single_grids[s] == merged_grids[s]);
    CHECK(report_cips(single[s]) == report_cips(multi[s]));
  }
}

TEST_CASE("split super point detected only globally") {
  // One host whose peers are split evenly across 4 nodes, each share below
  // theta; union-min still sees the union.
  RunConfig rc = test_config();
  const uint32_t cip = 0xC0A80101;
  const uint32_t total = 2 * 128;
  std::vector<std::vector<TraceRecord>> shards(4);
  for (uint32_t i = 0; i < total; ++i)
    shards[i % 4].push_back({0, cip, 0x40000000 + i});

  // Per node, the share is 64 < theta=128.
  for (const auto& shard : shards) {
    const auto solo = run_detection({shard}, rc);
    REQUIRE(solo.size() == 1);
    CHECK(report_cips(solo[0]).count(cip) == 0);
  }
  const auto global = run_detection(shards, rc);
  REQUIRE(global.size() == 1);
  CHECK(report_cips(global[0]).count(cip) == 1);
}
