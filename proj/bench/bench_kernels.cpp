#include <benchmark/benchmark.h>

#include <random>

#include "sspd/rsea.hpp"

using namespace sspd;

namespace {

const RhfgConfig kCfg{10, 5, 8, 0xB43CULL};
constexpr uint32_t kEta = 256;

std::vector<IpPair> make_pairs(std::size_t n) {
  std::mt19937_64 rng(7);
  std::vector<IpPair> pairs(n);
  for (auto& p : pairs)
    p = {static_cast<uint32_t>(rng()), static_cast<uint32_t>(rng())};
  return pairs;
}

Rsea busy_grid() {
  std::mt19937_64 rng(8);
  Rsea rsea(kCfg, kEta);
  for (int h = 0; h < 6; ++h) {
    const uint32_t cip = static_cast<uint32_t>(rng());
    for (int i = 0; i < 400; ++i)
      rsea.update(cip, static_cast<uint32_t>(rng()));
  }
  for (int i = 0; i < 20'000; ++i)
    rsea.update(static_cast<uint32_t>(rng()), static_cast<uint32_t>(rng()));
  return rsea;
}

void bm_scan_batch(benchmark::State& state) {
  const auto pairs = make_pairs(200'000);
  const unsigned workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    Rsea rsea(kCfg, kEta);
    rsea.scan_batch(pairs, workers);
    benchmark::DoNotOptimize(rsea.cells().data());
  }
  state.SetItemsProcessed(state.iterations() * pairs.size());
}

void bm_advance_slot(benchmark::State& state) {
  const Rsea base = busy_grid();
  const unsigned workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    state.PauseTiming();
    Rsea rsea = base;
    state.ResumeTiming();
    rsea.advance_slot(workers);
    benchmark::DoNotOptimize(rsea.cells().data());
  }
}

void bm_reconstruct_recursive(benchmark::State& state) {
  const Rsea rsea = busy_grid();
  for (auto _ : state) {
    auto report = rsea.reconstruct_recursive(30, 128);
    benchmark::DoNotOptimize(report.hosts.data());
  }
}

void bm_reconstruct_leveled(benchmark::State& state) {
  const Rsea rsea = busy_grid();
  const unsigned workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    auto report = rsea.reconstruct_leveled(30, 128, workers);
    benchmark::DoNotOptimize(report.hosts.data());
  }
}

BENCHMARK(bm_scan_batch)->Arg(1)->Arg(2)->Arg(4)->Arg(8);
BENCHMARK(bm_advance_slot)->Arg(1)->Arg(2)->Arg(4)->Arg(8);
BENCHMARK(bm_reconstruct_recursive);
BENCHMARK(bm_reconstruct_leveled)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
