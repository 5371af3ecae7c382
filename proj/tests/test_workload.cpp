#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "sspd/workload.hpp"

using namespace sspd;

TEST_CASE("ipv4 parsing and formatting") {
  CHECK(parse_ipv4("192.168.1.1") == 0xC0A80101);
  CHECK(parse_ipv4("3232235777") == 0xC0A80101);
  CHECK(format_ipv4(0xC0A80101) == "192.168.1.1");
  CHECK_THROWS(parse_ipv4("192.168.1"));
  CHECK_THROWS(parse_ipv4("192.168.1.256"));
  CHECK_THROWS(parse_ipv4("4294967296"));
}

TEST_CASE("text trace parsing") {
  std::istringstream in("0,192.168.1.1,10.0.0.1\n1,3232235777,167772162\n");
  const auto records = read_trace(in, TraceFormat::kText);
  REQUIRE(records.size() == 2);
  CHECK(records[0] == TraceRecord{0, 0xC0A80101, 0x0A000001});
  CHECK(records[1] == TraceRecord{1, 0xC0A80101, 0x0A000002});
}

TEST_CASE("trace error paths") {
  SUBCASE("empty payload gives an empty stream") {
    std::istringstream empty;
    CHECK(read_trace(empty, TraceFormat::kBinary).empty());
    std::istringstream empty2;
    CHECK(read_trace(empty2, TraceFormat::kText).empty());
  }
  SUBCASE("malformed line reports its position") {
    std::istringstream in("0,1.2.3.4,5.6.7.8\nnot-a-record\n");
    CHECK_THROWS_WITH_AS(read_trace(in, TraceFormat::kText),
                         doctest::Contains("line 2"), std::runtime_error);
  }
  SUBCASE("timestamp regression rejected") {
    std::istringstream in("5,1.2.3.4,5.6.7.8\n3,1.2.3.4,5.6.7.8\n");
    CHECK_THROWS_WITH_AS(read_trace(in, TraceFormat::kText),
                         doctest::Contains("regression"), std::runtime_error);
  }
  SUBCASE("binary bad magic") {
    std::istringstream in("XXXX\x01\x00\x00\x00");
    CHECK_THROWS_WITH_AS(read_trace(in, TraceFormat::kBinary),
                         doctest::Contains("magic"), std::runtime_error);
  }
}

TEST_CASE("binary/text round trip") {
  std::mt19937_64 rng(41);
  std::vector<TraceRecord> records;
  uint32_t ts = 100;
  for (int i = 0; i < 500; ++i) {
    ts += rng() % 3;
    records.push_back(
        {ts, static_cast<uint32_t>(rng()), static_cast<uint32_t>(rng())});
  }
  for (const auto format : {TraceFormat::kBinary, TraceFormat::kText}) {
    std::ostringstream out;
    write_trace(records, out, format);
    std::istringstream in(out.str());
    CHECK(read_trace(in, format) == records);
  }
}

TEST_CASE("orient_pair") {
  const CnetSpec cnet({"10.0.0.0/8", "192.168.0.0/16"});
  const uint32_t inside = parse_ipv4("10.1.2.3");
  const uint32_t inside2 = parse_ipv4("192.168.9.9");
  const uint32_t outside = parse_ipv4("8.8.8.8");
  CHECK(orient_pair(inside, outside, cnet) ==
        std::make_pair(inside, outside));
  CHECK(orient_pair(outside, inside, cnet) ==
        std::make_pair(inside, outside));
  CHECK_FALSE(orient_pair(inside, inside2, cnet).has_value());
  CHECK_FALSE(orient_pair(outside, parse_ipv4("9.9.9.9"), cnet).has_value());
  CHECK_THROWS(CnetSpec({}));
  CHECK_THROWS(CnetSpec({"10.0.0.0"}));
}

TEST_CASE("exact_counts: duplicate pairs count once") {
  // Four pairs to one host, two distinct opposites, one window.
  std::vector<TraceRecord> trace = {
      {0, 1, 100}, {0, 1, 100}, {0, 1, 101}, {0, 1, 100}};
  const auto truth = exact_counts(trace, WindowConfig{1.0, 1, 0});
  REQUIRE(truth.slots.size() == 1);
  CHECK(truth.slots[0].at(1) == 2);
}

TEST_CASE("exact_counts matches brute force on random traces") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<TraceRecord> trace;
    const uint32_t slots = 1 + rng() % 12;
    for (uint32_t s = 0; s < slots; ++s) {
      const int n = static_cast<int>(rng() % 40);
      for (int i = 0; i < n; ++i)
        trace.push_back({s, static_cast<uint32_t>(rng() % 5),
                         static_cast<uint32_t>(rng() % 30)});
    }
    for (uint32_t k : {1u, 3u, 8u}) {
      const WindowConfig win{1.0, k, 0};
      const auto truth = exact_counts(trace, win);
      // brute-force recount per window
      for (uint32_t s = 0; s < slots; ++s) {
        std::unordered_map<uint32_t, std::unordered_set<uint32_t>> window;
        for (const auto& r : trace) {
          const uint32_t lo = s + 1 >= k ? s + 1 - k : 0;
          if (r.ts >= lo && r.ts <= s) window[r.cip].insert(r.oip);
        }
        if (s < truth.slots.size()) {
          for (const auto& [cip, oips] : window)
            CHECK(truth.slots[s].at(cip) == oips.size());
          CHECK(truth.slots[s].size() == window.size());
        } else {
          CHECK(window.empty());
        }
      }
    }
  }
}

TEST_CASE("k=1 reduces to per-slot distinct counts") {
  std::vector<TraceRecord> trace = {{0, 1, 10}, {0, 1, 11}, {1, 1, 12},
                                    {2, 2, 10}, {2, 2, 10}};
  const auto truth = exact_counts(trace, WindowConfig{1.0, 1, 0});
  CHECK(truth.slots[0].at(1) == 2);
  CHECK(truth.slots[1].at(1) == 1);
  CHECK(truth.slots[2].at(2) == 1);
  CHECK(truth.slots[1].count(2) == 0);
}

TEST_CASE("synth_trace") {
  WindowConfig win{1.0, 5, 0};
  SUBCASE("single planted host, no background") {
    SynthSpec spec;
    spec.slots = 1;
    spec.planted.push_back({0xC0A80101, 2048, 0, 0});
    const auto result = synth_trace(spec, 1, win);
    REQUIRE(result.truth.slots.size() == 1);
    CHECK(result.truth.slots[0].at(0xC0A80101) == 2048);
    CHECK(result.trace.size() == 2048);
  }
  SUBCASE("deterministic for fixed seed") {
    SynthSpec spec;
    spec.slots = 4;
    spec.planted.push_back({0xC0A80101, 100, 0, 3});
    spec.background_hosts = 50;
    spec.pairs_per_slot = 200;
    spec.max_distinct_per_host = 8;
    const auto a = synth_trace(spec, 9, win);
    const auto b = synth_trace(spec, 9, win);
    CHECK(a.trace == b.trace);
    const auto c = synth_trace(spec, 10, win);
    CHECK(a.trace != c.trace);
  }
  SUBCASE("generator truth equals exact_counts recomputation") {
    SynthSpec spec;
    spec.slots = 8;
    spec.planted.push_back({0xC0A80101, 300, 1, 6});
    spec.planted.push_back({0x0A000001, 50, 0, 7});
    spec.background_hosts = 100;
    spec.pairs_per_slot = 500;
    spec.max_distinct_per_host = 6;
    const auto result = synth_trace(spec, 11, win);
    const auto recomputed = exact_counts(result.trace, win);
    REQUIRE(result.truth.slots.size() == recomputed.slots.size());
    for (std::size_t s = 0; s < recomputed.slots.size(); ++s)
      CHECK(result.truth.slots[s] == recomputed.slots[s]);
  }
  SUBCASE("background never exceeds the distinct cap") {
    SynthSpec spec;
    spec.slots = 10;
    spec.background_hosts = 20;
    spec.pairs_per_slot = 2000;
    spec.max_distinct_per_host = 7;
    const auto result = synth_trace(spec, 12, win);
    const auto truth = exact_counts(result.trace, WindowConfig{1.0, 10, 0});
    for (const auto& slot : truth.slots)
      for (const auto& [cip, count] : slot) CHECK(count <= 7);
  }
  SUBCASE("invalid specs rejected") {
    SynthSpec spec;
    spec.slots = 2;
    spec.planted.push_back({1, 10, 0, 5});  // slot_hi beyond trace
    CHECK_THROWS_AS(synth_trace(spec, 1, win), std::invalid_argument);
    spec.planted[0] = {1, 0, 0, 1};  // zero count
    CHECK_THROWS_AS(synth_trace(spec, 1, win), std::invalid_argument);
    spec.planted[0] = {1, 5, 0, 1};
    spec.planted.push_back({1, 5, 0, 1});  // duplicate cip
    CHECK_THROWS_AS(synth_trace(spec, 1, win), std::invalid_argument);
  }
}

TEST_CASE("parse_synth_spec") {
  std::istringstream in(
      "# demo\n"
      "slots 40\n"
      "background hosts=500 zipf=1.1 pairs-per-slot=1000 max-distinct=16\n"
      "super cip=10.0.0.1 count=2048 from=0 to=39\n"
      "super cip=10.0.0.2 count=256\n");
  const auto spec = parse_synth_spec(in);
  CHECK(spec.slots == 40);
  CHECK(spec.background_hosts == 500);
  CHECK(spec.zipf_exponent == 1.1);
  CHECK(spec.pairs_per_slot == 1000);
  CHECK(spec.max_distinct_per_host == 16);
  REQUIRE(spec.planted.size() == 2);
  CHECK(spec.planted[0].cip == 0x0A000001);
  CHECK(spec.planted[0].count == 2048);
  CHECK(spec.planted[1].slot_lo == 0);
  CHECK(spec.planted[1].slot_hi == 0);

  std::istringstream bad("bogus stanza\n");
  CHECK_THROWS_AS(parse_synth_spec(bad), std::invalid_argument);
}

TEST_CASE("evaluate") {
  std::unordered_map<uint32_t, uint32_t> truth;
  for (uint32_t i = 1; i <= 10; ++i) truth[i] = 2000;  // 10 true supers
  for (uint32_t i = 100; i < 120; ++i) truth[i] = 3;   // normal hosts

  SUBCASE("perfect report") {
    std::unordered_set<uint32_t> reported;
    for (uint32_t i = 1; i <= 10; ++i) reported.insert(i);
    const auto result = evaluate(reported, truth, 1024);
    CHECK(result.fpr == 0.0);
    CHECK(result.fnr == 0.0);
    CHECK(result.tfr == 0.0);
    CHECK_FALSE(result.degenerate);
  }
  SUBCASE("one extra, two missing") {
    std::unordered_set<uint32_t> reported;
    for (uint32_t i = 1; i <= 8; ++i) reported.insert(i);
    reported.insert(100);
    const auto result = evaluate(reported, truth, 1024);
    CHECK(result.fpr == doctest::Approx(0.1));
    CHECK(result.fnr == doctest::Approx(0.2));
    CHECK(result.tfr == doctest::Approx(0.3));
  }
  SUBCASE("degenerate: no true supers") {
    const auto quiet = evaluate({}, {{5, 3}}, 1024);
    CHECK(quiet.fpr == 0.0);
    CHECK(quiet.degenerate);
    const auto noisy = evaluate({1, 2}, {{5, 3}}, 1024);
    CHECK(noisy.fpr == 2.0);
    CHECK(noisy.degenerate);
  }
}
