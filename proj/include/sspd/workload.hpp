#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace sspd {

// Oriented IP pair with a timestamp in epoch seconds.
struct TraceRecord {
  uint32_t ts;
  uint32_t cip;
  uint32_t oip;

  bool operator==(const TraceRecord&) const = default;
};

enum class TraceFormat { kBinary, kText };

inline constexpr char kTraceMagic[4] = {'S', 'S', 'P', 'T'};
inline constexpr uint32_t kTraceVersion = 1;

// Binary: 8-byte header (magic, version) then 12-byte little-endian records.
// Text: one "ts,cip,oip" line per record, addresses dotted-quad or decimal.
// Rejects malformed records (with their position) and timestamp regressions.
std::vector<TraceRecord> read_trace(std::istream& in, TraceFormat format);
void write_trace(std::span<const TraceRecord> records, std::ostream& out,
                 TraceFormat format);

uint32_t parse_ipv4(const std::string& text);
std::string format_ipv4(uint32_t ip);

// Core-network membership by CIDR prefixes.
class CnetSpec {
 public:
  explicit CnetSpec(const std::vector<std::string>& cidrs);
  bool contains(uint32_t ip) const;

 private:
  struct Prefix {
    uint32_t net;
    uint32_t mask;
  };
  std::vector<Prefix> prefixes_;
};

// Orients an unordered pair: (inside, outside) when exactly one endpoint is
// in the core network, nothing otherwise.
std::optional<std::pair<uint32_t, uint32_t>> orient_pair(uint32_t src,
                                                         uint32_t dst,
                                                         const CnetSpec& cnet);

struct WindowConfig {
  double mu = 1.0;   // slot duration, seconds
  uint32_t k = 300;  // window length in slots
  uint32_t start = 0;
};

inline uint64_t slot_of(uint32_t ts, const WindowConfig& win) {
  return static_cast<uint64_t>((ts - win.start) / win.mu);
}

// Exact per-slot opposite numbers over the trailing k-slot window.
struct GroundTruth {
  // truth[s][cip] = distinct opposite hosts of cip in slots max(0,s-k+1)..s
  std::vector<std::unordered_map<uint32_t, uint32_t>> slots;
};

// The precise algorithm: per-slot distinct sets plus a trailing-window union.
GroundTruth exact_counts(std::span<const TraceRecord> trace,
                         const WindowConfig& win);

// Synthetic workload: planted super points with known opposite numbers over
// known slot ranges, plus Zipf background noise with a hard per-host cap on
// distinct opposites.
struct SynthSpec {
  struct Planted {
    uint32_t cip;
    uint32_t count;    // distinct opposite hosts, emitted in full each
    uint32_t slot_lo;  // active slot, so every overlapping window sees count
    uint32_t slot_hi;
  };
  std::vector<Planted> planted;
  uint32_t background_hosts = 0;
  double zipf_exponent = 1.1;
  uint32_t pairs_per_slot = 0;
  uint32_t max_distinct_per_host = 16;
  uint32_t slots = 1;
};

struct SynthResult {
  std::vector<TraceRecord> trace;
  GroundTruth truth;  // from generator bookkeeping, not from re-parsing
};

SynthResult synth_trace(const SynthSpec& spec, uint64_t seed,
                        const WindowConfig& win);

// Parses the text spec format used by the CLI: "slots", "background" and
// "super" stanzas, one per line, key=value fields.
SynthSpec parse_synth_spec(std::istream& in);

struct AccuracyResult {
  double fpr = 0;
  double fnr = 0;
  double tfr = 0;
  bool degenerate = false;  // no true super points in this slot
};

// FPR and FNR are both normalized by the number of true super points, so FPR
// can exceed 1 when there are few of them.
AccuracyResult evaluate(const std::unordered_set<uint32_t>& reported,
                        const std::unordered_map<uint32_t, uint32_t>& truth,
                        double theta);

}  // namespace sspd
