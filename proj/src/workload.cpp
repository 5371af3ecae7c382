#include "sspd/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sspd {
namespace {

uint64_t mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

uint32_t get_u32le(const char* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

void put_u32le(char* p, uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

}  // namespace

uint32_t parse_ipv4(const std::string& text) {
  if (text.find('.') == std::string::npos) {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(text, &pos);
    if (pos != text.size() || v > 0xffffffffULL)
      throw std::invalid_argument("bad IPv4 value: " + text);
    return static_cast<uint32_t>(v);
  }
  uint32_t ip = 0;
  std::istringstream ss(text);
  std::string part;
  int octets = 0;
  while (std::getline(ss, part, '.')) {
    if (part.empty() || part.size() > 3 || ++octets > 4)
      throw std::invalid_argument("bad dotted-quad: " + text);
    const int v = std::stoi(part);
    if (v < 0 || v > 255) throw std::invalid_argument("bad dotted-quad: " + text);
    ip = (ip << 8) | static_cast<uint32_t>(v);
  }
  if (octets != 4) throw std::invalid_argument("bad dotted-quad: " + text);
  return ip;
}

std::string format_ipv4(uint32_t ip) {
  return std::to_string(ip >> 24) + "." + std::to_string((ip >> 16) & 0xff) +
         "." + std::to_string((ip >> 8) & 0xff) + "." +
         std::to_string(ip & 0xff);
}

std::vector<TraceRecord> read_trace(std::istream& in, TraceFormat format) {
  std::vector<TraceRecord> records;
  uint32_t last_ts = 0;
  bool have_last = false;
  auto check_order = [&](uint32_t ts, std::size_t pos) {
    if (have_last && ts < last_ts)
      throw std::runtime_error("trace: timestamp regression at record " +
                               std::to_string(pos));
    last_ts = ts;
    have_last = true;
  };

  if (format == TraceFormat::kBinary) {
    char header[8];
    in.read(header, sizeof(header));
    if (in.gcount() == 0) return records;  // empty payload, empty stream
    if (in.gcount() != 8 || std::memcmp(header, kTraceMagic, 4) != 0)
      throw std::runtime_error("trace: bad magic");
    if (get_u32le(header + 4) != kTraceVersion)
      throw std::runtime_error("trace: unsupported version");
    char rec[12];
    while (in.read(rec, sizeof(rec))) {
      TraceRecord r{get_u32le(rec), get_u32le(rec + 4), get_u32le(rec + 8)};
      check_order(r.ts, records.size());
      records.push_back(r);
    }
    if (in.gcount() != 0)
      throw std::runtime_error("trace: truncated record at position " +
                               std::to_string(records.size()));
    return records;
  }

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string ts_s, cip_s, oip_s;
    if (!std::getline(ss, ts_s, ',') || !std::getline(ss, cip_s, ',') ||
        !std::getline(ss, oip_s))
      throw std::runtime_error("trace: malformed line " +
                               std::to_string(lineno));
    TraceRecord r;
    try {
      r.ts = static_cast<uint32_t>(std::stoull(ts_s));
      r.cip = parse_ipv4(cip_s);
      r.oip = parse_ipv4(oip_s);
    } catch (const std::exception&) {
      throw std::runtime_error("trace: malformed line " +
                               std::to_string(lineno));
    }
    check_order(r.ts, records.size());
    records.push_back(r);
  }
  return records;
}

void write_trace(std::span<const TraceRecord> records, std::ostream& out,
                 TraceFormat format) {
  if (format == TraceFormat::kBinary) {
    char header[8];
    std::memcpy(header, kTraceMagic, 4);
    put_u32le(header + 4, kTraceVersion);
    out.write(header, sizeof(header));
    char rec[12];
    for (const TraceRecord& r : records) {
      put_u32le(rec, r.ts);
      put_u32le(rec + 4, r.cip);
      put_u32le(rec + 8, r.oip);
      out.write(rec, sizeof(rec));
    }
  } else {
    for (const TraceRecord& r : records)
      out << r.ts << ',' << format_ipv4(r.cip) << ',' << format_ipv4(r.oip)
          << '\n';
  }
  if (!out) throw std::runtime_error("trace: write failure");
}

CnetSpec::CnetSpec(const std::vector<std::string>& cidrs) {
  if (cidrs.empty()) throw std::invalid_argument("CnetSpec: no prefixes");
  for (const std::string& c : cidrs) {
    const auto slash = c.find('/');
    if (slash == std::string::npos)
      throw std::invalid_argument("CnetSpec: missing prefix length: " + c);
    const uint32_t net = parse_ipv4(c.substr(0, slash));
    const int len = std::stoi(c.substr(slash + 1));
    if (len < 0 || len > 32)
      throw std::invalid_argument("CnetSpec: bad prefix length: " + c);
    const uint32_t mask =
        len == 0 ? 0 : ~uint32_t{0} << (32 - len);
    prefixes_.push_back({net & mask, mask});
  }
}

bool CnetSpec::contains(uint32_t ip) const {
  for (const Prefix& p : prefixes_)
    if ((ip & p.mask) == p.net) return true;
  return false;
}

std::optional<std::pair<uint32_t, uint32_t>> orient_pair(
    uint32_t src, uint32_t dst, const CnetSpec& cnet) {
  const bool src_in = cnet.contains(src);
  const bool dst_in = cnet.contains(dst);
  if (src_in == dst_in) return std::nullopt;
  if (src_in) return std::make_pair(src, dst);
  return std::make_pair(dst, src);
}

namespace {

// Per-slot distinct opposite sets, then trailing k-slot unions.
GroundTruth sliding_truth(
    const std::vector<std::unordered_map<uint32_t,
                                         std::unordered_set<uint32_t>>>&
        per_slot,
    uint32_t k) {
  GroundTruth truth;
  truth.slots.resize(per_slot.size());
  for (std::size_t s = 0; s < per_slot.size(); ++s) {
    const std::size_t lo = s + 1 >= k ? s + 1 - k : 0;
    std::unordered_map<uint32_t, std::unordered_set<uint32_t>> window;
    for (std::size_t j = lo; j <= s; ++j)
      for (const auto& [cip, oips] : per_slot[j])
        window[cip].insert(oips.begin(), oips.end());
    for (const auto& [cip, oips] : window)
      truth.slots[s][cip] = static_cast<uint32_t>(oips.size());
  }
  return truth;
}

}  // namespace

GroundTruth exact_counts(std::span<const TraceRecord> trace,
                         const WindowConfig& win) {
  std::vector<std::unordered_map<uint32_t, std::unordered_set<uint32_t>>>
      per_slot;
  for (const TraceRecord& r : trace) {
    if (r.ts < win.start)
      throw std::invalid_argument("exact_counts: record before window start");
    const uint64_t s = slot_of(r.ts, win);
    if (s >= per_slot.size()) per_slot.resize(s + 1);
    per_slot[s][r.cip].insert(r.oip);
  }
  return sliding_truth(per_slot, win.k);
}

SynthResult synth_trace(const SynthSpec& spec, uint64_t seed,
                        const WindowConfig& win) {
  if (spec.slots == 0) throw std::invalid_argument("synth: slots == 0");
  std::unordered_set<uint32_t> planted_cips;
  for (const auto& p : spec.planted) {
    if (p.count < 1) throw std::invalid_argument("synth: planted count < 1");
    if (!planted_cips.insert(p.cip).second)
      throw std::invalid_argument("synth: duplicate planted cip " +
                                  format_ipv4(p.cip));
    if (p.slot_lo > p.slot_hi || p.slot_hi >= spec.slots)
      throw std::invalid_argument("synth: bad slot range for " +
                                  format_ipv4(p.cip));
  }

  std::mt19937_64 rng(seed);

  // Distinct opposite set per planted host.
  std::vector<std::vector<uint32_t>> planted_oips(spec.planted.size());
  for (std::size_t i = 0; i < spec.planted.size(); ++i) {
    std::unordered_set<uint32_t> seen;
    auto& oips = planted_oips[i];
    oips.reserve(spec.planted[i].count);
    while (oips.size() < spec.planted[i].count) {
      const uint32_t oip = static_cast<uint32_t>(rng());
      if (seen.insert(oip).second) oips.push_back(oip);
    }
  }

  // Background hosts draw from fixed per-host pools so their distinct
  // opposite count can never exceed the cap, in any window.
  std::vector<double> zipf_cdf;
  std::vector<uint32_t> bg_cips(spec.background_hosts);
  if (spec.background_hosts > 0) {
    if (spec.max_distinct_per_host < 1)
      throw std::invalid_argument("synth: max_distinct_per_host < 1");
    zipf_cdf.resize(spec.background_hosts);
    double acc = 0;
    for (uint32_t i = 0; i < spec.background_hosts; ++i) {
      acc += std::pow(static_cast<double>(i + 1), -spec.zipf_exponent);
      zipf_cdf[i] = acc;
    }
    for (uint32_t i = 0; i < spec.background_hosts; ++i) {
      uint32_t cip = static_cast<uint32_t>(mix64(seed ^ 0xb6e151628aed2a6bULL ^
                                                 (uint64_t{i} << 20)));
      while (planted_cips.count(cip)) ++cip;
      bg_cips[i] = cip;
    }
  }

  SynthResult result;
  std::vector<std::unordered_map<uint32_t, std::unordered_set<uint32_t>>>
      per_slot(spec.slots);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (uint32_t s = 0; s < spec.slots; ++s) {
    const uint32_t ts =
        win.start + static_cast<uint32_t>(s * win.mu);
    for (std::size_t i = 0; i < spec.planted.size(); ++i) {
      const auto& p = spec.planted[i];
      if (s < p.slot_lo || s > p.slot_hi) continue;
      auto& book = per_slot[s][p.cip];
      for (uint32_t oip : planted_oips[i]) {
        result.trace.push_back({ts, p.cip, oip});
        book.insert(oip);
      }
    }
    for (uint32_t j = 0; j < spec.pairs_per_slot; ++j) {
      if (spec.background_hosts == 0) break;
      const double u = unit(rng) * zipf_cdf.back();
      const auto it =
          std::upper_bound(zipf_cdf.begin(), zipf_cdf.end(), u);
      const uint32_t host = static_cast<uint32_t>(
          std::min<std::ptrdiff_t>(it - zipf_cdf.begin(),
                                   spec.background_hosts - 1));
      const uint32_t slot_in_pool =
          static_cast<uint32_t>(rng() % spec.max_distinct_per_host);
      const uint32_t oip = static_cast<uint32_t>(
          mix64(seed ^ 0x1f83d9abfb41bd6bULL ^ (uint64_t{host} << 16) ^
                slot_in_pool));
      result.trace.push_back({ts, bg_cips[host], oip});
      per_slot[s][bg_cips[host]].insert(oip);
    }
  }
  result.truth = sliding_truth(per_slot, win.k);
  return result;
}

SynthSpec parse_synth_spec(std::istream& in) {
  SynthSpec spec;
  std::string line;
  std::size_t lineno = 0;
  auto fields = [](std::istringstream& ss) {
    std::unordered_map<std::string, std::string> kv;
    std::string tok;
    while (ss >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("expected key=value, got: " + tok);
      kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string kind;
    ss >> kind;
    try {
      if (kind == "slots") {
        ss >> spec.slots;
      } else if (kind == "background") {
        auto kv = fields(ss);
        if (kv.count("hosts"))
          spec.background_hosts = static_cast<uint32_t>(std::stoul(kv["hosts"]));
        if (kv.count("zipf")) spec.zipf_exponent = std::stod(kv["zipf"]);
        if (kv.count("pairs-per-slot"))
          spec.pairs_per_slot =
              static_cast<uint32_t>(std::stoul(kv["pairs-per-slot"]));
        if (kv.count("max-distinct"))
          spec.max_distinct_per_host =
              static_cast<uint32_t>(std::stoul(kv["max-distinct"]));
      } else if (kind == "super") {
        auto kv = fields(ss);
        SynthSpec::Planted p{};
        p.cip = parse_ipv4(kv.at("cip"));
        p.count = static_cast<uint32_t>(std::stoul(kv.at("count")));
        p.slot_lo = kv.count("from")
                        ? static_cast<uint32_t>(std::stoul(kv["from"]))
                        : 0;
        p.slot_hi = kv.count("to")
                        ? static_cast<uint32_t>(std::stoul(kv["to"]))
                        : p.slot_lo;
        spec.planted.push_back(p);
      } else {
        throw std::invalid_argument("unknown stanza: " + kind);
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument("synth spec line " + std::to_string(lineno) +
                                  ": " + e.what());
    }
  }
  return spec;
}

AccuracyResult evaluate(const std::unordered_set<uint32_t>& reported,
                        const std::unordered_map<uint32_t, uint32_t>& truth,
                        double theta) {
  std::unordered_set<uint32_t> super;
  for (const auto& [cip, count] : truth)
    if (count >= theta) super.insert(cip);

  AccuracyResult result;
  if (super.empty()) {
    result.degenerate = true;
    result.fpr = reported.empty() ? 0.0 : static_cast<double>(reported.size());
    result.fnr = 0.0;
    result.tfr = result.fpr + result.fnr;
    return result;
  }
  std::size_t false_pos = 0;
  for (uint32_t cip : reported)
    if (!super.count(cip)) ++false_pos;
  std::size_t false_neg = 0;
  for (uint32_t cip : super)
    if (!reported.count(cip)) ++false_neg;
  result.fpr = static_cast<double>(false_pos) / super.size();
  result.fnr = static_cast<double>(false_neg) / super.size();
  result.tfr = result.fpr + result.fnr;
  return result;
}

}  // namespace sspd
