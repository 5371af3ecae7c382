#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "sspd/pipeline.hpp"
#include "sspd/snapshot.hpp"
#include "sspd/workload.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitInputError = 3;
constexpr int kExitResourceCap = 4;

struct CommonOpts {
  sspd::RunConfig rc;
  std::string seed_hex = "0";
  bool desk = false;
  std::string format = "bin";
  std::string policy = "min";
  std::string strategy = "leveled";

  void add_params(CLI::App* app) {
    app->add_option("--eta", rc.eta, "distance recorders per estimator");
    app->add_option("--q", rc.cfg.q, "column index bit-width");
    app->add_option("--r", rc.cfg.r, "rows / hash functions");
    app->add_option("--delta", rc.cfg.delta, "block stride in bits");
    app->add_option("--k", rc.window.k, "window length in slots");
    app->add_option("--mu", rc.window.mu, "slot duration in seconds");
    app->add_option("--theta", rc.theta, "super point threshold");
    app->add_option("--seed", seed_hex, "64-bit hash seed, hexadecimal");
    app->add_option("--alpha", rc.alpha, "scan batch capacity");
    app->add_option("--workers", rc.workers, "worker count");
    app->add_option("--start", rc.window.start, "epoch timestamp of slot 0");
    app->add_option("--merge-policy", policy, "min | paper-max")
        ->check(CLI::IsMember({"min", "paper-max"}));
    app->add_option("--strategy", strategy, "recursive | leveled")
        ->check(CLI::IsMember({"recursive", "leveled"}));
    app->add_flag("--desk", desk,
                  "small preset: eta=256 q=10 delta=8 r=5 theta=128 k=30");
    app->add_option("--format", format, "trace format: bin | text")
        ->check(CLI::IsMember({"bin", "text"}));
  }

  void resolve() {
    if (desk) {
      // Preset fills whatever was left at its default; explicit flags win.
      const sspd::RunConfig def;
      const sspd::RunConfig d = sspd::desk_preset();
      if (rc.cfg.q == def.cfg.q) rc.cfg.q = d.cfg.q;
      if (rc.cfg.delta == def.cfg.delta) rc.cfg.delta = d.cfg.delta;
      if (rc.cfg.r == def.cfg.r) rc.cfg.r = d.cfg.r;
      if (rc.eta == def.eta) rc.eta = d.eta;
      if (rc.theta == def.theta) rc.theta = d.theta;
      if (rc.window.k == def.window.k) rc.window.k = d.window.k;
    }
    rc.cfg.seed = std::stoull(seed_hex, nullptr, 16);
    rc.policy = policy == "min" ? sspd::MergePolicy::kUnionMin
                                : sspd::MergePolicy::kPaperMax;
    rc.strategy = strategy == "recursive" ? sspd::Strategy::kRecursive
                                          : sspd::Strategy::kLeveled;
    auto problems =
        sspd::validate_config(rc.cfg, rc.eta, rc.window.k, rc.theta);
    if (!problems.empty()) {
      std::string msg = "invalid configuration:";
      for (const auto& p : problems) msg += "\n  " + p;
      throw std::invalid_argument(msg);
    }
  }

  sspd::TraceFormat trace_format() const {
    return format == "bin" ? sspd::TraceFormat::kBinary
                           : sspd::TraceFormat::kText;
  }
};

std::vector<sspd::TraceRecord> load_trace(const std::string& path,
                                          sspd::TraceFormat format) {
  if (path == "-") return sspd::read_trace(std::cin, format);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace: " + path);
  return sspd::read_trace(in, format);
}

class OutputFile {
 public:
  explicit OutputFile(const std::string& path) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot open output: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void print_reports(const std::vector<sspd::DetectionReport>& reports,
                   std::ostream& out) {
  for (const auto& report : reports)
    for (const auto& host : report.hosts)
      out << report.slot << ',' << sspd::format_ipv4(host.cip) << ','
          << host.estimate << '\n';
}

int cmd_detect(const std::vector<std::string>& traces, const CommonOpts& opts,
               const std::string& out_path) {
  std::vector<std::vector<sspd::TraceRecord>> shards;
  for (const auto& path : traces)
    shards.push_back(load_trace(path, opts.trace_format()));
  auto reports = sspd::run_detection(shards, opts.rc);
  OutputFile out(out_path);
  print_reports(reports, out.stream());
  return 0;
}

int cmd_oracle(const std::string& trace_path, const CommonOpts& opts,
               uint32_t min_count, const std::string& out_path) {
  auto trace = load_trace(trace_path, opts.trace_format());
  auto truth = sspd::exact_counts(trace, opts.rc.window);
  OutputFile out(out_path);
  for (std::size_t s = 0; s < truth.slots.size(); ++s) {
    std::map<uint32_t, uint32_t> sorted(truth.slots[s].begin(),
                                        truth.slots[s].end());
    for (const auto& [cip, count] : sorted)
      if (count >= min_count)
        out.stream() << s << ',' << sspd::format_ipv4(cip) << ',' << count
                     << '\n';
  }
  return 0;
}

int cmd_eval(const std::string& reports_path, const std::string& truth_path,
             double theta, const std::string& out_path) {
  auto parse_rows = [](const std::string& path, auto&& row) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      std::string slot_s, cip_s, value_s;
      if (!std::getline(ss, slot_s, ',') || !std::getline(ss, cip_s, ',') ||
          !std::getline(ss, value_s))
        throw std::runtime_error(path + ": malformed line " +
                                 std::to_string(lineno));
      row(std::stoull(slot_s), sspd::parse_ipv4(cip_s), value_s);
    }
  };

  std::map<uint64_t, std::unordered_set<uint32_t>> reported;
  uint64_t max_report_slot = 0;
  parse_rows(reports_path, [&](uint64_t slot, uint32_t cip, const std::string&) {
    reported[slot].insert(cip);
    max_report_slot = std::max(max_report_slot, slot);
  });
  std::map<uint64_t, std::unordered_map<uint32_t, uint32_t>> truth;
  uint64_t max_truth_slot = 0;
  parse_rows(truth_path, [&](uint64_t slot, uint32_t cip,
                             const std::string& value) {
    truth[slot][cip] = static_cast<uint32_t>(std::stoul(value));
    max_truth_slot = std::max(max_truth_slot, slot);
  });
  if (!reported.empty() && max_report_slot > max_truth_slot)
    throw std::runtime_error("slot misalignment: reports reach slot " +
                             std::to_string(max_report_slot) +
                             " but truth ends at " +
                             std::to_string(max_truth_slot));

  OutputFile out(out_path);
  double sum_fpr = 0, sum_fnr = 0, sum_tfr = 0;
  std::size_t n = 0;
  static const std::unordered_set<uint32_t> kEmptyReported;
  static const std::unordered_map<uint32_t, uint32_t> kEmptyTruth;
  for (uint64_t slot = 0; slot <= max_truth_slot; ++slot) {
    const auto rep_it = reported.find(slot);
    const auto truth_it = truth.find(slot);
    const auto result = sspd::evaluate(
        rep_it == reported.end() ? kEmptyReported : rep_it->second,
        truth_it == truth.end() ? kEmptyTruth : truth_it->second, theta);
    out.stream() << slot << ',' << result.fpr << ',' << result.fnr << ','
                 << result.tfr << (result.degenerate ? ",degenerate" : "")
                 << '\n';
    sum_fpr += result.fpr;
    sum_fnr += result.fnr;
    sum_tfr += result.tfr;
    ++n;
  }
  if (n > 0)
    out.stream() << "mean," << sum_fpr / n << ',' << sum_fnr / n << ','
                 << sum_tfr / n << '\n';
  return 0;
}

int cmd_synth(const std::string& spec_path, const CommonOpts& opts,
              const std::string& out_path, const std::string& truth_path) {
  std::ifstream spec_in(spec_path);
  if (!spec_in) throw std::runtime_error("cannot open spec: " + spec_path);
  const sspd::SynthSpec spec = sspd::parse_synth_spec(spec_in);
  const auto result =
      sspd::synth_trace(spec, opts.rc.cfg.seed, opts.rc.window);
  OutputFile out(out_path);
  sspd::write_trace(result.trace, out.stream(), opts.trace_format());
  if (!truth_path.empty()) {
    OutputFile truth_out(truth_path);
    for (std::size_t s = 0; s < result.truth.slots.size(); ++s) {
      std::map<uint32_t, uint32_t> sorted(result.truth.slots[s].begin(),
                                          result.truth.slots[s].end());
      for (const auto& [cip, count] : sorted)
        truth_out.stream() << s << ',' << sspd::format_ipv4(cip) << ','
                           << count << '\n';
    }
  }
  return 0;
}

int cmd_snapshot_export(const std::string& trace_path, const CommonOpts& opts,
                        uint32_t node_id, const std::string& out_path) {
  auto trace = load_trace(trace_path, opts.trace_format());
  sspd::Rsea rsea(opts.rc.cfg, opts.rc.eta);
  uint64_t n_slots = 0;
  for (const auto& r : trace)
    n_slots = std::max(n_slots, sspd::slot_of(r.ts, opts.rc.window) + 1);
  std::size_t pos = 0;
  std::vector<sspd::IpPair> batch;
  for (uint64_t slot = 0; slot < n_slots; ++slot) {
    batch.clear();
    while (pos < trace.size() &&
           sspd::slot_of(trace[pos].ts, opts.rc.window) == slot) {
      batch.push_back({trace[pos].cip, trace[pos].oip});
      ++pos;
    }
    rsea.scan_batch(batch, opts.rc.workers);
    if (slot + 1 < n_slots) rsea.advance_slot(opts.rc.workers);
  }
  sspd::SnapshotMeta meta;
  meta.seed = opts.rc.cfg.seed;
  meta.q = opts.rc.cfg.q;
  meta.r = opts.rc.cfg.r;
  meta.delta = opts.rc.cfg.delta;
  meta.eta = opts.rc.eta;
  meta.k = opts.rc.window.k;
  meta.theta = static_cast<uint32_t>(opts.rc.theta);
  meta.slot = n_slots == 0 ? 0 : n_slots - 1;
  meta.node_id = node_id;
  OutputFile out(out_path);
  sspd::export_snapshot(rsea, meta, out.stream());
  return 0;
}

int cmd_snapshot_info(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot: " + path);
  const auto snap = sspd::import_snapshot(in);
  std::cout << "seed=" << std::hex << snap.meta.seed << std::dec
            << " q=" << snap.meta.q << " r=" << snap.meta.r
            << " delta=" << snap.meta.delta << " eta=" << snap.meta.eta
            << " k=" << snap.meta.k << " theta=" << snap.meta.theta
            << " slot=" << snap.meta.slot << " node=" << snap.meta.node_id
            << " payload="
            << sspd::snapshot_payload_size(snap.meta.eta, snap.meta.r,
                                           snap.meta.q)
            << '\n';
  return 0;
}

int cmd_snapshot_merge(const std::vector<std::string>& paths,
                       const std::string& policy,
                       const std::string& out_path) {
  std::vector<sspd::ImportedSnapshot> snaps;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    snaps.push_back(sspd::import_snapshot(in));
  }
  for (std::size_t i = 1; i < snaps.size(); ++i) {
    const auto& a = snaps[0].meta;
    const auto& b = snaps[i].meta;
    if (a.q != b.q)
      throw std::runtime_error("incompatible snapshots: q=" +
                               std::to_string(a.q) + " vs q=" +
                               std::to_string(b.q));
    if (a.seed != b.seed || a.r != b.r || a.delta != b.delta || a.eta != b.eta)
      throw std::runtime_error(
          "incompatible snapshots: seed/r/delta/eta differ");
  }
  std::vector<const sspd::Rsea*> grids;
  for (const auto& s : snaps) grids.push_back(&s.rsea);
  const sspd::Rsea merged =
      sspd::merge_rseas(grids, policy == "min"
                                   ? sspd::MergePolicy::kUnionMin
                                   : sspd::MergePolicy::kPaperMax);
  OutputFile out(out_path);
  sspd::export_snapshot(merged, snaps[0].meta, out.stream());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sliding super point detector"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* detect = app.add_subcommand(
      "detect", "run detection over one or more trace shards");
  std::vector<std::string> detect_traces;
  std::string detect_out = "-";
  detect->add_option("trace", detect_traces, "trace file(s), - for stdin")
      ->required();
  detect->add_option("-o,--output", detect_out, "report output, - for stdout");
  opts.add_params(detect);

  auto* oracle = app.add_subcommand(
      "oracle", "exact sliding-window opposite numbers (precise algorithm)");
  std::string oracle_trace;
  std::string oracle_out = "-";
  uint32_t oracle_min = 1;
  oracle->add_option("trace", oracle_trace, "trace file, - for stdin")
      ->required();
  oracle->add_option("-o,--output", oracle_out, "truth table output");
  oracle->add_option("--min-count", oracle_min, "only emit counts >= this");
  opts.add_params(oracle);

  auto* eval = app.add_subcommand("eval", "score reports against exact truth");
  std::string eval_reports, eval_truth;
  std::string eval_out = "-";
  double eval_theta = 1024;
  eval->add_option("--reports", eval_reports, "detect output file")->required();
  eval->add_option("--truth", eval_truth, "oracle output file")->required();
  eval->add_option("--theta", eval_theta, "super point threshold");
  eval->add_option("-o,--output", eval_out, "eval table output");

  auto* synth = app.add_subcommand("synth", "generate a synthetic trace");
  std::string synth_spec;
  std::string synth_out = "-";
  std::string synth_truth;
  synth->add_option("spec", synth_spec, "synthetic workload spec file")
      ->required();
  synth->add_option("-o,--output", synth_out, "trace output");
  synth->add_option("--truth-out", synth_truth, "ground truth table output");
  opts.add_params(synth);

  auto* snapshot = app.add_subcommand("snapshot", "RSEA snapshot operations");
  snapshot->require_subcommand(1);
  auto* snap_export = snapshot->add_subcommand(
      "export", "scan a trace and write the final RSEA state");
  std::string export_trace;
  std::string export_out = "-";
  uint32_t export_node = 0;
  snap_export->add_option("trace", export_trace, "trace file")->required();
  snap_export->add_option("-o,--output", export_out, "snapshot output");
  snap_export->add_option("--node-id", export_node, "node id for the header");
  opts.add_params(snap_export);

  auto* snap_info = snapshot->add_subcommand("info", "print snapshot header");
  std::string info_path;
  snap_info->add_option("snapshot", info_path)->required();

  auto* snap_merge =
      snapshot->add_subcommand("merge", "merge snapshots into a GRSEA");
  std::vector<std::string> merge_paths;
  std::string merge_policy = "min";
  std::string merge_out = "-";
  snap_merge->add_option("snapshots", merge_paths)->required()->expected(-1);
  snap_merge->add_option("--merge-policy", merge_policy, "min | paper-max")
      ->check(CLI::IsMember({"min", "paper-max"}));
  snap_merge->add_option("-o,--output", merge_out, "merged snapshot output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (detect->parsed() || oracle->parsed() || synth->parsed() ||
        snap_export->parsed()) {
      try {
        opts.resolve();
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
      }
    }
    if (detect->parsed()) return cmd_detect(detect_traces, opts, detect_out);
    if (oracle->parsed())
      return cmd_oracle(oracle_trace, opts, oracle_min, oracle_out);
    if (eval->parsed())
      return cmd_eval(eval_reports, eval_truth, eval_theta, eval_out);
    if (synth->parsed())
      return cmd_synth(synth_spec, opts, synth_out, synth_truth);
    if (snap_export->parsed())
      return cmd_snapshot_export(export_trace, opts, export_node, export_out);
    if (snap_info->parsed()) return cmd_snapshot_info(info_path);
    if (snap_merge->parsed())
      return cmd_snapshot_merge(merge_paths, merge_policy, merge_out);
  } catch (const sspd::CandidateOverflow& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitResourceCap;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return 0;
}
