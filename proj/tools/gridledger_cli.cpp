// gridledger: run scenarios, inspect and verify chain exports, trace
// provenance, and dump credit, role, and storage tables from a report dir.
//
// Exit codes: 0 ok, 1 verification failure, 2 usage or parse error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "gridledger/chain.hpp"
#include "gridledger/credit.hpp"
#include "gridledger/report.hpp"
#include "gridledger/scenario.hpp"
#include "gridledger/simnet.hpp"

namespace fs = std::filesystem;
using namespace gridledger;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
  if (const char* env = std::getenv("GRIDLEDGER_OUT"); env && *env) return env;
  return "gridledger-out";
}

Chain load_chain(const fs::path& path, std::vector<Bytes>* raw = nullptr) {
  const auto text = read_text_file(path);
  auto encoded = parse_export(text);
  if (raw) *raw = encoded;
  return decode_chain(encoded);
}

int cmd_run(const std::string& scenario_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir, std::optional<Tick> until) {
  std::string text;
  try {
    text = read_text_file(scenario_path);
  } catch (const ReportError& e) {
    std::cerr << "gridledger: " << e.what() << '\n';
    return kUsage;
  }
  Scenario scenario;
  try {
    scenario = parse_scenario(text);
  } catch (const ScenarioError& e) {
    std::cerr << "gridledger: " << scenario_path << ": " << e.what() << '\n';
    return kUsage;
  }
  auto config = SimConfig::from_scenario(scenario);
  if (seed) config.seed = *seed;
  const auto stop = until ? until : scenario.run_until;
  if (!stop) {
    std::cerr << "gridledger: " << scenario_path << ": no `run until` directive and no --until\n";
    return kUsage;
  }
  try {
    Simulation sim(config, scenario);
    const auto report = sim.run(*stop);
    write_report(out_dir, report, sim.datastore());
    std::cout << "ran " << scenario_path << " to tick "
              << render_tick(report.final_tick, config.tick_length_seconds) << ": "
              << report.metrics.blocks_committed << " blocks, " << report.metrics.records_committed
              << " records, " << report.metrics.records_quarantined << " quarantined -> "
              << out_dir << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "gridledger: " << scenario_path << ": " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}

int cmd_inspect(const std::string& path, std::uint64_t tick_length) {
  const auto chain = load_chain(path);
  std::cout << "block\ttick\trecords\tdigest\tmerkle_root\trecorder\n";
  for (std::size_t i = 0; i < chain.blocks.size(); ++i) {
    const auto& b = chain.blocks[i];
    std::cout << i << '\t' << render_tick(b.header.timestamp_tick, tick_length) << '\t'
              << b.records.size() << '\t' << block_digest(b).hex() << '\t'
              << b.header.merkle_root.hex() << '\t' << b.header.recorder_public_key.hex() << '\n';
    for (std::size_t r = 0; r < b.records.size(); ++r) {
      const auto& rec = b.records[r];
      std::cout << "  " << i << '.' << r << '\t' << to_string(rec.metadata.kind) << '\t'
                << rec.metadata.data_class << '\t' << rec.payload_digest.hex() << '\t'
                << rec.uploader_public_key.hex() << '\n';
    }
  }
  return kOk;
}

int cmd_verify(const std::string& path) {
  std::vector<Bytes> encoded;
  encoded = parse_export(read_text_file(path));
  if (auto v = verify_encoded(encoded)) {
    std::cout << "violation at block " << v->index << ": " << to_string(v->kind) << ": "
              << v->detail << '\n';
    return kVerifyFailed;
  }
  std::cout << "ok: " << encoded.size() << " blocks verified\n";
  return kOk;
}

int cmd_trace(const std::string& path, const std::string& digest_hex, const std::string& key_hex) {
  if (digest_hex.empty() == key_hex.empty()) {
    throw UsageError("trace needs exactly one of --digest or --key");
  }
  TraceQuery query;
  try {
    if (!digest_hex.empty()) {
      query = Digest::from_hex(digest_hex);
    } else {
      query = PublicKey::from_hex(key_hex);
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("bad selector: ") + e.what());
  }
  const auto chain = load_chain(path);
  const auto entries = trace(chain, query);
  if (entries.empty()) {
    std::cout << "no records\n";
    return kOk;
  }
  for (const auto& e : entries) {
    const auto& rec = e.record;
    std::cout << e.block_index << '\t' << e.record_index << '\t' << to_string(rec.metadata.kind)
              << '\t';
    if (rec.metadata.kind == RecordKind::ShareTransaction) {
      const auto tx = decode_share_transaction(rec.attachment);
      std::cout << tx.sender_public_key.hex() << " -> " << tx.receiver_public_key.hex() << '\t'
                << tx.payload_digest.hex();
    } else {
      std::cout << rec.uploader_public_key.hex() << '\t' << rec.payload_digest.hex();
    }
    std::cout << '\n';
  }
  return kOk;
}

void require_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("report directory not found: " + dir.string());
}

int cmd_credits(const fs::path& dir) {
  require_dir(dir);
  const auto log = parse_audit_log(read_text_file(dir / "ledger.tsv"));
  const auto table = read_text_file(dir / "credits.tsv");

  // Cross-check the stored credit column against a fold of the audit log.
  std::istringstream in(table);
  std::string line;
  std::getline(in, line);
  std::vector<NodeId> ids;
  std::map<NodeId, Credit> stored;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    NodeId id = 0;
    Credit credit = 0;
    fields >> id >> credit;
    ids.push_back(id);
    stored[id] = credit;
  }
  Credit initial = 0;
  std::istringstream metrics_in(read_text_file(dir / "metrics.txt"));
  while (std::getline(metrics_in, line)) {
    if (line.rfind("initial_credit\t", 0) == 0) initial = std::stoll(line.substr(15));
  }
  const auto replayed = replay_credits(ids, initial, log);

  std::cout << table;
  for (auto id : ids) {
    if (replayed.at(id) != stored[id]) {
      std::cout << "mismatch: node " << id << " stored " << stored[id] << " replayed "
                << replayed.at(id) << '\n';
      return kVerifyFailed;
    }
  }
  std::cout << "events\t" << log.size() << "\tconsistent with ledger\n";
  return kOk;
}

int cmd_roles(const fs::path& dir) {
  require_dir(dir);
  std::cout << read_text_file(dir / "roles.tsv");
  return kOk;
}

int cmd_audit(const fs::path& dir) {
  require_dir(dir);
  const auto store = Datastore::load(dir / "store");
  const auto audit = store.audit();
  std::cout << audit_table(audit);
  return audit.under_replicated_count() == 0 ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridledger: grid-data ledger simulator and chain tools"};
  app.require_subcommand(1, 1);

  std::string scenario_path, out_dir = default_out_dir();
  std::optional<std::uint64_t> seed;
  std::optional<Tick> until;
  auto* run = app.add_subcommand("run", "run a scenario and write a report directory");
  run->add_option("scenario", scenario_path, "scenario file")->required();
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--out", out_dir, "output directory (default $GRIDLEDGER_OUT or gridledger-out)");
  run->add_option("--until", until, "override the scenario's final tick");

  std::string chain_path;
  std::uint64_t tick_length = 1;
  auto* inspect = app.add_subcommand("inspect", "list blocks and records of a chain export");
  inspect->add_option("chain", chain_path, "chain export")->required();
  inspect->add_option("--tick-length", tick_length, "seconds per tick for rendering");

  auto* verify = app.add_subcommand("verify", "verify a chain export");
  verify->add_option("chain", chain_path, "chain export")->required();

  std::string digest_hex, key_hex;
  auto* trace_cmd = app.add_subcommand("trace", "list records touching a digest or key");
  trace_cmd->add_option("chain", chain_path, "chain export")->required();
  trace_cmd->add_option("--digest", digest_hex, "payload digest (hex)");
  trace_cmd->add_option("--key", key_hex, "public key (hex)");

  std::string report_dir;
  auto* credits = app.add_subcommand("credits", "credit table from a report directory");
  credits->add_option("dir", report_dir, "report directory")->required();
  auto* roles = app.add_subcommand("roles", "role history from a report directory");
  roles->add_option("dir", report_dir, "report directory")->required();
  auto* audit = app.add_subcommand("audit", "replication audit of a report's datastore");
  audit->add_option("dir", report_dir, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(scenario_path, seed, out_dir, until);
    if (*inspect) return cmd_inspect(chain_path, tick_length);
    if (*verify) return cmd_verify(chain_path);
    if (*trace_cmd) return cmd_trace(chain_path, digest_hex, key_hex);
    if (*credits) return cmd_credits(report_dir);
    if (*roles) return cmd_roles(report_dir);
    if (*audit) return cmd_audit(report_dir);
  } catch (const UsageError& e) {
    std::cerr << "gridledger: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    // Unreadable files, malformed exports, and corrupt report dirs.
    std::cerr << "gridledger: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
