#include "gridledger/report.hpp"

#include <fstream>
#include <sstream>

namespace gridledger {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ReportError("cannot write " + path.string());
  out << text;
  if (!out) throw ReportError("write failed for " + path.string());
}

}  // namespace

std::string render_tick(Tick tick, std::uint64_t tick_length_seconds) {
  const auto secs = tick * tick_length_seconds;
  return std::to_string(tick) + " (" + std::to_string(secs / 60) + "m" +
         std::to_string(secs % 60) + "s)";
}

std::string credits_table(const std::map<NodeId, NodeProfile>& profiles) {
  std::ostringstream os;
  os << "node_id\tcredit\trole\tassessment\n";
  for (const auto& [id, p] : profiles) {
    os << id << '\t' << p.credit << '\t' << to_string(p.role) << '\t' << p.assessment << '\n';
  }
  return os.str();
}

std::string roles_table(const std::vector<RoleAssignment>& history) {
  std::ostringstream os;
  os << "epoch\tnode_id\trole\n";
  for (const auto& a : history) {
    std::map<NodeId, Role> by_id;
    for (auto id : a.recorders) by_id[id] = Role::Recorder;
    for (auto id : a.supervisors) by_id[id] = Role::Supervisor;
    for (auto id : a.candidates) by_id[id] = Role::Candidate;
    for (const auto& [id, role] : by_id) os << a.epoch << '\t' << id << '\t' << to_string(role) << '\n';
  }
  return os.str();
}

std::string audit_table(const ReplicationReport& audit) {
  std::ostringstream os;
  os << "digest\treplication_factor\tlive_replicas\tstatus\n";
  for (const auto& s : audit.objects) {
    os << s.payload_digest.hex() << '\t' << s.replication_factor << '\t' << s.live_replicas << '\t'
       << (s.under_replicated() ? "under-replicated" : "ok") << '\n';
  }
  os << "under_replicated\t" << audit.under_replicated_count() << '\n';
  return os.str();
}

std::string quarantine_table(const std::vector<QuarantineEntry>& quarantine) {
  std::ostringstream os;
  os << "tick\tuploader\tdigest\tclass\n";
  for (const auto& q : quarantine) {
    os << q.tick << '\t' << q.record.uploader_public_key.hex() << '\t'
       << q.record.payload_digest.hex() << '\t' << q.record.metadata.data_class << '\n';
  }
  return os.str();
}

std::string faults_table(const std::vector<FaultOutcome>& faults) {
  std::ostringstream os;
  os << "kind\ttarget\tat\tactivated\tdetected\tdetail\n";
  for (const auto& f : faults) {
    os << to_string(f.spec.kind) << '\t' << f.spec.target << '\t' << f.spec.at << '\t'
       << (f.activated ? "yes" : "no") << '\t' << (f.detected ? "yes" : "no") << '\t' << f.detail
       << '\n';
  }
  return os.str();
}

std::string nodes_table(const std::vector<NodeChainStatus>& nodes) {
  std::ostringstream os;
  os << "node_id\tlength\ttip\tverify\n";
  for (const auto& n : nodes) {
    os << n.node_id << '\t' << n.length << '\t' << n.tip.hex() << '\t';
    if (n.violation) {
      os << "violation@" << n.violation->index << ':' << to_string(n.violation->kind);
    } else {
      os << "ok";
    }
    os << '\n';
  }
  return os.str();
}

void write_report(const std::filesystem::path& dir, const SimReport& report,
                  const Datastore& store) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "chain.txt", export_chain(report.chain));
  write_file(dir / "ledger.tsv", export_audit_log(report.audit_log));
  write_file(dir / "credits.tsv", credits_table(report.profiles));
  write_file(dir / "roles.tsv", roles_table(report.role_history));
  write_file(dir / "quarantine.tsv", quarantine_table(report.quarantine));
  write_file(dir / "faults.tsv", faults_table(report.faults));
  write_file(dir / "nodes.tsv", nodes_table(report.node_chains));
  write_file(dir / "trace.tsv", report.trace);
  write_file(dir / "metrics.txt", metrics(report));
  std::filesystem::remove_all(dir / "store", ec);
  store.dump(dir / "store");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReportError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace gridledger
