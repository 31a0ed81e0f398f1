#pragma once

// Report directory layout written by `gridledger run` and read back by the
// inspection subcommands. Everything is plain tab-separated text.
//
//   chain.txt       chain export (one hex block per line)
//   ledger.tsv      credit audit log
//   credits.tsv     node_id credit role assessment
//   roles.tsv       epoch node_id role, one block per re-election
//   quarantine.tsv  tick uploader digest class
//   faults.tsv      kind target at activated detected detail
//   nodes.tsv       node_id length tip verify
//   trace.tsv       event trace
//   metrics.txt     summary table
//   store/          datastore dump

#include <filesystem>
#include <string>
#include <vector>

#include "gridledger/simnet.hpp"

namespace gridledger {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_report(const std::filesystem::path& dir, const SimReport& report,
                  const Datastore& store);

std::string credits_table(const std::map<NodeId, NodeProfile>& profiles);
std::string roles_table(const std::vector<RoleAssignment>& history);
std::string audit_table(const ReplicationReport& audit);
std::string quarantine_table(const std::vector<QuarantineEntry>& quarantine);
std::string faults_table(const std::vector<FaultOutcome>& faults);
std::string nodes_table(const std::vector<NodeChainStatus>& nodes);

// Renders a tick as "<tick> (<m>m<s>s)" using the configured tick length.
std::string render_tick(Tick tick, std::uint64_t tick_length_seconds);

// Throws ReportError naming the path when the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace gridledger
