#pragma once

// Deterministic discrete-event simulation of a grid-data ledger network.
//
// One tick is one simulated second by default. Every random choice flows
// from a single seeded stream, events run in (deliver_tick, insertion order),
// and containers are ordered, so a (config, scenario) pair always yields the
// same report bytes.
//
// Within a tick: fault activations and scheduled recoveries, then message
// deliveries, then block sealing and re-election on interval boundaries, then
// scheduled uploads and shares. run(until) processes ticks up to `until` and
// then settles messages already in flight without starting new rounds.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gridledger/chain.hpp"
#include "gridledger/credit.hpp"
#include "gridledger/datastore.hpp"
#include "gridledger/record_protocol.hpp"
#include "gridledger/rng.hpp"
#include "gridledger/scenario.hpp"
#include "gridledger/share_protocol.hpp"

namespace gridledger {

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t max_recorders = 101;
  std::size_t max_supervisors = 20;
  Tick block_interval_ticks = kDefaultBlockIntervalTicks;
  std::uint64_t epoch_length_blocks = 10;
  std::size_t replication_factor = 3;
  std::uint64_t tick_length_seconds = 1;
  std::size_t storage_units = 5;
  Tick message_delay = 1;
  Credit initial_credit = 0;
  std::string network_id = "gridledger";

  // Scenario `config` lines override the defaults.
  static SimConfig from_scenario(const Scenario& scenario);
};

enum class MessageKind : std::uint8_t {
  UploadRequest,
  UploadGrant,
  UploadEnvelope,
  Proposal,
  Vote,
  CommitNotice,
  PendingHandoff,
  ShareEnvelope,
  ShareReceipt,
  SyncRequest,
  SyncResponse,
};

std::string to_string(MessageKind kind);

struct SimEvent {
  Tick deliver_tick = 0;
  std::uint64_t seq = 0;
  NodeId source = 0;
  NodeId destination = 0;
  MessageKind kind = MessageKind::UploadRequest;
  Bytes payload;
  bool tampered = false;
};

struct QuarantineEntry {
  Tick tick = 0;
  Record record;
};

struct FaultOutcome {
  FaultSpec spec;
  bool activated = false;
  bool detected = false;
  std::string detail;
  std::optional<std::size_t> mutated_block;  // tamper-chain-copy only
};

struct NodeChainStatus {
  NodeId node_id = 0;
  std::size_t length = 0;
  Digest tip;
  std::optional<Violation> violation;
};

struct SimMetrics {
  std::uint64_t blocks_committed = 0;  // excluding genesis
  std::uint64_t blocks_rejected = 0;
  std::uint64_t blocks_abandoned = 0;
  std::uint64_t rounds_skipped = 0;
  std::uint64_t records_committed = 0;
  std::uint64_t records_quarantined = 0;
  std::uint64_t uploads_requested = 0;
  std::uint64_t uploads_denied = 0;
  std::uint64_t uploads_rejected = 0;
  std::uint64_t uploads_skipped = 0;
  std::uint64_t uploads_retried = 0;
  std::uint64_t shares_delivered = 0;
  std::uint64_t shares_failed = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_dropped = 0;
  std::uint64_t plaintext_leaks = 0;
  std::vector<std::uint64_t> role_churn;  // nodes whose role changed, per re-election
};

struct SimReport {
  SimConfig config;
  Tick final_tick = 0;
  Chain chain;  // the copy held by the most nodes
  std::map<NodeId, NodeProfile> profiles;
  std::vector<CreditEvent> audit_log;
  RoleAssignment roles;
  std::vector<RoleAssignment> role_history;
  std::vector<QuarantineEntry> quarantine;
  ReplicationReport storage;
  std::vector<RepairReport> repairs;
  std::vector<FaultOutcome> faults;
  std::vector<NodeChainStatus> node_chains;
  std::map<std::string, std::uint64_t> message_counts;
  SimMetrics metrics;
  std::string trace;  // tab-separated, one line per event
};

class Simulation {
 public:
  Simulation(SimConfig config, const Scenario& scenario);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  Tick now() const { return now_; }
  const SimConfig& config() const { return config_; }

  // Processes exactly one tick (the next one).
  void step();
  SimReport run(Tick until_tick);
  // Throws std::invalid_argument for an unknown target or a past tick.
  void inject_fault(const FaultSpec& fault);

  SimReport report() const;

  const CreditLedger& ledger() const { return ledger_; }
  const RoleAssignment& roles() const { return roles_; }
  const Datastore& datastore() const { return datastore_; }
  const Chain& chain_of(NodeId id) const;
  const Keypair& keys_of(NodeId id) const;
  std::vector<NodeId> node_ids() const;
  // Every message placed on the wire so far, in send order.
  const std::vector<SimEvent>& captured_messages() const { return captured_; }
  // Digests of payloads produced by upload directives, keyed by 0-based
  // directive index. Directives skipped because the node was down are absent.
  const std::map<std::size_t, Digest>& upload_digests() const { return upload_digests_; }
  // Digests fabricated by forge-record faults, keyed by fault index.
  const std::multimap<std::size_t, Digest>& forged_digests() const { return forged_digests_; }
  // Deterministic digest of the complete simulation state.
  Digest state_digest() const;

 private:
  struct UploadJob {
    Bytes payload;
    RecordMetadata metadata;
    Tick requested_at = 0;
  };

  struct Node {
    NodeId id = 0;
    Keypair keys;
    Chain chain;
    bool crashed = false;
    bool byzantine = false;
    bool tamper_next_send = false;
    std::optional<std::size_t> tamper_fault;  // index into faults_
    PendingQueue pending;
    std::optional<ProposedBlock> awaiting;
    std::vector<Vote> votes;
    std::map<NodeId, std::deque<UploadJob>> awaiting_grant;
  };

  struct ScheduledAction {
    enum class Kind { Upload, Share, Fault, Recover, RecoverUnit } kind;
    std::size_t index = 0;  // into uploads_, shares_, or faults_
    std::uint32_t target = 0;
  };

  Node& node(NodeId id);
  const Node& node(NodeId id) const;
  NodeId current_duty() const;
  std::uint64_t current_round() const;

  void send(NodeId from, NodeId to, MessageKind kind, Bytes payload);
  void deliver(SimEvent& ev);
  void log(const std::string& line);
  void run_scheduled(Tick t, bool settle_only);
  void on_boundary();

  void start_upload(Node& n, UploadJob job);
  void handle(Node& n, SimEvent& ev);
  void on_upload_request(Node& n, const SimEvent& ev);
  void on_upload_grant(Node& n, const SimEvent& ev);
  void on_upload_envelope(Node& n, SimEvent& ev);
  void on_proposal(Node& n, const SimEvent& ev);
  void on_vote(Node& n, const SimEvent& ev);
  void on_commit_notice(Node& n, const SimEvent& ev);
  void on_handoff(Node& n, const SimEvent& ev);
  void on_share_envelope(Node& n, SimEvent& ev);
  void on_share_receipt(Node& n, const SimEvent& ev);
  void on_sync_request(Node& n, const SimEvent& ev);
  void on_sync_response(Node& n, const SimEvent& ev);
  void maybe_handoff(Node& n);
  void retry_stale_requests(Node& n);
  void activate_fault(std::size_t index);
  void do_share(std::size_t index);
  void do_upload(std::size_t index);
  ValidityPredicate predicate_for(const Node& n) const;

  SimConfig config_;
  DeterministicRng rng_;
  Seed master_seed_;
  GenesisConfig genesis_config_;
  CommitteeConfig committee_;
  std::map<NodeId, Node> nodes_;
  CreditLedger ledger_;
  RoleAssignment roles_;
  std::vector<RoleAssignment> role_history_;
  PermissionList permissions_;
  Datastore datastore_;
  std::vector<RepairReport> repairs_;

  std::vector<UploadSpec> uploads_;
  std::vector<ShareSpec> shares_;
  std::vector<FaultOutcome> faults_;
  std::multimap<Tick, ScheduledAction> schedule_;
  std::map<NodeId, Tick> crash_until_;

  std::map<std::pair<Tick, std::uint64_t>, SimEvent> queue_;
  std::uint64_t next_seq_ = 0;
  std::vector<SimEvent> captured_;
  std::map<std::string, std::uint64_t> message_counts_;

  std::set<Digest> genuine_;
  std::map<std::size_t, Digest> upload_digests_;
  std::multimap<std::size_t, Digest> forged_digests_;
  std::vector<Bytes> plaintexts_;             // for the wire tap
  std::vector<QuarantineEntry> quarantine_;
  SimMetrics metrics_;
  std::string trace_;

  Tick now_ = 0;
  bool started_ = false;
  bool settling_ = false;
};

// Tabular summary: block/record counts, credit distribution, role churn,
// and detection rate per fault kind.
std::string metrics(const SimReport& report);

}  // namespace gridledger
