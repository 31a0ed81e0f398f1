#pragma once

// Credit-score ledger and role assignment for the credit-ranked DPOS variant.
//
// Every node holds an integer credit. Protocol outcomes move it by exactly one
// point per event; periodic re-election re-ranks all nodes by
// (credit desc, node_id asc) and refills the recorder and supervisor
// committees from the top of the ranking.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridledger/chain.hpp"
#include "gridledger/crypto.hpp"

namespace gridledger {

using NodeId = std::uint32_t;
using Credit = std::int64_t;

enum class Role { Recorder, Supervisor, Candidate };

std::string to_string(Role role);

struct NodeProfile {
  NodeId node_id = 0;
  PublicKey public_key;
  Credit credit = 0;
  Role role = Role::Candidate;
  std::uint64_t assessment = 0;
};

struct CommitteeConfig {
  std::size_t max_recorders = 101;
  std::size_t max_supervisors = 20;
  Credit initial_credit = 0;
};

struct RoleAssignment {
  std::vector<NodeId> recorders;
  std::vector<NodeId> supervisors;
  std::vector<NodeId> candidates;
  std::uint64_t epoch = 0;

  Role role_of(NodeId id) const;
  std::size_t node_count() const {
    return recorders.size() + supervisors.size() + candidates.size();
  }
  bool operator==(const RoleAssignment&) const = default;
};

enum class CreditReason {
  RecordCorrect,
  RecordErroneous,
  BlockClean,
  BlockErroneous,
  ValidatorAgreed,
  ValidatorDissented,
};

std::string to_string(CreditReason reason);
std::optional<CreditReason> parse_credit_reason(std::string_view text);

struct CreditEvent {
  NodeId node_id = 0;
  int delta = 0;  // +1 or -1
  CreditReason reason = CreditReason::RecordCorrect;
  Tick tick = 0;

  bool operator==(const CreditEvent&) const = default;
};

enum class Verdict : std::uint8_t { Ok = 0, Erroneous = 1 };

std::string to_string(Verdict verdict);

struct ValidatorVote {
  NodeId validator_id = 0;
  Verdict verdict = Verdict::Ok;
};

struct ValidatorOutcome {
  Verdict majority = Verdict::Ok;
  std::vector<CreditEvent> events;
};

class CreditError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Owns every node's profile and the audit log of credit events. The credit
// column always equals initial credit plus the fold of the log.
class CreditLedger {
 public:
  CreditLedger() = default;
  CreditLedger(std::vector<NodeProfile> profiles, Credit initial_credit);

  const std::map<NodeId, NodeProfile>& profiles() const { return profiles_; }
  const NodeProfile& profile(NodeId id) const;
  std::optional<NodeId> find_by_key(const PublicKey& key) const;
  Credit credit(NodeId id) const { return profile(id).credit; }
  Credit initial_credit() const { return initial_credit_; }
  const std::vector<CreditEvent>& audit_log() const { return log_; }

  CreditEvent apply_record_outcome(NodeId uploader, bool correct, Tick tick);
  CreditEvent apply_block_outcome(NodeId recorder, bool erroneous, Tick tick);
  // Requires an odd, non-empty vote set. Majority voters earn a point,
  // dissenters lose one.
  ValidatorOutcome apply_validator_outcomes(const std::vector<ValidatorVote>& votes, Tick tick);

  void set_roles(const RoleAssignment& assignment);

 private:
  CreditEvent record(NodeId id, int delta, CreditReason reason, Tick tick);
  NodeProfile& mutable_profile(NodeId id);

  std::map<NodeId, NodeProfile> profiles_;
  Credit initial_credit_ = 0;
  std::vector<CreditEvent> log_;
};

// Ranks by (assessment desc, node_id asc). Throws CreditError when there are
// no nodes or max_recorders is zero.
RoleAssignment initialize_roles(const std::vector<NodeProfile>& profiles,
                                const CommitteeConfig& config);

// Ranks by (credit desc, node_id asc); epoch advances by one.
RoleAssignment reelect(const CreditLedger& ledger, const RoleAssignment& assignment,
                       const CommitteeConfig& config);

// Round-robin. Throws CreditError on an empty committee.
NodeId duty_recorder(const RoleAssignment& assignment, std::uint64_t round);
std::optional<NodeId> duty_supervisor(const RoleAssignment& assignment, std::uint64_t round);

// Credits implied by initial credit plus the given event log.
std::map<NodeId, Credit> replay_credits(const std::vector<NodeId>& nodes, Credit initial,
                                        const std::vector<CreditEvent>& log);

// Tab-separated `tick node_id delta reason`, one event per line.
std::string export_audit_log(const std::vector<CreditEvent>& log);
std::vector<CreditEvent> parse_audit_log(std::string_view text);

}  // namespace gridledger
