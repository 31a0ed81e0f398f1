#pragma once

// The data-recording procedure: upload permission, signed and sealed
// submission, recorder-side verification, block sealing, three-validator
// review, and commit with credit settlement.

#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gridledger/chain.hpp"
#include "gridledger/credit.hpp"
#include "gridledger/datastore.hpp"
#include "gridledger/rng.hpp"

namespace gridledger {

inline constexpr Tick kDefaultBlockIntervalTicks = 600;  // ten minutes at 1 tick/s
inline constexpr std::size_t kValidatorsPerBlock = 3;

class ProtocolError : public std::runtime_error {
 public:
  enum class Kind {
    MetadataInvalid,
    NotOnInterval,
    NotEnoughValidators,
    ValidatorNotAssigned,
    WrongVoteCount,
    VoteInvalid,
    AppendFailed,
  };

  ProtocolError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Keys allowed to upload. Append-only.
class PermissionList {
 public:
  void authorize(const PublicKey& key) { keys_.insert(key); }
  bool contains(const PublicKey& key) const { return keys_.count(key) != 0; }
  std::size_t size() const { return keys_.size(); }

 private:
  std::set<PublicKey> keys_;
};

enum class UploadDecision { Granted, Denied };

UploadDecision request_upload(const PublicKey& uploader, const PermissionList& permissions);

struct UploadEnvelope {
  PublicKey uploader_public_key;
  Digest payload_digest;
  Signature signed_digest;
  Envelope payload_envelope;  // sealed to the duty recorder
  RecordMetadata metadata;

  bool operator==(const UploadEnvelope&) const = default;
};

Bytes encode_upload_envelope(const UploadEnvelope& env);
UploadEnvelope decode_upload_envelope(ByteView data);

// Throws ProtocolError(MetadataInvalid) when data_class is empty or too long.
UploadEnvelope prepare_upload(const Keypair& uploader, const PublicKey& recorder,
                              ByteView payload, const RecordMetadata& metadata,
                              const Seed& entropy);

struct UploadRejection {
  enum class Kind { PermissionDenied, DecryptionFailure, SignatureInvalid, DigestMismatch, RecordInvalid };

  Kind kind = Kind::PermissionDenied;
  std::string detail;
  std::optional<CreditEvent> penalty;
};

std::string to_string(UploadRejection::Kind kind);

struct AcceptedUpload {
  Record record;
  StoredObject stored;
  std::vector<UnitId> placement;
};

using ReceiveResult = std::variant<AcceptedUpload, UploadRejection>;

struct ReceiveContext {
  const PermissionList& permissions;
  CreditLedger& ledger;
  Datastore& datastore;
  std::size_t replication_factor = 3;
  Tick tick = 0;
  Seed reseal_entropy;  // for the owner-sealed at-rest copy
};

// Recorder side. On success the ciphertext is re-sealed to the uploader and
// placed in the datastore; the caller queues the returned record. Every
// rejection except PermissionDenied costs the claimed uploader one credit.
ReceiveResult receive_upload(const Keypair& recorder, const UploadEnvelope& envelope,
                             ReceiveContext& ctx);

using PendingQueue = std::vector<Record>;

struct ProposedBlock {
  Block block;
  NodeId proposer_id = 0;
  std::vector<NodeId> validator_ids;
  std::uint64_t round = 0;

  bool operator==(const ProposedBlock&) const = default;
};

Bytes encode_proposal(const ProposedBlock& proposal);
ProposedBlock decode_proposal(ByteView data);

// Duty supervisor for the round plus two candidates drawn from `rng`. When a
// tier is short, the remaining seats are drawn from all other non-proposer
// nodes. Throws ProtocolError(NotEnoughValidators) if fewer than three exist.
std::vector<NodeId> select_validators(const RoleAssignment& assignment, std::uint64_t round,
                                      NodeId proposer, DeterministicRng& rng);

struct SealParams {
  Tick tick = 0;
  Tick block_interval_ticks = kDefaultBlockIntervalTicks;
  std::uint64_t round = 0;
};

// Builds and signs a block from the pending records in arrival order. The
// queue itself is left untouched until commit.
ProposedBlock seal_block(const Keypair& recorder, NodeId recorder_id, const PendingQueue& pending,
                         const Block& tip, const RoleAssignment& assignment,
                         const SealParams& params, DeterministicRng& rng);

struct Vote {
  NodeId validator_id = 0;
  Digest block_digest;
  Verdict verdict = Verdict::Ok;
  std::vector<std::uint32_t> offending_records;
  Signature signature;

  bool operator==(const Vote&) const = default;
};

Bytes vote_signing_bytes(const Vote& vote);
Bytes encode_vote(const Vote& vote);
Vote decode_vote(ByteView data);

Vote make_vote(const Keypair& validator, NodeId validator_id, const Digest& block_digest,
               Verdict verdict, std::vector<std::uint32_t> offending);
bool verify_vote(const Vote& vote, const PublicKey& validator_key);

// Stand-in for domain review of record content ("is this data genuine?").
using ValidityPredicate = std::function<bool(const Record&)>;

// Throws ProtocolError(ValidatorNotAssigned) if the validator is not one of
// the proposal's three.
Vote validate_proposal(const Keypair& validator, NodeId validator_id,
                       const ProposedBlock& proposal, const Chain& local_chain,
                       const ValidityPredicate& is_valid);

struct CommitResult {
  bool appended = false;
  Verdict verdict = Verdict::Ok;
  std::vector<CreditEvent> events;
  std::vector<Record> quarantined;
};

// Settles one proposal. A majority-ok block is appended; otherwise records
// flagged by a majority of validators are quarantined and the rest stay
// pending. Throws ProtocolError for a vote set that is not exactly three
// verified votes on this block.
CommitResult commit(const ProposedBlock& proposal, const std::vector<Vote>& votes, Chain& chain,
                    CreditLedger& ledger, PendingQueue& pending, Tick tick);

}  // namespace gridledger
