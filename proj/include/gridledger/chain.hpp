#pragma once

// Records, blocks, and the chain: canonical serialization, validation,
// export/import, and provenance queries.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gridledger/crypto.hpp"
#include "gridledger/merkle.hpp"

namespace gridledger {

using Tick = std::uint64_t;

inline constexpr std::size_t kMaxDataClassBytes = 64;
inline constexpr std::size_t kMaxAttachmentBytes = 1024;
inline constexpr std::size_t kMaxRecordsPerBlock = std::size_t{1} << 20;

enum class RecordKind : std::uint8_t { GridData = 1, ShareTransaction = 2 };

std::string to_string(RecordKind kind);

struct RecordMetadata {
  RecordKind kind = RecordKind::GridData;
  std::string data_class;
  Tick created_tick = 0;

  bool operator==(const RecordMetadata&) const = default;
};

struct Record {
  PublicKey uploader_public_key;
  Digest payload_digest;
  RecordMetadata metadata;
  Signature uploader_signature;  // over payload_digest
  // Empty for grid data, whose payload lives in the datastore. For share
  // transactions this holds the canonical ShareTransaction bytes, and
  // payload_digest is their digest.
  Bytes attachment;

  bool operator==(const Record&) const = default;
};

// On-chain evidence of one peer-to-peer transfer.
struct ShareTransaction {
  PublicKey sender_public_key;
  PublicKey receiver_public_key;
  Digest payload_digest;
  Tick tick = 0;

  bool operator==(const ShareTransaction&) const = default;
};

struct BlockHeader {
  Digest prev_block_digest;
  Tick timestamp_tick = 0;
  Digest merkle_root;
  PublicKey recorder_public_key;
  Signature recorder_signature;

  bool operator==(const BlockHeader&) const = default;
};

struct Block {
  BlockHeader header;
  std::vector<Record> records;

  bool operator==(const Block&) const = default;
};

struct Chain {
  std::vector<Block> blocks;

  std::size_t size() const { return blocks.size(); }
  const Block& tip() const { return blocks.back(); }
  bool operator==(const Chain&) const = default;
};

enum class ViolationKind {
  Malformed,
  LinkMismatch,
  TimestampRegression,
  MerkleRootMismatch,
  HeaderSignatureInvalid,
  RecordSignatureInvalid,
  RecordInvalid,
};

std::string to_string(ViolationKind kind);

struct Violation {
  std::size_t index = 0;
  ViolationKind kind = ViolationKind::Malformed;
  std::string detail;
};

class ChainError : public std::runtime_error {
 public:
  enum class Kind { FieldBound, Decode, Rejected };

  ChainError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ChainError(const Violation& v)
      : std::runtime_error(to_string(v.kind) + ": " + v.detail),
        kind_(Kind::Rejected),
        violation_(v) {}

  Kind kind() const { return kind_; }
  // Set when kind() == Rejected.
  const std::optional<Violation>& violation() const { return violation_; }

 private:
  Kind kind_;
  std::optional<Violation> violation_;
};

// --- canonical encoding ------------------------------------------------------

Bytes canonical_bytes(const Record& record);
Bytes canonical_bytes(const BlockHeader& header);
Bytes canonical_bytes(const Block& block);
// Header fields the recorder signs (everything but the signature).
Bytes header_signing_bytes(const BlockHeader& header);
Bytes canonical_bytes(const ShareTransaction& tx);

Record decode_record(ByteView data);
Block decode_block(ByteView data);
ShareTransaction decode_share_transaction(ByteView data);

// Merkle leaf for a record: SHA-256(0x00 || canonical record bytes).
Digest record_leaf(const Record& record);
Digest compute_merkle_root(const std::vector<Record>& records);
// Digest of the canonical header; the next block links to it.
Digest block_digest(const Block& block);

// Structural checks on a record (metadata bounds, attachment consistency).
// Returns an explanation on failure.
std::optional<std::string> check_record_shape(const Record& record);

// --- chain operations --------------------------------------------------------

struct GenesisConfig {
  std::string network_id = "gridledger";
};

Keypair bootstrap_keypair(const GenesisConfig& config);
Block genesis(const GenesisConfig& config);

// Recorder-side: fills merkle_root and signs the header.
Block make_block(const Keypair& recorder, const Digest& prev, Tick tick,
                 std::vector<Record> records);

// Checks `block` as the successor of `prev` (nullptr for the genesis slot).
std::optional<Violation> check_block(const Block* prev, const Block& block, std::size_t index);

// Throws ChainError (kind Rejected) naming the violated invariant.
void append_block(Chain& chain, Block block);
Chain append(Chain chain, Block block);

// Earliest violation, or nullopt when every block holds.
std::optional<Violation> verify_chain(const Chain& chain);

// --- export / import ---------------------------------------------------------

// One line per block: lowercase hex of canonical_bytes(block).
std::string export_chain(const Chain& chain);

class ExportFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Splits an export into raw block encodings. Throws ExportFormatError for an
// empty file or a line that is not hex.
std::vector<Bytes> parse_export(std::string_view text);

// Verifies raw block encodings; an undecodable block is reported as a
// Malformed violation at its index.
std::optional<Violation> verify_encoded(const std::vector<Bytes>& encoded_blocks);

// Decodes without verifying. Throws ChainError (kind Decode).
Chain decode_chain(const std::vector<Bytes>& encoded_blocks);

// --- provenance --------------------------------------------------------------

using TraceQuery = std::variant<PublicKey, Digest>;

struct TraceEntry {
  std::size_t block_index = 0;
  std::size_t record_index = 0;
  Record record;
};

// A key matches records it uploaded and share transactions it received. A
// digest matches the record carrying that payload and every share
// transaction that references it.
std::vector<TraceEntry> trace(const Chain& chain, const TraceQuery& query);

}  // namespace gridledger
