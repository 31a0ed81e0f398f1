#pragma once

// Peer-to-peer sharing: the owner re-seals its at-rest payload to the
// receiver and signs the digest; the receiver checks origin and integrity;
// the transfer is then recorded on-chain as a share-transaction record.

#include <stdexcept>
#include <string>
#include <variant>

#include "gridledger/chain.hpp"
#include "gridledger/datastore.hpp"
#include "gridledger/record_protocol.hpp"

namespace gridledger {

struct ShareEnvelope {
  PublicKey sender_public_key;
  PublicKey receiver_public_key;
  Digest payload_digest;
  Signature signed_digest;
  Envelope payload_envelope;  // sealed to the receiver

  bool operator==(const ShareEnvelope&) const = default;
};

Bytes encode_share_envelope(const ShareEnvelope& env);
ShareEnvelope decode_share_envelope(ByteView data);

class ShareError : public std::runtime_error {
 public:
  enum class Kind { DigestNotOnChain, NotOwner, DatastoreMiss };

  ShareError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Only the key that uploaded the grid-data record may share it.
ShareEnvelope initiate_share(const Keypair& sender, const PublicKey& receiver,
                             const Digest& payload_digest, const Chain& chain,
                             const Datastore& datastore, const Seed& entropy);

struct ShareDelivery {
  Bytes payload;
  PublicKey sender_public_key;
  Digest payload_digest;
};

struct ShareRejection {
  enum class Kind { DecryptionFailure, DigestMismatch, SignatureInvalid };
  Kind kind = Kind::DecryptionFailure;
  std::string detail;
};

std::string to_string(ShareRejection::Kind kind);

using ShareResult = std::variant<ShareDelivery, ShareRejection>;

ShareResult receive_share(const Keypair& receiver, const ShareEnvelope& envelope);

inline constexpr std::string_view kShareDataClass = "share";

// Payload and metadata of the on-chain share record.
struct ShareSubmission {
  Bytes payload;
  RecordMetadata metadata;
};

ShareSubmission share_submission(const ShareTransaction& tx);

// Wraps a completed transfer for the ordinary upload pathway, sealed to the
// duty recorder.
UploadEnvelope record_share(const Keypair& sender, const ShareTransaction& tx,
                            const PublicKey& recorder, const Seed& entropy);

}  // namespace gridledger
