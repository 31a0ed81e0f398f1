#include "gridledger/share_protocol.hpp"

namespace gridledger {

Bytes encode_share_envelope(const ShareEnvelope& env) {
  ByteWriter w;
  w.field(env.sender_public_key.view());
  w.field(env.receiver_public_key.view());
  w.field(env.payload_digest.view());
  w.field(env.signed_digest.view());
  write_envelope(w, env.payload_envelope);
  return std::move(w).take();
}

ShareEnvelope decode_share_envelope(ByteView data) {
  try {
    ByteReader r(data);
    ShareEnvelope env;
    env.sender_public_key.value = r.fixed_field<PublicKey::kSize>();
    env.receiver_public_key.value = r.fixed_field<PublicKey::kSize>();
    env.payload_digest.value = r.fixed_field<Digest::kSize>();
    env.signed_digest.value = r.fixed_field<Signature::kSize>();
    env.payload_envelope = read_envelope(r);
    r.finish();
    return env;
  } catch (const DecodeError& e) {
    throw ChainError(ChainError::Kind::Decode, e.what());
  }
}

ShareEnvelope initiate_share(const Keypair& sender, const PublicKey& receiver,
                             const Digest& payload_digest, const Chain& chain,
                             const Datastore& datastore, const Seed& entropy) {
  bool on_chain = false;
  bool owned = false;
  for (const auto& block : chain.blocks) {
    for (const auto& r : block.records) {
      if (r.metadata.kind != RecordKind::GridData || r.payload_digest != payload_digest) continue;
      on_chain = true;
      owned = owned || r.uploader_public_key == sender.public_key;
    }
  }
  if (!on_chain) {
    throw ShareError(ShareError::Kind::DigestNotOnChain,
                     "no grid-data record for " + payload_digest.hex());
  }
  if (!owned) {
    throw ShareError(ShareError::Kind::NotOwner,
                     payload_digest.hex() + " was uploaded by another key");
  }
  auto stored = datastore.get(payload_digest);
  if (!stored) {
    throw ShareError(ShareError::Kind::DatastoreMiss,
                     "no live replica holds " + payload_digest.hex());
  }
  Bytes plaintext;
  try {
    plaintext = decrypt(sender.private_key, stored->ciphertext);
  } catch (const CryptoError& e) {
    throw ShareError(ShareError::Kind::DatastoreMiss,
                     std::string("stored copy is unreadable: ") + e.what());
  }
  if (digest(plaintext) != payload_digest) {
    throw ShareError(ShareError::Kind::DatastoreMiss, "stored copy does not match its digest");
  }

  ShareEnvelope env;
  env.sender_public_key = sender.public_key;
  env.receiver_public_key = receiver;
  env.payload_digest = payload_digest;
  env.signed_digest = sign(sender.private_key, payload_digest.view());
  env.payload_envelope = encrypt_for(receiver, plaintext, entropy);
  return env;
}

std::string to_string(ShareRejection::Kind kind) {
  switch (kind) {
    case ShareRejection::Kind::DecryptionFailure:
      return "decryption-failure";
    case ShareRejection::Kind::DigestMismatch:
      return "digest-mismatch";
    case ShareRejection::Kind::SignatureInvalid:
      return "signature-invalid";
  }
  return "unknown";
}

ShareResult receive_share(const Keypair& receiver, const ShareEnvelope& envelope) {
  Bytes plaintext;
  try {
    plaintext = decrypt(receiver.private_key, envelope.payload_envelope);
  } catch (const CryptoError& e) {
    return ShareRejection{ShareRejection::Kind::DecryptionFailure, e.what()};
  }
  const Digest actual = digest(plaintext);
  if (actual != envelope.payload_digest) {
    return ShareRejection{ShareRejection::Kind::DigestMismatch,
                          "payload hashes to " + actual.hex()};
  }
  if (!verify(envelope.sender_public_key, actual.view(), envelope.signed_digest)) {
    return ShareRejection{ShareRejection::Kind::SignatureInvalid,
                          "digest signature does not verify under sender key"};
  }
  return ShareDelivery{std::move(plaintext), envelope.sender_public_key, actual};
}

ShareSubmission share_submission(const ShareTransaction& tx) {
  return {canonical_bytes(tx),
          RecordMetadata{RecordKind::ShareTransaction, std::string(kShareDataClass), tx.tick}};
}

UploadEnvelope record_share(const Keypair& sender, const ShareTransaction& tx,
                            const PublicKey& recorder, const Seed& entropy) {
  auto sub = share_submission(tx);
  return prepare_upload(sender, recorder, sub.payload, sub.metadata, entropy);
}

}  // namespace gridledger
