#include "gridledger/crypto.hpp"

#include <sodium.h>

#include <cstring>

namespace gridledger {

namespace {

constexpr std::size_t kSessionKeyBytes = crypto_aead_xchacha20poly1305_ietf_KEYBYTES;
constexpr std::size_t kPayloadNonceBytes = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
constexpr std::size_t kWrappedKeyBytes =
    crypto_box_PUBLICKEYBYTES + crypto_box_MACBYTES + kSessionKeyBytes;
constexpr std::size_t kMaxEnvelopeField = std::size_t{1} << 31;

static_assert(crypto_hash_sha256_BYTES == Digest::kSize);
static_assert(crypto_sign_PUBLICKEYBYTES == PublicKey::kSize);
static_assert(crypto_sign_SECRETKEYBYTES == PrivateKey::kSize);
static_assert(crypto_sign_BYTES == Signature::kSize);
static_assert(crypto_sign_SEEDBYTES == Seed::kSize);

void ensure_init() {
  static const int rc = sodium_init();
  if (rc < 0) {
    throw std::runtime_error("libsodium initialisation failed");
  }
}

// Nonce for wrapping the session key: H(ephemeral_pk || recipient_pk), the
// same construction libsodium uses for sealed boxes.
std::array<std::uint8_t, crypto_box_NONCEBYTES> wrap_nonce(const std::uint8_t* eph_pk,
                                                           const std::uint8_t* rcpt_pk) {
  std::array<std::uint8_t, crypto_box_NONCEBYTES> nonce{};
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, nonce.size());
  crypto_generichash_update(&st, eph_pk, crypto_box_PUBLICKEYBYTES);
  crypto_generichash_update(&st, rcpt_pk, crypto_box_PUBLICKEYBYTES);
  crypto_generichash_final(&st, nonce.data(), nonce.size());
  return nonce;
}

}  // namespace

Digest zero_digest() { return Digest{}; }

Keypair generate_keypair(ByteView seed) {
  if (seed.size() != Seed::kSize) {
    throw CryptoError(CryptoError::Kind::MalformedSeed,
                      "seed must be 32 bytes, got " + std::to_string(seed.size()));
  }
  ensure_init();
  Keypair kp;
  crypto_sign_seed_keypair(kp.public_key.value.data(), kp.private_key.value.data(), seed.data());
  return kp;
}

Keypair generate_keypair(const Seed& seed) { return generate_keypair(seed.view()); }

Digest digest(ByteView data) {
  ensure_init();
  Digest d;
  crypto_hash_sha256(d.value.data(), data.data(), data.size());
  return d;
}

Digest digest(std::string_view data) { return digest(as_bytes(data)); }

Signature sign(const PrivateKey& private_key, ByteView message) {
  ensure_init();
  Signature sig;
  crypto_sign_detached(sig.value.data(), nullptr, message.data(), message.size(),
                       private_key.value.data());
  return sig;
}

bool verify(const PublicKey& public_key, ByteView message, const Signature& signature) {
  ensure_init();
  return crypto_sign_verify_detached(signature.value.data(), message.data(), message.size(),
                                     public_key.value.data()) == 0;
}

Seed derive_seed(const Seed& parent, std::string_view label) {
  ensure_init();
  Seed out;
  crypto_generichash(out.value.data(), out.value.size(),
                     reinterpret_cast<const unsigned char*>(label.data()), label.size(),
                     parent.value.data(), parent.value.size());
  return out;
}

Envelope encrypt_for(const PublicKey& recipient, ByteView plaintext, const Seed& entropy) {
  ensure_init();
  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> rcpt_x{};
  if (crypto_sign_ed25519_pk_to_curve25519(rcpt_x.data(), recipient.value.data()) != 0) {
    throw CryptoError(CryptoError::Kind::InvalidKey, "recipient key is not a valid point");
  }

  const Seed eph_seed = derive_seed(entropy, "envelope/ephemeral");
  const Seed session_key = derive_seed(entropy, "envelope/session");
  const Seed nonce_seed = derive_seed(entropy, "envelope/nonce");

  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> eph_pk{};
  std::array<std::uint8_t, crypto_box_SECRETKEYBYTES> eph_sk{};
  crypto_box_seed_keypair(eph_pk.data(), eph_sk.data(), eph_seed.value.data());

  Envelope env;
  env.encrypted_key.resize(kWrappedKeyBytes);
  std::memcpy(env.encrypted_key.data(), eph_pk.data(), eph_pk.size());
  const auto knonce = wrap_nonce(eph_pk.data(), rcpt_x.data());
  const int wrapped = crypto_box_easy(env.encrypted_key.data() + eph_pk.size(),
                                      session_key.value.data(), kSessionKeyBytes, knonce.data(),
                                      rcpt_x.data(), eph_sk.data());
  sodium_memzero(eph_sk.data(), eph_sk.size());
  if (wrapped != 0) {
    throw CryptoError(CryptoError::Kind::InvalidKey, "recipient key is a weak point");
  }

  env.nonce.assign(nonce_seed.value.begin(), nonce_seed.value.begin() + kPayloadNonceBytes);
  env.ciphertext.resize(plaintext.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
  unsigned long long clen = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(env.ciphertext.data(), &clen, plaintext.data(),
                                             plaintext.size(), nullptr, 0, nullptr,
                                             env.nonce.data(), session_key.value.data());
  env.ciphertext.resize(clen);
  return env;
}

Envelope encrypt_for(const PublicKey& recipient, ByteView plaintext) {
  ensure_init();
  Seed entropy;
  randombytes_buf(entropy.value.data(), entropy.value.size());
  return encrypt_for(recipient, plaintext, entropy);
}

Bytes decrypt(const PrivateKey& private_key, const Envelope& envelope) {
  ensure_init();
  if (envelope.encrypted_key.size() != kWrappedKeyBytes ||
      envelope.nonce.size() != kPayloadNonceBytes ||
      envelope.ciphertext.size() < crypto_aead_xchacha20poly1305_ietf_ABYTES) {
    throw CryptoError(CryptoError::Kind::MalformedEnvelope, "envelope fields have wrong sizes");
  }

  std::array<std::uint8_t, crypto_box_SECRETKEYBYTES> own_sk{};
  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> own_pk{};
  crypto_sign_ed25519_sk_to_curve25519(own_sk.data(), private_key.value.data());
  // The public half sits in the last 32 bytes of an Ed25519 secret key.
  if (crypto_sign_ed25519_pk_to_curve25519(own_pk.data(), private_key.value.data() + 32) != 0) {
    sodium_memzero(own_sk.data(), own_sk.size());
    throw CryptoError(CryptoError::Kind::DecryptionFailure, "private key is malformed");
  }

  const std::uint8_t* eph_pk = envelope.encrypted_key.data();
  const auto knonce = wrap_nonce(eph_pk, own_pk.data());
  std::array<std::uint8_t, kSessionKeyBytes> session_key{};
  const int rc = crypto_box_open_easy(session_key.data(), eph_pk + crypto_box_PUBLICKEYBYTES,
                                      crypto_box_MACBYTES + kSessionKeyBytes, knonce.data(),
                                      eph_pk, own_sk.data());
  sodium_memzero(own_sk.data(), own_sk.size());
  if (rc != 0) {
    throw CryptoError(CryptoError::Kind::DecryptionFailure,
                      "session key does not open under this private key");
  }

  Bytes plain(envelope.ciphertext.size() - crypto_aead_xchacha20poly1305_ietf_ABYTES);
  unsigned long long plen = 0;
  const int prc = crypto_aead_xchacha20poly1305_ietf_decrypt(
      plain.data(), &plen, nullptr, envelope.ciphertext.data(), envelope.ciphertext.size(),
      nullptr, 0, envelope.nonce.data(), session_key.data());
  sodium_memzero(session_key.data(), session_key.size());
  if (prc != 0) {
    throw CryptoError(CryptoError::Kind::DecryptionFailure, "payload authentication failed");
  }
  plain.resize(plen);
  return plain;
}

void write_envelope(ByteWriter& w, const Envelope& envelope) {
  w.field(envelope.encrypted_key);
  w.field(envelope.ciphertext);
  w.field(envelope.nonce);
}

Envelope read_envelope(ByteReader& r) {
  Envelope env;
  auto k = r.field(kMaxEnvelopeField);
  env.encrypted_key.assign(k.begin(), k.end());
  auto c = r.field(kMaxEnvelopeField);
  env.ciphertext.assign(c.begin(), c.end());
  auto n = r.field(kMaxEnvelopeField);
  env.nonce.assign(n.begin(), n.end());
  return env;
}

Bytes encode_envelope(const Envelope& envelope) {
  ByteWriter w;
  write_envelope(w, envelope);
  return std::move(w).take();
}

Envelope decode_envelope(ByteView data) {
  try {
    ByteReader r(data);
    auto env = read_envelope(r);
    r.finish();
    return env;
  } catch (const DecodeError& e) {
    throw CryptoError(CryptoError::Kind::MalformedEnvelope, e.what());
  }
}

}  // namespace gridledger
