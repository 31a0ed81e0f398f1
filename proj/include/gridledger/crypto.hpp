#pragma once

// Signatures, digests, and digital envelopes.
//
// Algorithm choices live only in crypto.cpp:
//   digest     SHA-256
//   signature  Ed25519
//   envelope   X25519 key agreement wraps a per-message session key
//              (XSalsa20-Poly1305); the payload is sealed with
//              XChaCha20-Poly1305 under that session key.
// Encryption keys are derived from the Ed25519 identity keys, so one keypair
// per node serves both signing and receiving envelopes.

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "gridledger/bytes.hpp"

namespace gridledger {

template <std::size_t N, typename Tag>
struct FixedBytes {
  static constexpr std::size_t kSize = N;
  std::array<std::uint8_t, N> value{};

  ByteView view() const { return {value.data(), value.size()}; }
  std::string hex() const { return to_hex(view()); }
  static FixedBytes from_hex(std::string_view h) { return {array_from_hex<N>(h)}; }

  auto operator<=>(const FixedBytes&) const = default;
};

struct DigestTag {};
struct PublicKeyTag {};
struct PrivateKeyTag {};
struct SignatureTag {};
struct SeedTag {};

using Digest = FixedBytes<32, DigestTag>;
using PublicKey = FixedBytes<32, PublicKeyTag>;
// Ed25519 secret key: 32-byte seed followed by the public key.
using PrivateKey = FixedBytes<64, PrivateKeyTag>;
using Signature = FixedBytes<64, SignatureTag>;
// 32 bytes of caller-provided entropy; used for key generation and to make
// envelope construction reproducible in simulations.
using Seed = FixedBytes<32, SeedTag>;

struct Keypair {
  PublicKey public_key;
  PrivateKey private_key;
};

struct Envelope {
  Bytes encrypted_key;  // ephemeral public key || sealed session key
  Bytes ciphertext;     // payload + authentication tag
  Bytes nonce;          // payload nonce

  bool operator==(const Envelope&) const = default;
};

class CryptoError : public std::runtime_error {
 public:
  enum class Kind { MalformedSeed, InvalidKey, DecryptionFailure, MalformedEnvelope };

  CryptoError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// The all-zero digest; genesis links to it.
Digest zero_digest();

Keypair generate_keypair(ByteView seed);
Keypair generate_keypair(const Seed& seed);

Digest digest(ByteView data);
Digest digest(std::string_view data);

Signature sign(const PrivateKey& private_key, ByteView message);
// Never throws; malformed keys or signatures simply fail verification.
bool verify(const PublicKey& public_key, ByteView message, const Signature& signature);

Envelope encrypt_for(const PublicKey& recipient, ByteView plaintext, const Seed& entropy);
// Draws entropy from the OS.
Envelope encrypt_for(const PublicKey& recipient, ByteView plaintext);
Bytes decrypt(const PrivateKey& private_key, const Envelope& envelope);

// Canonical envelope wire form (three length-prefixed fields).
Bytes encode_envelope(const Envelope& envelope);
Envelope decode_envelope(ByteView data);
void write_envelope(ByteWriter& w, const Envelope& envelope);
Envelope read_envelope(ByteReader& r);

// Expands one seed into an independent labelled sub-seed.
Seed derive_seed(const Seed& parent, std::string_view label);

}  // namespace gridledger
