#include <gtest/gtest.h>

#include "gridledger/crypto.hpp"

using namespace gridledger;

namespace {

Seed seed_of(std::uint8_t b) {
  Seed s;
  s.value.fill(b);
  return s;
}

}  // namespace

TEST(Digest, KnownSha256Values) {
  EXPECT_EQ(digest(std::string_view("")).hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(digest(std::string_view("abc")).hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Digest, ZeroDigestIsAllZero) {
  for (auto b : zero_digest().value) EXPECT_EQ(b, 0);
}

// Ed25519 test vectors 1 and 2 of RFC 8032.
TEST(Signature, Rfc8032Vectors) {
  struct Vector {
    const char* secret;
    const char* pub;
    const char* msg;
    const char* sig;
  };
  const Vector vectors[] = {
      {"9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60",
       "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a", "",
       "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39701cf9"
       "b46bd25bf5f0595bbe24655141438e7a100b"},
      {"4ccd089b28ff96da9db6c346ec114e0f5b8a319f35aba624da8cf6ed4fb8a6fb",
       "3d4017c3e843895a92b70aa74d1b7ebc9c982ccf2ec4968cc0cd55f12af4660c", "72",
       "92a009a9f0d4cab8720e820b5f642540a2b27b5416503f8fb3762223ebdb69da085ac1e43e15996e458f3613d0f1"
       "1d8c387b2eaeb4302aeeb00d291612bb0c00"},
  };
  for (const auto& v : vectors) {
    const auto kp = generate_keypair(from_hex(v.secret));
    EXPECT_EQ(kp.public_key.hex(), v.pub);
    const auto msg = from_hex(v.msg);
    const auto sig = sign(kp.private_key, msg);
    EXPECT_EQ(sig.hex(), v.sig);
    EXPECT_TRUE(verify(kp.public_key, msg, sig));
  }
}

TEST(Signature, RejectsWrongKeyMessageOrSignature) {
  const auto a = generate_keypair(seed_of(1));
  const auto b = generate_keypair(seed_of(2));
  const auto msg = as_bytes("meter reading 42");
  auto sig = sign(a.private_key, msg);
  EXPECT_TRUE(verify(a.public_key, msg, sig));
  EXPECT_FALSE(verify(b.public_key, msg, sig));
  EXPECT_FALSE(verify(a.public_key, as_bytes("meter reading 43"), sig));
  sig.value[10] ^= 0x04;
  EXPECT_FALSE(verify(a.public_key, msg, sig));
}

TEST(Signature, GarbageKeyDoesNotThrow) {
  PublicKey junk;
  junk.value.fill(0xff);
  Signature sig;
  EXPECT_FALSE(verify(junk, as_bytes("x"), sig));
}

TEST(Keypair, SeedMustBe32Bytes) {
  const Bytes short_seed(31, 0x01);
  try {
    generate_keypair(short_seed);
    FAIL() << "expected CryptoError";
  } catch (const CryptoError& e) {
    EXPECT_EQ(e.kind(), CryptoError::Kind::MalformedSeed);
  }
}

TEST(Keypair, DeterministicFromSeed) {
  EXPECT_EQ(generate_keypair(seed_of(9)).public_key, generate_keypair(seed_of(9)).public_key);
  EXPECT_NE(generate_keypair(seed_of(9)).public_key, generate_keypair(seed_of(8)).public_key);
}

TEST(Envelope, RoundTripToRecipient) {
  const auto rcpt = generate_keypair(seed_of(3));
  const Bytes plaintext{'g', 'r', 'i', 'd'};
  const auto env = encrypt_for(rcpt.public_key, plaintext, seed_of(4));
  EXPECT_EQ(decrypt(rcpt.private_key, env), plaintext);
  EXPECT_EQ(env.ciphertext.size(), plaintext.size() + 16);
}

TEST(Envelope, EmptyPayloadRoundTrips) {
  const auto rcpt = generate_keypair(seed_of(3));
  const auto env = encrypt_for(rcpt.public_key, Bytes{});
  EXPECT_TRUE(decrypt(rcpt.private_key, env).empty());
}

TEST(Envelope, DeterministicGivenEntropy) {
  const auto rcpt = generate_keypair(seed_of(3));
  const Bytes p{1, 2, 3};
  EXPECT_EQ(encrypt_for(rcpt.public_key, p, seed_of(5)), encrypt_for(rcpt.public_key, p, seed_of(5)));
  EXPECT_NE(encrypt_for(rcpt.public_key, p, seed_of(5)), encrypt_for(rcpt.public_key, p, seed_of(6)));
}

TEST(Envelope, OtherKeyCannotOpen) {
  const auto rcpt = generate_keypair(seed_of(3));
  const auto other = generate_keypair(seed_of(7));
  const auto env = encrypt_for(rcpt.public_key, as_bytes("secret"), seed_of(4));
  try {
    decrypt(other.private_key, env);
    FAIL() << "expected CryptoError";
  } catch (const CryptoError& e) {
    EXPECT_EQ(e.kind(), CryptoError::Kind::DecryptionFailure);
  }
}

TEST(Envelope, TamperedPartsFail) {
  const auto rcpt = generate_keypair(seed_of(3));
  const auto env = encrypt_for(rcpt.public_key, as_bytes("secret payload"), seed_of(4));
  for (auto part : {&Envelope::encrypted_key, &Envelope::ciphertext, &Envelope::nonce}) {
    auto bad = env;
    (bad.*part)[0] ^= 0x80;
    EXPECT_THROW(decrypt(rcpt.private_key, bad), CryptoError);
  }
}

TEST(Envelope, WrongSizedPartsAreMalformed) {
  const auto rcpt = generate_keypair(seed_of(3));
  auto env = encrypt_for(rcpt.public_key, as_bytes("x"), seed_of(4));
  env.nonce.pop_back();
  try {
    decrypt(rcpt.private_key, env);
    FAIL() << "expected CryptoError";
  } catch (const CryptoError& e) {
    EXPECT_EQ(e.kind(), CryptoError::Kind::MalformedEnvelope);
  }
}

TEST(Envelope, WireFormRoundTrips) {
  const auto rcpt = generate_keypair(seed_of(3));
  const auto env = encrypt_for(rcpt.public_key, as_bytes("abc"), seed_of(4));
  EXPECT_EQ(decode_envelope(encode_envelope(env)), env);
  auto wire = encode_envelope(env);
  wire.push_back(0);
  try {
    decode_envelope(wire);
    FAIL() << "trailing byte accepted";
  } catch (const CryptoError& e) {
    EXPECT_EQ(e.kind(), CryptoError::Kind::MalformedEnvelope);
  }
}

TEST(DeriveSeed, LabelsSeparate) {
  const auto parent = seed_of(1);
  EXPECT_EQ(derive_seed(parent, "a"), derive_seed(parent, "a"));
  EXPECT_NE(derive_seed(parent, "a"), derive_seed(parent, "b"));
  EXPECT_NE(derive_seed(parent, "a"), derive_seed(seed_of(2), "a"));
}
