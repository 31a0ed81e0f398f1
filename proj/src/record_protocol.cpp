#include "gridledger/record_protocol.hpp"

#include <algorithm>
#include <map>

namespace gridledger {

namespace {

constexpr std::size_t kMaxBlockBytes = std::size_t{1} << 30;
constexpr std::size_t kMaxValidators = 64;

void write_metadata(ByteWriter& w, const RecordMetadata& md) {
  w.u8(static_cast<std::uint8_t>(md.kind));
  w.field(md.data_class);
  w.u64(md.created_tick);
}

RecordMetadata read_metadata(ByteReader& r) {
  RecordMetadata md;
  const auto kind = r.u8();
  if (kind != static_cast<std::uint8_t>(RecordKind::GridData) &&
      kind != static_cast<std::uint8_t>(RecordKind::ShareTransaction)) {
    throw DecodeError("unknown record kind");
  }
  md.kind = static_cast<RecordKind>(kind);
  auto cls = r.field(kMaxDataClassBytes);
  md.data_class.assign(cls.begin(), cls.end());
  md.created_tick = r.u64();
  return md;
}

template <typename Fn>
auto decode_message(ByteView data, Fn&& fn) {
  try {
    ByteReader r(data);
    auto v = fn(r);
    r.finish();
    return v;
  } catch (const DecodeError& e) {
    throw ChainError(ChainError::Kind::Decode, e.what());
  }
}

UploadRejection reject(UploadRejection::Kind kind, std::string detail, ReceiveContext& ctx,
                       const PublicKey& claimed) {
  UploadRejection r{kind, std::move(detail), std::nullopt};
  if (kind != UploadRejection::Kind::PermissionDenied) {
    if (auto id = ctx.ledger.find_by_key(claimed)) {
      r.penalty = ctx.ledger.apply_record_outcome(*id, false, ctx.tick);
    }
  }
  return r;
}

void draw_into(std::vector<NodeId>& chosen, std::vector<NodeId> pool, std::size_t want,
               DeterministicRng& rng, std::string_view label) {
  pool.erase(std::remove_if(pool.begin(), pool.end(),
                            [&](NodeId id) {
                              return std::find(chosen.begin(), chosen.end(), id) != chosen.end();
                            }),
             pool.end());
  while (want > 0 && !pool.empty()) {
    const auto pick = rng.uniform(pool.size(), label);
    chosen.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    --want;
  }
}

}  // namespace

UploadDecision request_upload(const PublicKey& uploader, const PermissionList& permissions) {
  return permissions.contains(uploader) ? UploadDecision::Granted : UploadDecision::Denied;
}

std::string to_string(UploadRejection::Kind kind) {
  switch (kind) {
    case UploadRejection::Kind::PermissionDenied:
      return "permission-denied";
    case UploadRejection::Kind::DecryptionFailure:
      return "decryption-failure";
    case UploadRejection::Kind::SignatureInvalid:
      return "signature-invalid";
    case UploadRejection::Kind::DigestMismatch:
      return "digest-mismatch";
    case UploadRejection::Kind::RecordInvalid:
      return "record-invalid";
  }
  return "unknown";
}

Bytes encode_upload_envelope(const UploadEnvelope& env) {
  ByteWriter w;
  w.field(env.uploader_public_key.view());
  w.field(env.payload_digest.view());
  w.field(env.signed_digest.view());
  write_metadata(w, env.metadata);
  write_envelope(w, env.payload_envelope);
  return std::move(w).take();
}

UploadEnvelope decode_upload_envelope(ByteView data) {
  return decode_message(data, [](ByteReader& r) {
    UploadEnvelope env;
    env.uploader_public_key.value = r.fixed_field<PublicKey::kSize>();
    env.payload_digest.value = r.fixed_field<Digest::kSize>();
    env.signed_digest.value = r.fixed_field<Signature::kSize>();
    env.metadata = read_metadata(r);
    env.payload_envelope = read_envelope(r);
    return env;
  });
}

UploadEnvelope prepare_upload(const Keypair& uploader, const PublicKey& recorder,
                              ByteView payload, const RecordMetadata& metadata,
                              const Seed& entropy) {
  if (metadata.data_class.empty() || metadata.data_class.size() > kMaxDataClassBytes) {
    throw ProtocolError(ProtocolError::Kind::MetadataInvalid,
                        "data_class must be 1.." + std::to_string(kMaxDataClassBytes) + " bytes");
  }
  UploadEnvelope env;
  env.uploader_public_key = uploader.public_key;
  env.payload_digest = digest(payload);
  env.signed_digest = sign(uploader.private_key, env.payload_digest.view());
  env.payload_envelope = encrypt_for(recorder, payload, entropy);
  env.metadata = metadata;
  return env;
}

ReceiveResult receive_upload(const Keypair& recorder, const UploadEnvelope& envelope,
                             ReceiveContext& ctx) {
  using Kind = UploadRejection::Kind;
  const auto& claimed = envelope.uploader_public_key;
  if (request_upload(claimed, ctx.permissions) == UploadDecision::Denied) {
    return reject(Kind::PermissionDenied, "uploader key not authorised", ctx, claimed);
  }
  Bytes plaintext;
  try {
    plaintext = decrypt(recorder.private_key, envelope.payload_envelope);
  } catch (const CryptoError& e) {
    return reject(Kind::DecryptionFailure, e.what(), ctx, claimed);
  }
  if (!verify(claimed, envelope.payload_digest.view(), envelope.signed_digest)) {
    return reject(Kind::SignatureInvalid, "digest signature does not verify under uploader key",
                  ctx, claimed);
  }
  const Digest actual = digest(plaintext);
  if (actual != envelope.payload_digest) {
    return reject(Kind::DigestMismatch,
                  "plaintext hashes to " + actual.hex() + ", signed " + envelope.payload_digest.hex(),
                  ctx, claimed);
  }

  Record record;
  record.uploader_public_key = claimed;
  record.payload_digest = actual;
  record.metadata = envelope.metadata;
  record.uploader_signature = envelope.signed_digest;
  if (envelope.metadata.kind == RecordKind::ShareTransaction) {
    record.attachment = plaintext;
  }
  if (auto why = check_record_shape(record)) {
    return reject(Kind::RecordInvalid, *why, ctx, claimed);
  }

  AcceptedUpload accepted;
  accepted.stored = StoredObject{actual, encrypt_for(claimed, plaintext, ctx.reseal_entropy), claimed};
  accepted.placement = ctx.datastore.put(accepted.stored, ctx.replication_factor);
  accepted.record = std::move(record);
  return accepted;
}

Bytes encode_proposal(const ProposedBlock& proposal) {
  ByteWriter w;
  w.field(canonical_bytes(proposal.block));
  w.u32(proposal.proposer_id);
  w.u64(proposal.round);
  w.u32(static_cast<std::uint32_t>(proposal.validator_ids.size()));
  for (auto id : proposal.validator_ids) w.u32(id);
  return std::move(w).take();
}

ProposedBlock decode_proposal(ByteView data) {
  return decode_message(data, [](ByteReader& r) {
    ProposedBlock p;
    p.block = decode_block(r.field(kMaxBlockBytes));
    p.proposer_id = r.u32();
    p.round = r.u64();
    const auto n = r.u32();
    if (n > kMaxValidators) throw DecodeError("too many validators");
    for (std::uint32_t i = 0; i < n; ++i) p.validator_ids.push_back(r.u32());
    return p;
  });
}

std::vector<NodeId> select_validators(const RoleAssignment& assignment, std::uint64_t round,
                                      NodeId proposer, DeterministicRng& rng) {
  std::vector<NodeId> chosen;
  if (auto sup = duty_supervisor(assignment, round); sup && *sup != proposer) {
    chosen.push_back(*sup);
  }
  std::vector<NodeId> candidates;
  for (auto id : assignment.candidates) {
    if (id != proposer) candidates.push_back(id);
  }
  draw_into(chosen, candidates, 2, rng, "validator/candidate");
  if (chosen.size() < kValidatorsPerBlock) {
    std::vector<NodeId> others;
    for (const auto* tier : {&assignment.supervisors, &assignment.candidates, &assignment.recorders}) {
      for (auto id : *tier) {
        if (id != proposer) others.push_back(id);
      }
    }
    draw_into(chosen, others, kValidatorsPerBlock - chosen.size(), rng, "validator/fallback");
  }
  if (chosen.size() < kValidatorsPerBlock) {
    throw ProtocolError(ProtocolError::Kind::NotEnoughValidators,
                        "need " + std::to_string(kValidatorsPerBlock) +
                            " validators besides the proposer");
  }
  return chosen;
}

ProposedBlock seal_block(const Keypair& recorder, NodeId recorder_id, const PendingQueue& pending,
                         const Block& tip, const RoleAssignment& assignment,
                         const SealParams& params, DeterministicRng& rng) {
  if (params.block_interval_ticks == 0 || params.tick % params.block_interval_ticks != 0) {
    throw ProtocolError(ProtocolError::Kind::NotOnInterval,
                        "tick " + std::to_string(params.tick) + " is not a block boundary");
  }
  ProposedBlock p;
  p.block = make_block(recorder, block_digest(tip), params.tick, pending);
  p.proposer_id = recorder_id;
  p.round = params.round;
  p.validator_ids = select_validators(assignment, params.round, recorder_id, rng);
  return p;
}

Bytes vote_signing_bytes(const Vote& vote) {
  ByteWriter w;
  w.field(std::string_view("gridledger/vote"));
  w.u32(vote.validator_id);
  w.field(vote.block_digest.view());
  w.u8(static_cast<std::uint8_t>(vote.verdict));
  w.u32(static_cast<std::uint32_t>(vote.offending_records.size()));
  for (auto i : vote.offending_records) w.u32(i);
  return std::move(w).take();
}

Bytes encode_vote(const Vote& vote) {
  ByteWriter w;
  w.field(vote_signing_bytes(vote));
  w.field(vote.signature.view());
  return std::move(w).take();
}

Vote decode_vote(ByteView data) {
  return decode_message(data, [](ByteReader& r) {
    Vote v;
    ByteReader body(r.field(1 << 24));
    const auto tag = body.field(32);
    if (std::string_view(reinterpret_cast<const char*>(tag.data()), tag.size()) != "gridledger/vote") {
      throw DecodeError("not a vote");
    }
    v.validator_id = body.u32();
    v.block_digest.value = body.fixed_field<Digest::kSize>();
    const auto verdict = body.u8();
    if (verdict > 1) throw DecodeError("bad verdict");
    v.verdict = static_cast<Verdict>(verdict);
    const auto n = body.u32();
    if (n > kMaxRecordsPerBlock) throw DecodeError("too many offending indices");
    for (std::uint32_t i = 0; i < n; ++i) v.offending_records.push_back(body.u32());
    body.finish();
    v.signature.value = r.fixed_field<Signature::kSize>();
    return v;
  });
}

Vote make_vote(const Keypair& validator, NodeId validator_id, const Digest& block_digest,
               Verdict verdict, std::vector<std::uint32_t> offending) {
  Vote v;
  v.validator_id = validator_id;
  v.block_digest = block_digest;
  v.verdict = verdict;
  v.offending_records = std::move(offending);
  v.signature = sign(validator.private_key, vote_signing_bytes(v));
  return v;
}

bool verify_vote(const Vote& vote, const PublicKey& validator_key) {
  return verify(validator_key, vote_signing_bytes(vote), vote.signature);
}

Vote validate_proposal(const Keypair& validator, NodeId validator_id,
                       const ProposedBlock& proposal, const Chain& local_chain,
                       const ValidityPredicate& is_valid) {
  const auto& ids = proposal.validator_ids;
  if (std::find(ids.begin(), ids.end(), validator_id) == ids.end()) {
    throw ProtocolError(ProtocolError::Kind::ValidatorNotAssigned,
                        "node " + std::to_string(validator_id) + " is not a validator for this block");
  }
  const auto& block = proposal.block;
  std::vector<std::uint32_t> offending;
  for (std::size_t i = 0; i < block.records.size(); ++i) {
    const auto& r = block.records[i];
    const bool ok = !check_record_shape(r) &&
                    verify(r.uploader_public_key, r.payload_digest.view(), r.uploader_signature) &&
                    (!is_valid || is_valid(r));
    if (!ok) offending.push_back(static_cast<std::uint32_t>(i));
  }
  const Block* tip = local_chain.blocks.empty() ? nullptr : &local_chain.blocks.back();
  const auto header_problem = check_block(tip, block, local_chain.size());
  const bool clean = offending.empty() && !header_problem;
  return make_vote(validator, validator_id, block_digest(block),
                   clean ? Verdict::Ok : Verdict::Erroneous, std::move(offending));
}

CommitResult commit(const ProposedBlock& proposal, const std::vector<Vote>& votes, Chain& chain,
                    CreditLedger& ledger, PendingQueue& pending, Tick tick) {
  if (votes.size() != kValidatorsPerBlock) {
    throw ProtocolError(ProtocolError::Kind::WrongVoteCount,
                        "expected " + std::to_string(kValidatorsPerBlock) + " votes, got " +
                            std::to_string(votes.size()));
  }
  const Digest bd = block_digest(proposal.block);
  std::set<NodeId> seen;
  std::vector<ValidatorVote> tallies;
  for (const auto& v : votes) {
    const auto& ids = proposal.validator_ids;
    if (std::find(ids.begin(), ids.end(), v.validator_id) == ids.end() ||
        !seen.insert(v.validator_id).second) {
      throw ProtocolError(ProtocolError::Kind::VoteInvalid,
                          "vote from unassigned or repeated validator " +
                              std::to_string(v.validator_id));
    }
    if (v.block_digest != bd || !verify_vote(v, ledger.profile(v.validator_id).public_key)) {
      throw ProtocolError(ProtocolError::Kind::VoteInvalid,
                          "vote from validator " + std::to_string(v.validator_id) +
                              " does not verify for this block");
    }
    tallies.push_back({v.validator_id, v.verdict});
  }
  const auto ok_votes = std::count_if(tallies.begin(), tallies.end(),
                                      [](const ValidatorVote& t) { return t.verdict == Verdict::Ok; });
  const bool accepted = static_cast<std::size_t>(ok_votes) * 2 > tallies.size();

  CommitResult result;
  const auto& records = proposal.block.records;
  auto uploader_of = [&](const Record& r) { return ledger.find_by_key(r.uploader_public_key); };
  auto drop_pending = [&](const Record& r) {
    if (auto it = std::find(pending.begin(), pending.end(), r); it != pending.end()) pending.erase(it);
  };

  if (accepted) {
    try {
      append_block(chain, proposal.block);
    } catch (const ChainError& e) {
      throw ProtocolError(ProtocolError::Kind::AppendFailed, e.what());
    }
  }
  auto outcome = ledger.apply_validator_outcomes(tallies, tick);
  result.events = outcome.events;
  result.verdict = outcome.majority;
  result.events.push_back(ledger.apply_block_outcome(proposal.proposer_id, !accepted, tick));

  if (accepted) {
    result.appended = true;
    for (const auto& r : records) {
      if (auto id = uploader_of(r)) result.events.push_back(ledger.apply_record_outcome(*id, true, tick));
      drop_pending(r);
    }
    return result;
  }

  std::map<std::uint32_t, std::size_t> flag_count;
  for (const auto& v : votes) {
    if (v.verdict != Verdict::Erroneous) continue;
    std::set<std::uint32_t> unique(v.offending_records.begin(), v.offending_records.end());
    for (auto i : unique) ++flag_count[i];
  }
  for (const auto& [index, count] : flag_count) {
    if (count * 2 <= votes.size() || index >= records.size()) continue;
    const auto& r = records[index];
    if (auto id = uploader_of(r)) result.events.push_back(ledger.apply_record_outcome(*id, false, tick));
    result.quarantined.push_back(r);
    drop_pending(r);
  }
  return result;
}

}  // namespace gridledger
