#include "gridledger/chain.hpp"

#include <sstream>

namespace gridledger {

namespace {

constexpr std::size_t kMaxHeaderBytes = 4096;
constexpr std::size_t kMaxRecordBytes = 4096;

void write_record(ByteWriter& w, const Record& r) {
  if (r.metadata.data_class.size() > kMaxDataClassBytes) {
    throw ChainError(ChainError::Kind::FieldBound,
                     "data_class exceeds " + std::to_string(kMaxDataClassBytes) + " bytes");
  }
  if (r.attachment.size() > kMaxAttachmentBytes) {
    throw ChainError(ChainError::Kind::FieldBound,
                     "attachment exceeds " + std::to_string(kMaxAttachmentBytes) + " bytes");
  }
  w.u8(static_cast<std::uint8_t>(r.metadata.kind));
  w.field(r.metadata.data_class);
  w.u64(r.metadata.created_tick);
  w.field(r.uploader_public_key.view());
  w.field(r.payload_digest.view());
  w.field(r.uploader_signature.view());
  w.field(r.attachment);
}

Record read_record(ByteReader& rd) {
  Record r;
  const auto kind = rd.u8();
  if (kind != static_cast<std::uint8_t>(RecordKind::GridData) &&
      kind != static_cast<std::uint8_t>(RecordKind::ShareTransaction)) {
    throw DecodeError("unknown record kind " + std::to_string(kind));
  }
  r.metadata.kind = static_cast<RecordKind>(kind);
  auto cls = rd.field(kMaxDataClassBytes);
  r.metadata.data_class.assign(cls.begin(), cls.end());
  r.metadata.created_tick = rd.u64();
  r.uploader_public_key.value = rd.fixed_field<PublicKey::kSize>();
  r.payload_digest.value = rd.fixed_field<Digest::kSize>();
  r.uploader_signature.value = rd.fixed_field<Signature::kSize>();
  auto att = rd.field(kMaxAttachmentBytes);
  r.attachment.assign(att.begin(), att.end());
  return r;
}

void write_header_body(ByteWriter& w, const BlockHeader& h) {
  w.field(h.prev_block_digest.view());
  w.u64(h.timestamp_tick);
  w.field(h.merkle_root.view());
  w.field(h.recorder_public_key.view());
}

template <typename Fn>
auto decode_with(ByteView data, Fn&& fn) {
  try {
    ByteReader rd(data);
    auto value = fn(rd);
    rd.finish();
    return value;
  } catch (const DecodeError& e) {
    throw ChainError(ChainError::Kind::Decode, e.what());
  }
}

BlockHeader read_header(ByteReader& rd) {
  BlockHeader h;
  h.prev_block_digest.value = rd.fixed_field<Digest::kSize>();
  h.timestamp_tick = rd.u64();
  h.merkle_root.value = rd.fixed_field<Digest::kSize>();
  h.recorder_public_key.value = rd.fixed_field<PublicKey::kSize>();
  h.recorder_signature.value = rd.fixed_field<Signature::kSize>();
  return h;
}

}  // namespace

std::string to_string(RecordKind kind) {
  switch (kind) {
    case RecordKind::GridData:
      return "grid-data";
    case RecordKind::ShareTransaction:
      return "share-transaction";
  }
  return "unknown";
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Malformed:
      return "malformed";
    case ViolationKind::LinkMismatch:
      return "link-mismatch";
    case ViolationKind::TimestampRegression:
      return "timestamp-regression";
    case ViolationKind::MerkleRootMismatch:
      return "merkle-root-mismatch";
    case ViolationKind::HeaderSignatureInvalid:
      return "header-signature-invalid";
    case ViolationKind::RecordSignatureInvalid:
      return "record-signature-invalid";
    case ViolationKind::RecordInvalid:
      return "record-invalid";
  }
  return "unknown";
}

Bytes canonical_bytes(const Record& record) {
  ByteWriter w;
  write_record(w, record);
  return std::move(w).take();
}

Bytes header_signing_bytes(const BlockHeader& header) {
  ByteWriter w;
  write_header_body(w, header);
  return std::move(w).take();
}

Bytes canonical_bytes(const BlockHeader& header) {
  ByteWriter w;
  write_header_body(w, header);
  w.field(header.recorder_signature.view());
  return std::move(w).take();
}

Bytes canonical_bytes(const Block& block) {
  if (block.records.size() > kMaxRecordsPerBlock) {
    throw ChainError(ChainError::Kind::FieldBound, "too many records in block");
  }
  ByteWriter w;
  w.field(canonical_bytes(block.header));
  w.u32(static_cast<std::uint32_t>(block.records.size()));
  for (const auto& r : block.records) {
    w.field(canonical_bytes(r));
  }
  return std::move(w).take();
}

Bytes canonical_bytes(const ShareTransaction& tx) {
  ByteWriter w;
  w.field(tx.sender_public_key.view());
  w.field(tx.receiver_public_key.view());
  w.field(tx.payload_digest.view());
  w.u64(tx.tick);
  return std::move(w).take();
}

Record decode_record(ByteView data) {
  return decode_with(data, [](ByteReader& rd) { return read_record(rd); });
}

Block decode_block(ByteView data) {
  return decode_with(data, [](ByteReader& rd) {
    Block b;
    b.header = decode_with(rd.field(kMaxHeaderBytes), [](ByteReader& hr) { return read_header(hr); });
    const auto count = rd.u32();
    if (count > kMaxRecordsPerBlock) {
      throw DecodeError("record count exceeds bound");
    }
    for (std::uint32_t i = 0; i < count; ++i) {
      b.records.push_back(decode_record(rd.field(kMaxRecordBytes)));
    }
    return b;
  });
}

ShareTransaction decode_share_transaction(ByteView data) {
  return decode_with(data, [](ByteReader& rd) {
    ShareTransaction tx;
    tx.sender_public_key.value = rd.fixed_field<PublicKey::kSize>();
    tx.receiver_public_key.value = rd.fixed_field<PublicKey::kSize>();
    tx.payload_digest.value = rd.fixed_field<Digest::kSize>();
    tx.tick = rd.u64();
    return tx;
  });
}

Digest record_leaf(const Record& record) {
  Bytes buf;
  buf.push_back(merkle::kLeafPrefix);
  const auto body = canonical_bytes(record);
  buf.insert(buf.end(), body.begin(), body.end());
  return digest(buf);
}

Digest compute_merkle_root(const std::vector<Record>& records) {
  std::vector<Digest> leaves;
  leaves.reserve(records.size());
  for (const auto& r : records) leaves.push_back(record_leaf(r));
  return merkle::build_tree(std::move(leaves)).root();
}

Digest block_digest(const Block& block) { return digest(canonical_bytes(block.header)); }

std::optional<std::string> check_record_shape(const Record& record) {
  const auto& md = record.metadata;
  if (md.data_class.empty() || md.data_class.size() > kMaxDataClassBytes) {
    return "data_class must be 1.." + std::to_string(kMaxDataClassBytes) + " bytes";
  }
  switch (md.kind) {
    case RecordKind::GridData:
      if (!record.attachment.empty()) return "grid-data record carries an attachment";
      break;
    case RecordKind::ShareTransaction:
      if (digest(record.attachment) != record.payload_digest) {
        return "share attachment does not match payload digest";
      }
      try {
        (void)decode_share_transaction(record.attachment);
      } catch (const ChainError& e) {
        return std::string("share attachment does not decode: ") + e.what();
      }
      break;
    default:
      return "unknown record kind";
  }
  return std::nullopt;
}

Keypair bootstrap_keypair(const GenesisConfig& config) {
  return generate_keypair(digest("gridledger/bootstrap/" + config.network_id).view());
}

Block make_block(const Keypair& recorder, const Digest& prev, Tick tick,
                 std::vector<Record> records) {
  Block b;
  b.records = std::move(records);
  b.header.prev_block_digest = prev;
  b.header.timestamp_tick = tick;
  b.header.merkle_root = compute_merkle_root(b.records);
  b.header.recorder_public_key = recorder.public_key;
  b.header.recorder_signature = sign(recorder.private_key, header_signing_bytes(b.header));
  return b;
}

Block genesis(const GenesisConfig& config) {
  return make_block(bootstrap_keypair(config), zero_digest(), 0, {});
}

std::optional<Violation> check_block(const Block* prev, const Block& block, std::size_t index) {
  auto fail = [&](ViolationKind kind, std::string detail) {
    return std::optional<Violation>(Violation{index, kind, std::move(detail)});
  };
  const auto& h = block.header;
  const Digest expected_prev = prev ? block_digest(*prev) : zero_digest();
  if (h.prev_block_digest != expected_prev) {
    return fail(ViolationKind::LinkMismatch, "prev_block_digest " + h.prev_block_digest.hex() +
                                                 " expected " + expected_prev.hex());
  }
  if (prev && h.timestamp_tick < prev->header.timestamp_tick) {
    return fail(ViolationKind::TimestampRegression,
                "timestamp " + std::to_string(h.timestamp_tick) + " precedes " +
                    std::to_string(prev->header.timestamp_tick));
  }
  if (block.records.size() > kMaxRecordsPerBlock) {
    return fail(ViolationKind::Malformed, "too many records");
  }
  for (const auto& r : block.records) {
    if (r.metadata.data_class.size() > kMaxDataClassBytes ||
        r.attachment.size() > kMaxAttachmentBytes) {
      return fail(ViolationKind::Malformed, "record field exceeds its bound");
    }
  }
  const Digest root = compute_merkle_root(block.records);
  if (root != h.merkle_root) {
    return fail(ViolationKind::MerkleRootMismatch,
                "header root " + h.merkle_root.hex() + " but records hash to " + root.hex());
  }
  if (!verify(h.recorder_public_key, header_signing_bytes(h), h.recorder_signature)) {
    return fail(ViolationKind::HeaderSignatureInvalid,
                "header signature does not verify under recorder key");
  }
  for (std::size_t i = 0; i < block.records.size(); ++i) {
    const auto& r = block.records[i];
    if (auto why = check_record_shape(r)) {
      return fail(ViolationKind::RecordInvalid, "record " + std::to_string(i) + ": " + *why);
    }
    if (!verify(r.uploader_public_key, r.payload_digest.view(), r.uploader_signature)) {
      return fail(ViolationKind::RecordSignatureInvalid,
                  "record " + std::to_string(i) + " signature does not verify");
    }
  }
  return std::nullopt;
}

void append_block(Chain& chain, Block block) {
  const Block* prev = chain.blocks.empty() ? nullptr : &chain.blocks.back();
  if (auto v = check_block(prev, block, chain.blocks.size())) {
    throw ChainError(*v);
  }
  chain.blocks.push_back(std::move(block));
}

Chain append(Chain chain, Block block) {
  append_block(chain, std::move(block));
  return chain;
}

std::optional<Violation> verify_chain(const Chain& chain) {
  for (std::size_t i = 0; i < chain.blocks.size(); ++i) {
    const Block* prev = i == 0 ? nullptr : &chain.blocks[i - 1];
    if (auto v = check_block(prev, chain.blocks[i], i)) {
      return v;
    }
  }
  return std::nullopt;
}

std::string export_chain(const Chain& chain) {
  std::string out;
  for (const auto& b : chain.blocks) {
    out += to_hex(canonical_bytes(b));
    out += '\n';
  }
  return out;
}

std::vector<Bytes> parse_export(std::string_view text) {
  std::vector<Bytes> blocks;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    try {
      blocks.push_back(from_hex(line));
    } catch (const std::invalid_argument& e) {
      throw ExportFormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (blocks.empty()) {
    throw ExportFormatError("chain export contains no blocks");
  }
  return blocks;
}

std::optional<Violation> verify_encoded(const std::vector<Bytes>& encoded_blocks) {
  std::optional<Block> prev;
  for (std::size_t i = 0; i < encoded_blocks.size(); ++i) {
    Block block;
    try {
      block = decode_block(encoded_blocks[i]);
    } catch (const ChainError& e) {
      return Violation{i, ViolationKind::Malformed, e.what()};
    }
    if (auto v = check_block(prev ? &*prev : nullptr, block, i)) {
      return v;
    }
    prev = std::move(block);
  }
  return std::nullopt;
}

Chain decode_chain(const std::vector<Bytes>& encoded_blocks) {
  Chain chain;
  for (std::size_t i = 0; i < encoded_blocks.size(); ++i) {
    try {
      chain.blocks.push_back(decode_block(encoded_blocks[i]));
    } catch (const ChainError& e) {
      throw ChainError(ChainError::Kind::Decode,
                       "block " + std::to_string(i) + ": " + e.what());
    }
  }
  return chain;
}

std::vector<TraceEntry> trace(const Chain& chain, const TraceQuery& query) {
  std::vector<TraceEntry> out;
  for (std::size_t b = 0; b < chain.blocks.size(); ++b) {
    const auto& records = chain.blocks[b].records;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      bool match = false;
      if (const auto* key = std::get_if<PublicKey>(&query)) {
        match = r.uploader_public_key == *key;
        if (!match && r.metadata.kind == RecordKind::ShareTransaction) {
          try {
            match = decode_share_transaction(r.attachment).receiver_public_key == *key;
          } catch (const ChainError&) {
          }
        }
      } else {
        const auto& d = std::get<Digest>(query);
        match = r.payload_digest == d;
        if (!match && r.metadata.kind == RecordKind::ShareTransaction) {
          try {
            match = decode_share_transaction(r.attachment).payload_digest == d;
          } catch (const ChainError&) {
          }
        }
      }
      if (match) out.push_back({b, i, r});
    }
  }
  return out;
}

}  // namespace gridledger
