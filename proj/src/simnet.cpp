#include "gridledger/simnet.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace gridledger {

namespace {

std::uint64_t config_u64(const Scenario& sc, const std::string& key, std::uint64_t fallback) {
  auto it = sc.config.find(key);
  return it == sc.config.end() ? fallback : std::stoull(it->second);
}

Bytes encode_key_message(const PublicKey& key, std::optional<bool> granted = std::nullopt) {
  ByteWriter w;
  w.field(key.view());
  if (granted) w.u8(*granted ? 1 : 0);
  return std::move(w).take();
}

template <typename Fn>
auto decode_or_throw(ByteView data, Fn&& fn) {
  try {
    ByteReader r(data);
    auto v = fn(r);
    r.finish();
    return v;
  } catch (const DecodeError& e) {
    throw ChainError(ChainError::Kind::Decode, e.what());
  }
}

constexpr std::size_t kMaxMessageField = std::size_t{1} << 30;

}  // namespace

SimConfig SimConfig::from_scenario(const Scenario& sc) {
  SimConfig c;
  c.seed = config_u64(sc, "seed", c.seed);
  c.max_recorders = config_u64(sc, "max_recorders", c.max_recorders);
  c.max_supervisors = config_u64(sc, "max_supervisors", c.max_supervisors);
  c.block_interval_ticks = config_u64(sc, "block_interval_ticks", c.block_interval_ticks);
  c.epoch_length_blocks = config_u64(sc, "epoch_length_blocks", c.epoch_length_blocks);
  c.replication_factor = config_u64(sc, "replication_factor", c.replication_factor);
  c.tick_length_seconds = config_u64(sc, "tick_length_seconds", c.tick_length_seconds);
  c.storage_units = config_u64(sc, "storage_units", c.storage_units);
  c.message_delay = config_u64(sc, "message_delay", c.message_delay);
  c.initial_credit = static_cast<Credit>(config_u64(sc, "initial_credit", 0));
  if (auto it = sc.config.find("network_id"); it != sc.config.end()) c.network_id = it->second;
  return c;
}

std::string to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::UploadRequest:
      return "upload-request";
    case MessageKind::UploadGrant:
      return "upload-grant";
    case MessageKind::UploadEnvelope:
      return "upload-envelope";
    case MessageKind::Proposal:
      return "proposal";
    case MessageKind::Vote:
      return "vote";
    case MessageKind::CommitNotice:
      return "commit-notice";
    case MessageKind::PendingHandoff:
      return "pending-handoff";
    case MessageKind::ShareEnvelope:
      return "share-envelope";
    case MessageKind::ShareReceipt:
      return "share-receipt";
    case MessageKind::SyncRequest:
      return "sync-request";
    case MessageKind::SyncResponse:
      return "sync-response";
  }
  return "unknown";
}

Simulation::Simulation(SimConfig config, const Scenario& scenario)
    : config_(std::move(config)), rng_(config_.seed) {
  if (config_.message_delay < 1) throw std::invalid_argument("message_delay must be >= 1");
  if (config_.block_interval_ticks < 1) {
    throw std::invalid_argument("block_interval_ticks must be >= 1");
  }
  if (config_.epoch_length_blocks < 1) {
    throw std::invalid_argument("epoch_length_blocks must be >= 1");
  }
  if (scenario.nodes.empty()) throw std::invalid_argument("scenario declares no nodes");

  rng_.set_observer([this](std::string_view label, std::uint64_t value) {
    log("rng\t" + std::string(label) + "\t" + std::to_string(value));
  });
  master_seed_.value = digest("gridledger/sim/" + std::to_string(config_.seed)).value;
  genesis_config_.network_id = config_.network_id;
  committee_ = CommitteeConfig{config_.max_recorders, config_.max_supervisors,
                               config_.initial_credit};

  const Block gen = genesis(genesis_config_);
  std::vector<NodeProfile> profiles;
  for (const auto& spec : scenario.nodes) {
    Node n;
    n.id = spec.id;
    n.keys = generate_keypair(derive_seed(master_seed_, "node/" + std::to_string(spec.id)));
    n.chain.blocks.push_back(gen);
    profiles.push_back(NodeProfile{spec.id, n.keys.public_key, 0, Role::Candidate, spec.assessment});
    nodes_.emplace(spec.id, std::move(n));
  }
  roles_ = initialize_roles(profiles, committee_);
  ledger_ = CreditLedger(profiles, committee_.initial_credit);
  ledger_.set_roles(roles_);
  role_history_.push_back(roles_);

  for (auto id : scenario.authorized) permissions_.authorize(node(id).keys.public_key);
  for (std::size_t u = 0; u < config_.storage_units; ++u) {
    datastore_.add_unit(static_cast<UnitId>(u), "region-" + std::to_string(u));
  }

  uploads_ = scenario.uploads;
  shares_ = scenario.shares;
  for (std::size_t i = 0; i < uploads_.size(); ++i) {
    schedule_.emplace(uploads_[i].at, ScheduledAction{ScheduledAction::Kind::Upload, i, 0});
  }
  for (std::size_t i = 0; i < shares_.size(); ++i) {
    schedule_.emplace(shares_[i].at, ScheduledAction{ScheduledAction::Kind::Share, i, 0});
  }
  for (const auto& f : scenario.faults) inject_fault(f);

  std::ostringstream os;
  os << "config\tseed=" << config_.seed << "\tnodes=" << nodes_.size()
     << "\trecorders=" << roles_.recorders.size() << "\tsupervisors=" << roles_.supervisors.size()
     << "\tcandidates=" << roles_.candidates.size();
  trace_ += "0\t" + os.str() + "\n";
}

Simulation::Node& Simulation::node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::invalid_argument("unknown node " + std::to_string(id));
  return it->second;
}

const Simulation::Node& Simulation::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::invalid_argument("unknown node " + std::to_string(id));
  return it->second;
}

const Chain& Simulation::chain_of(NodeId id) const { return node(id).chain; }
const Keypair& Simulation::keys_of(NodeId id) const { return node(id).keys; }

std::vector<NodeId> Simulation::node_ids() const {
  std::vector<NodeId> ids;
  for (const auto& [id, n] : nodes_) ids.push_back(id);
  return ids;
}

std::uint64_t Simulation::current_round() const { return now_ / config_.block_interval_ticks; }

NodeId Simulation::current_duty() const { return duty_recorder(roles_, current_round()); }

void Simulation::log(const std::string& line) {
  trace_ += std::to_string(now_);
  trace_ += '\t';
  trace_ += line;
  trace_ += '\n';
}

void Simulation::inject_fault(const FaultSpec& fault) {
  if (fault.kind == FaultKind::FailStorageUnit) {
    if (!datastore_.units().count(fault.target)) {
      throw std::invalid_argument("unknown storage unit " + std::to_string(fault.target));
    }
  } else {
    (void)node(fault.target);
  }
  if (started_ && fault.at < now_) {
    throw std::invalid_argument("fault activation tick " + std::to_string(fault.at) +
                                " is in the past");
  }
  const std::size_t index = faults_.size();
  faults_.push_back(FaultOutcome{fault, false, false, "not activated", std::nullopt});
  if (started_ && fault.at == now_) {
    activate_fault(index);
  } else {
    schedule_.emplace(fault.at, ScheduledAction{ScheduledAction::Kind::Fault, index, fault.target});
  }
}

void Simulation::send(NodeId from, NodeId to, MessageKind kind, Bytes payload) {
  SimEvent ev;
  ev.deliver_tick = now_ + config_.message_delay;
  ev.seq = next_seq_++;
  ev.source = from;
  ev.destination = to;
  ev.kind = kind;
  ev.payload = std::move(payload);

  Node& src = node(from);
  if (src.tamper_next_send &&
      (kind == MessageKind::UploadEnvelope || kind == MessageKind::ShareEnvelope)) {
    // Flip one ciphertext bit; the ciphertext is the second envelope field.
    if (kind == MessageKind::UploadEnvelope) {
      auto env = decode_upload_envelope(ev.payload);
      env.payload_envelope.ciphertext[0] ^= 0x01;
      ev.payload = encode_upload_envelope(env);
    } else {
      auto env = decode_share_envelope(ev.payload);
      env.payload_envelope.ciphertext[0] ^= 0x01;
      ev.payload = encode_share_envelope(env);
    }
    ev.tampered = true;
    src.tamper_next_send = false;
    if (src.tamper_fault) {
      faults_[*src.tamper_fault].detail = "tampered " + to_string(kind) + " seq " +
                                          std::to_string(ev.seq) + ", not rejected";
    }
    log("tamper\t" + std::to_string(ev.seq) + "\t" + to_string(kind));
  }

  ++metrics_.messages_sent;
  ++message_counts_[to_string(kind)];
  std::ostringstream os;
  os << "send\t" << ev.seq << '\t' << from << '\t' << to << '\t' << to_string(kind) << '\t'
     << ev.payload.size() << '\t' << digest(ev.payload).hex();
  log(os.str());
  captured_.push_back(ev);
  queue_.emplace(std::make_pair(ev.deliver_tick, ev.seq), std::move(ev));
}

void Simulation::step() {
  const Tick t = started_ ? now_ + 1 : 0;
  started_ = true;
  now_ = t;
  run_scheduled(t, false);
  while (!queue_.empty() && queue_.begin()->first.first <= t) {
    auto ev = std::move(queue_.begin()->second);
    queue_.erase(queue_.begin());
    deliver(ev);
  }
  if (t > 0 && t % config_.block_interval_ticks == 0) on_boundary();
  run_scheduled(t, true);
}

void Simulation::run_scheduled(Tick t, bool late) {
  // Recoveries and fault activations run early in the tick; uploads and
  // shares run last.
  auto [lo, hi] = schedule_.equal_range(t);
  std::vector<ScheduledAction> actions;
  for (auto it = lo; it != hi; ++it) actions.push_back(it->second);
  for (const auto& a : actions) {
    const bool is_late = a.kind == ScheduledAction::Kind::Upload ||
                         a.kind == ScheduledAction::Kind::Share;
    if (is_late != late) continue;
    if (settling_ && is_late) continue;
    switch (a.kind) {
      case ScheduledAction::Kind::Upload:
        do_upload(a.index);
        break;
      case ScheduledAction::Kind::Share:
        do_share(a.index);
        break;
      case ScheduledAction::Kind::Fault:
        if (!settling_) activate_fault(a.index);
        break;
      case ScheduledAction::Kind::Recover: {
        Node& n = node(a.target);
        if (n.crashed && crash_until_[a.target] == t) {
          n.crashed = false;
          log("recover-node\t" + std::to_string(a.target));
          for (const auto& [id, peer] : nodes_) {
            if (id != a.target && !peer.crashed) {
              ByteWriter w;
              w.u64(n.chain.size());
              send(n.id, id, MessageKind::SyncRequest, std::move(w).take());
              break;
            }
          }
          maybe_handoff(n);
        }
        break;
      }
      case ScheduledAction::Kind::RecoverUnit: {
        auto rep = datastore_.recover_unit(a.target);
        log("recover-unit\t" + std::to_string(a.target) + "\trestored=" +
            std::to_string(rep.restored.size()) + "\tunrecoverable=" +
            std::to_string(rep.unrecoverable.size()));
        repairs_.push_back(std::move(rep));
        break;
      }
    }
  }
}

SimReport Simulation::run(Tick until_tick) {
  while (!started_ || now_ < until_tick) step();
  settling_ = true;
  while (!queue_.empty()) {
    const Tick next = queue_.begin()->first.first;
    while (now_ < next) {
      ++now_;
      run_scheduled(now_, false);
    }
    while (!queue_.empty() && queue_.begin()->first.first <= now_) {
      auto ev = std::move(queue_.begin()->second);
      queue_.erase(queue_.begin());
      deliver(ev);
    }
  }
  settling_ = false;
  return report();
}

void Simulation::deliver(SimEvent& ev) {
  Node& dst = node(ev.destination);
  if (dst.crashed) {
    ++metrics_.messages_dropped;
    log("drop\t" + std::to_string(ev.seq) + "\t" + std::to_string(ev.destination) + "\tcrashed");
    return;
  }
  try {
    handle(dst, ev);
  } catch (const std::runtime_error& e) {
    // Undecodable or otherwise unusable message; the receiver drops it.
    log("bad-message\t" + std::to_string(ev.seq) + "\t" + e.what());
  }
}

void Simulation::handle(Node& n, SimEvent& ev) {
  switch (ev.kind) {
    case MessageKind::UploadRequest:
      return on_upload_request(n, ev);
    case MessageKind::UploadGrant:
      return on_upload_grant(n, ev);
    case MessageKind::UploadEnvelope:
      return on_upload_envelope(n, ev);
    case MessageKind::Proposal:
      return on_proposal(n, ev);
    case MessageKind::Vote:
      return on_vote(n, ev);
    case MessageKind::CommitNotice:
      return on_commit_notice(n, ev);
    case MessageKind::PendingHandoff:
      return on_handoff(n, ev);
    case MessageKind::ShareEnvelope:
      return on_share_envelope(n, ev);
    case MessageKind::ShareReceipt:
      return on_share_receipt(n, ev);
    case MessageKind::SyncRequest:
      return on_sync_request(n, ev);
    case MessageKind::SyncResponse:
      return on_sync_response(n, ev);
  }
}

void Simulation::start_upload(Node& n, UploadJob job) {
  const NodeId duty = current_duty();
  ++metrics_.uploads_requested;
  job.requested_at = now_;
  n.awaiting_grant[duty].push_back(std::move(job));
  send(n.id, duty, MessageKind::UploadRequest, encode_key_message(n.keys.public_key));
}

void Simulation::do_upload(std::size_t index) {
  const auto& spec = uploads_[index];
  Node& n = node(spec.node);
  if (n.crashed) {
    ++metrics_.uploads_skipped;
    log("upload-skipped\t" + std::to_string(spec.node) + "\tcrashed");
    return;
  }
  Bytes payload = rng_.bytes(spec.size, "payload/upload");
  const Digest d = digest(payload);
  genuine_.insert(d);
  upload_digests_[index] = d;
  plaintexts_.push_back(payload);
  log("upload\t" + std::to_string(spec.node) + "\t" + spec.data_class + "\t" + d.hex());
  start_upload(n, UploadJob{std::move(payload),
                            RecordMetadata{RecordKind::GridData, spec.data_class, now_}});
}

void Simulation::on_upload_request(Node& n, const SimEvent& ev) {
  const auto key = decode_or_throw(ev.payload, [](ByteReader& r) {
    PublicKey k;
    k.value = r.fixed_field<PublicKey::kSize>();
    return k;
  });
  const bool granted = request_upload(key, permissions_) == UploadDecision::Granted;
  send(n.id, ev.source, MessageKind::UploadGrant, encode_key_message(key, granted));
}

void Simulation::on_upload_grant(Node& n, const SimEvent& ev) {
  const bool granted = decode_or_throw(ev.payload, [](ByteReader& r) {
    (void)r.fixed_field<PublicKey::kSize>();
    return r.u8() == 1;
  });
  auto& jobs = n.awaiting_grant[ev.source];
  if (jobs.empty()) return;
  UploadJob job = std::move(jobs.front());
  jobs.pop_front();
  if (!granted) {
    ++metrics_.uploads_denied;
    log("upload-denied\t" + std::to_string(n.id) + "\t" + digest(job.payload).hex());
    return;
  }
  const auto env = prepare_upload(n.keys, node(ev.source).keys.public_key, job.payload,
                                  job.metadata, rng_.seed("entropy/upload"));
  send(n.id, ev.source, MessageKind::UploadEnvelope, encode_upload_envelope(env));
}

void Simulation::on_upload_envelope(Node& n, SimEvent& ev) {
  const auto env = decode_upload_envelope(ev.payload);
  ReceiveContext ctx{permissions_, ledger_, datastore_, config_.replication_factor, now_,
                     rng_.seed("entropy/reseal")};
  ReceiveResult result;
  try {
    result = receive_upload(n.keys, env, ctx);
  } catch (const StoreError& e) {
    ++metrics_.uploads_rejected;
    log("upload-rejected\t" + std::to_string(ev.source) + "\tstorage\t" + e.what());
    return;
  }
  if (auto* rej = std::get_if<UploadRejection>(&result)) {
    ++metrics_.uploads_rejected;
    log("upload-rejected\t" + std::to_string(ev.source) + "\t" + to_string(rej->kind));
    if (ev.tampered && node(ev.source).tamper_fault) {
      auto& f = faults_[*node(ev.source).tamper_fault];
      f.detected = true;
      f.detail = "upload envelope rejected: " + to_string(rej->kind);
    }
    return;
  }
  auto& accepted = std::get<AcceptedUpload>(result);
  log("upload-accepted\t" + std::to_string(ev.source) + "\t" +
      accepted.record.payload_digest.hex());
  n.pending.push_back(std::move(accepted.record));
  maybe_handoff(n);
}

// A request that has gone unanswered for a whole interval (its recorder was
// down) is re-sent to the current duty recorder.
void Simulation::retry_stale_requests(Node& n) {
  if (n.crashed) return;
  const NodeId duty = current_duty();
  for (auto& [recorder, jobs] : n.awaiting_grant) {
    if (recorder == duty) continue;
    std::deque<UploadJob> keep;
    for (auto& job : jobs) {
      if (job.requested_at + config_.block_interval_ticks > now_) {
        keep.push_back(std::move(job));
        continue;
      }
      ++metrics_.uploads_retried;
      log("upload-retry\t" + std::to_string(n.id) + "\t" + std::to_string(recorder) + "->" +
          std::to_string(duty));
      job.requested_at = now_;
      n.awaiting_grant[duty].push_back(std::move(job));
      send(n.id, duty, MessageKind::UploadRequest, encode_key_message(n.keys.public_key));
    }
    jobs = std::move(keep);
  }
}

void Simulation::maybe_handoff(Node& n) {
  if (n.pending.empty() || n.awaiting || n.crashed) return;
  const NodeId duty = current_duty();
  if (duty == n.id || node(duty).crashed) return;
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(n.pending.size()));
  for (const auto& r : n.pending) w.field(canonical_bytes(r));
  n.pending.clear();
  send(n.id, duty, MessageKind::PendingHandoff, std::move(w).take());
}

void Simulation::on_handoff(Node& n, const SimEvent& ev) {
  auto records = decode_or_throw(ev.payload, [](ByteReader& r) {
    std::vector<Record> out;
    const auto count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) out.push_back(decode_record(r.field(kMaxMessageField)));
    return out;
  });
  for (auto& r : records) {
    if (std::find(n.pending.begin(), n.pending.end(), r) == n.pending.end()) {
      n.pending.push_back(std::move(r));
    }
  }
  maybe_handoff(n);
}

void Simulation::on_boundary() {
  const Tick t = now_;
  const std::uint64_t round = t / config_.block_interval_ticks - 1;

  for (auto& [id, n] : nodes_) {
    if (n.awaiting) {
      ++metrics_.blocks_abandoned;
      log("abandon\t" + std::to_string(id) + "\tround=" + std::to_string(n.awaiting->round));
      n.awaiting.reset();
      n.votes.clear();
    }
  }

  const NodeId duty = duty_recorder(roles_, round);
  Node& recorder = node(duty);
  if (recorder.crashed) {
    ++metrics_.rounds_skipped;
    log("skip\tround=" + std::to_string(round) + "\trecorder=" + std::to_string(duty) +
        "\tcrashed");
  } else {
    try {
      auto proposal = seal_block(recorder.keys, duty, recorder.pending, recorder.chain.tip(), roles_,
                                 SealParams{t, config_.block_interval_ticks, round}, rng_);
      std::ostringstream os;
      os << "seal\tround=" << round << "\trecorder=" << duty
         << "\trecords=" << proposal.block.records.size() << "\tvalidators=";
      for (std::size_t i = 0; i < proposal.validator_ids.size(); ++i) {
        os << (i ? "," : "") << proposal.validator_ids[i];
      }
      log(os.str());
      const auto bytes = encode_proposal(proposal);
      for (auto v : proposal.validator_ids) send(duty, v, MessageKind::Proposal, bytes);
      recorder.awaiting = std::move(proposal);
      recorder.votes.clear();
    } catch (const ProtocolError& e) {
      ++metrics_.rounds_skipped;
      log("skip\tround=" + std::to_string(round) + "\t" + e.what());
    }
  }

  if ((t / config_.block_interval_ticks) % config_.epoch_length_blocks == 0) {
    auto next = reelect(ledger_, roles_, committee_);
    std::uint64_t churn = 0;
    for (const auto& [id, n] : nodes_) {
      if (next.role_of(id) != roles_.role_of(id)) ++churn;
    }
    metrics_.role_churn.push_back(churn);
    roles_ = std::move(next);
    ledger_.set_roles(roles_);
    role_history_.push_back(roles_);
    log("reelect\tepoch=" + std::to_string(roles_.epoch) + "\tchurn=" + std::to_string(churn));
  }

  for (auto& [id, n] : nodes_) {
    retry_stale_requests(n);
    maybe_handoff(n);
  }
}

ValidityPredicate Simulation::predicate_for(const Node& n) const {
  return [this, &n](const Record& r) {
    if (r.metadata.kind == RecordKind::GridData) return genuine_.count(r.payload_digest) != 0;
    ShareTransaction tx;
    try {
      tx = decode_share_transaction(r.attachment);
    } catch (const ChainError&) {
      return false;
    }
    if (tx.sender_public_key != r.uploader_public_key) return false;
    for (const auto& b : n.chain.blocks) {
      for (const auto& rec : b.records) {
        if (rec.metadata.kind == RecordKind::GridData && rec.payload_digest == tx.payload_digest &&
            rec.uploader_public_key == tx.sender_public_key) {
          return true;
        }
      }
    }
    return false;
  };
}

void Simulation::on_proposal(Node& n, const SimEvent& ev) {
  const auto proposal = decode_proposal(ev.payload);
  const auto& ids = proposal.validator_ids;
  if (std::find(ids.begin(), ids.end(), n.id) == ids.end()) return;
  Vote vote = validate_proposal(n.keys, n.id, proposal, n.chain, predicate_for(n));
  if (n.byzantine) {
    const Verdict flipped = vote.verdict == Verdict::Ok ? Verdict::Erroneous : Verdict::Ok;
    std::vector<std::uint32_t> offending;
    if (flipped == Verdict::Erroneous) {
      offending.resize(proposal.block.records.size());
      std::iota(offending.begin(), offending.end(), 0U);
    }
    vote = make_vote(n.keys, n.id, vote.block_digest, flipped, std::move(offending));
  }
  log("vote\t" + std::to_string(n.id) + "\tround=" + std::to_string(proposal.round) + "\t" +
      to_string(vote.verdict));
  send(n.id, ev.source, MessageKind::Vote, encode_vote(vote));
}

void Simulation::on_vote(Node& n, const SimEvent& ev) {
  const auto vote = decode_vote(ev.payload);
  if (!n.awaiting || vote.block_digest != block_digest(n.awaiting->block)) return;
  for (const auto& v : n.votes) {
    if (v.validator_id == vote.validator_id) return;
  }
  n.votes.push_back(vote);
  if (n.votes.size() < kValidatorsPerBlock) return;

  const ProposedBlock proposal = std::move(*n.awaiting);
  n.awaiting.reset();
  auto votes = std::move(n.votes);
  n.votes.clear();
  CommitResult result;
  try {
    result = commit(proposal, votes, n.chain, ledger_, n.pending, now_);
  } catch (const ProtocolError& e) {
    ++metrics_.blocks_abandoned;
    log("commit-failed\t" + std::to_string(n.id) + "\t" + e.what());
    maybe_handoff(n);
    return;
  }
  if (result.appended) {
    ++metrics_.blocks_committed;
    metrics_.records_committed += proposal.block.records.size();
    log("commit\tround=" + std::to_string(proposal.round) + "\theight=" +
        std::to_string(n.chain.size() - 1) + "\trecords=" +
        std::to_string(proposal.block.records.size()) + "\t" + block_digest(proposal.block).hex());
    ByteWriter w;
    w.u64(n.chain.size() - 1);
    w.field(canonical_bytes(proposal.block));
    const Bytes notice = std::move(w).take();
    for (const auto& [id, other] : nodes_) {
      if (id != n.id) send(n.id, id, MessageKind::CommitNotice, notice);
    }
  } else {
    ++metrics_.blocks_rejected;
    metrics_.records_quarantined += result.quarantined.size();
    log("reject\tround=" + std::to_string(proposal.round) + "\tquarantined=" +
        std::to_string(result.quarantined.size()));
    for (auto& r : result.quarantined) quarantine_.push_back({now_, std::move(r)});
  }
  maybe_handoff(n);
}

void Simulation::on_commit_notice(Node& n, const SimEvent& ev) {
  auto [height, block] = decode_or_throw(ev.payload, [](ByteReader& r) {
    const auto h = r.u64();
    return std::make_pair(h, decode_block(r.field(kMaxMessageField)));
  });
  if (height == n.chain.size()) {
    try {
      append_block(n.chain, std::move(block));
    } catch (const ChainError& e) {
      log("diverged\t" + std::to_string(n.id) + "\t" + e.what());
    }
  } else if (height > n.chain.size()) {
    ByteWriter w;
    w.u64(n.chain.size());
    send(n.id, ev.source, MessageKind::SyncRequest, std::move(w).take());
  }
}

void Simulation::on_sync_request(Node& n, const SimEvent& ev) {
  const auto from = decode_or_throw(ev.payload, [](ByteReader& r) { return r.u64(); });
  if (from >= n.chain.size()) return;
  ByteWriter w;
  w.u64(from);
  w.u32(static_cast<std::uint32_t>(n.chain.size() - from));
  for (std::size_t i = from; i < n.chain.size(); ++i) w.field(canonical_bytes(n.chain.blocks[i]));
  send(n.id, ev.source, MessageKind::SyncResponse, std::move(w).take());
}

void Simulation::on_sync_response(Node& n, const SimEvent& ev) {
  auto [from, blocks] = decode_or_throw(ev.payload, [](ByteReader& r) {
    const auto f = r.u64();
    const auto count = r.u32();
    std::vector<Block> out;
    for (std::uint32_t i = 0; i < count; ++i) out.push_back(decode_block(r.field(kMaxMessageField)));
    return std::make_pair(f, std::move(out));
  });
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (from + i != n.chain.size()) continue;
    try {
      append_block(n.chain, std::move(blocks[i]));
    } catch (const ChainError& e) {
      log("sync-rejected\t" + std::to_string(n.id) + "\t" + e.what());
      return;
    }
  }
}

void Simulation::do_share(std::size_t index) {
  const auto& spec = shares_[index];
  Node& sender = node(spec.from);
  auto fail = [&](const std::string& why) {
    ++metrics_.shares_failed;
    log("share-failed\t" + std::to_string(spec.from) + "\t" + std::to_string(spec.to) + "\t" + why);
  };
  if (sender.crashed) return fail("sender-crashed");
  std::optional<Digest> d;
  if (const auto* ref = std::get_if<UploadRef>(&spec.ref)) {
    if (auto it = upload_digests_.find(ref->index - 1); it != upload_digests_.end()) d = it->second;
  } else {
    d = std::get<Digest>(spec.ref);
  }
  if (!d) return fail("digest-not-on-chain");
  try {
    const auto env = initiate_share(sender.keys, node(spec.to).keys.public_key, *d, sender.chain,
                                    datastore_, rng_.seed("entropy/share"));
    log("share\t" + std::to_string(spec.from) + "\t" + std::to_string(spec.to) + "\t" + d->hex());
    send(sender.id, spec.to, MessageKind::ShareEnvelope, encode_share_envelope(env));
  } catch (const ShareError& e) {
    switch (e.kind()) {
      case ShareError::Kind::DigestNotOnChain:
        return fail("digest-not-on-chain");
      case ShareError::Kind::NotOwner:
        return fail("not-owner");
      case ShareError::Kind::DatastoreMiss:
        return fail("datastore-miss");
    }
  }
}

void Simulation::on_share_envelope(Node& n, SimEvent& ev) {
  const auto env = decode_share_envelope(ev.payload);
  auto result = receive_share(n.keys, env);
  if (auto* rej = std::get_if<ShareRejection>(&result)) {
    ++metrics_.shares_failed;
    log("share-rejected\t" + std::to_string(n.id) + "\t" + to_string(rej->kind));
    if (ev.tampered && node(ev.source).tamper_fault) {
      auto& f = faults_[*node(ev.source).tamper_fault];
      f.detected = true;
      f.detail = "share envelope rejected: " + to_string(rej->kind);
    }
    return;
  }
  const auto& delivery = std::get<ShareDelivery>(result);
  ++metrics_.shares_delivered;
  log("share-delivered\t" + std::to_string(n.id) + "\t" + delivery.payload_digest.hex());
  const ShareTransaction tx{delivery.sender_public_key, n.keys.public_key, delivery.payload_digest,
                            now_};
  const Bytes tx_bytes = canonical_bytes(tx);
  ByteWriter w;
  w.field(tx_bytes);
  w.field(sign(n.keys.private_key, tx_bytes).view());
  send(n.id, ev.source, MessageKind::ShareReceipt, std::move(w).take());
}

void Simulation::on_share_receipt(Node& n, const SimEvent& ev) {
  auto [tx, sig] = decode_or_throw(ev.payload, [](ByteReader& r) {
    auto t = decode_share_transaction(r.field(kMaxAttachmentBytes));
    Signature s;
    s.value = r.fixed_field<Signature::kSize>();
    return std::make_pair(t, s);
  });
  if (tx.sender_public_key != n.keys.public_key ||
      !verify(tx.receiver_public_key, canonical_bytes(tx), sig)) {
    log("receipt-invalid\t" + std::to_string(n.id));
    return;
  }
  auto sub = share_submission(tx);
  start_upload(n, UploadJob{std::move(sub.payload), std::move(sub.metadata)});
}

void Simulation::activate_fault(std::size_t index) {
  auto& outcome = faults_[index];
  const auto& f = outcome.spec;
  outcome.activated = true;
  log("fault\t" + to_string(f.kind) + "\t" + std::to_string(f.target));
  switch (f.kind) {
    case FaultKind::ForgeRecord: {
      Node& n = node(f.target);
      const auto count = f.param_u64("count").value_or(1);
      const auto size = f.param_u64("size").value_or(64);
      const auto cls = f.params.count("class") ? f.params.at("class") : std::string("forged");
      if (n.crashed) {
        outcome.detail = "forger crashed; nothing uploaded";
        break;
      }
      for (std::uint64_t i = 0; i < count; ++i) {
        Bytes payload = rng_.bytes(size, "payload/forged");
        forged_digests_.emplace(index, digest(payload));
        plaintexts_.push_back(payload);
        start_upload(n, UploadJob{std::move(payload), RecordMetadata{RecordKind::GridData, cls, now_}});
      }
      outcome.detail = std::to_string(count) + " forged uploads submitted";
      break;
    }
    case FaultKind::TamperChainCopy: {
      Node& n = node(f.target);
      std::size_t idx = n.chain.size() - 1;
      if (auto b = f.param_u64("block")) {
        idx = std::min<std::size_t>(*b, n.chain.size() - 1);
      } else {
        for (std::size_t i = n.chain.size(); i-- > 0;) {
          if (!n.chain.blocks[i].records.empty()) {
            idx = i;
            break;
          }
        }
      }
      auto& block = n.chain.blocks[idx];
      if (!block.records.empty()) {
        block.records[0].payload_digest.value[0] ^= 0x01;
      } else {
        block.header.timestamp_tick ^= 0x01;
      }
      outcome.mutated_block = idx;
      outcome.detail = "mutated block " + std::to_string(idx);
      break;
    }
    case FaultKind::TamperInFlight: {
      Node& n = node(f.target);
      n.tamper_next_send = true;
      n.tamper_fault = index;
      outcome.detail = "armed; no payload message sent yet";
      break;
    }
    case FaultKind::CrashNode: {
      Node& n = node(f.target);
      const Tick duration = f.param_u64("duration").value_or(config_.block_interval_ticks);
      n.crashed = true;
      crash_until_[f.target] = now_ + duration;
      schedule_.emplace(now_ + duration,
                        ScheduledAction{ScheduledAction::Kind::Recover, index, f.target});
      outcome.detail = "down until tick " + std::to_string(now_ + duration);
      break;
    }
    case FaultKind::ByzantineValidator:
      node(f.target).byzantine = true;
      outcome.detail = "inverting verdicts";
      break;
    case FaultKind::FailStorageUnit: {
      std::vector<Digest> held;
      for (const auto& [d, obj] : datastore_.units().at(f.target).objects) held.push_back(d);
      datastore_.fail_unit(f.target);
      std::set<Digest> flagged;
      for (const auto& st : datastore_.audit().objects) {
        if (st.under_replicated()) flagged.insert(st.payload_digest);
      }
      const auto caught = static_cast<std::size_t>(std::count_if(
          held.begin(), held.end(), [&](const Digest& d) { return flagged.count(d) != 0; }));
      outcome.detected = caught == held.size();
      outcome.detail = "audit flagged " + std::to_string(caught) + " of " +
                       std::to_string(held.size()) + " objects held by the unit";
      if (auto d = f.param_u64("duration")) {
        schedule_.emplace(now_ + *d,
                          ScheduledAction{ScheduledAction::Kind::RecoverUnit, index, f.target});
      }
      break;
    }
  }
}

Digest Simulation::state_digest() const {
  ByteWriter w;
  w.u64(now_);
  for (const auto& [id, n] : nodes_) {
    w.u32(id);
    w.field(n.keys.public_key.view());
    w.field(export_chain(n.chain));
    w.u8(n.crashed ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(n.pending.size()));
    for (const auto& r : n.pending) w.field(canonical_bytes(r));
  }
  w.field(export_audit_log(ledger_.audit_log()));
  for (const auto* tier : {&roles_.recorders, &roles_.supervisors, &roles_.candidates}) {
    w.u32(static_cast<std::uint32_t>(tier->size()));
    for (auto id : *tier) w.u32(id);
  }
  for (const auto& s : datastore_.audit().objects) {
    w.field(s.payload_digest.view());
    w.u64(s.live_replicas);
  }
  return digest(w.bytes());
}

SimReport Simulation::report() const {
  SimReport r;
  r.config = config_;
  r.final_tick = now_;
  r.profiles = ledger_.profiles();
  r.audit_log = ledger_.audit_log();
  r.roles = roles_;
  r.role_history = role_history_;
  r.quarantine = quarantine_;
  r.storage = datastore_.audit();
  r.repairs = repairs_;
  r.message_counts = message_counts_;
  r.metrics = metrics_;
  r.trace = trace_;

  // The reported chain is the copy held by the most nodes.
  std::map<Digest, std::pair<std::size_t, NodeId>> votes;
  for (const auto& [id, n] : nodes_) {
    const auto key = digest(export_chain(n.chain));
    auto& slot = votes[key];
    if (slot.first == 0) slot.second = id;
    ++slot.first;
  }
  const auto best = std::max_element(votes.begin(), votes.end(), [&](const auto& a, const auto& b) {
    const auto& ca = node(a.second.second).chain;
    const auto& cb = node(b.second.second).chain;
    if (a.second.first != b.second.first) return a.second.first < b.second.first;
    if (ca.size() != cb.size()) return ca.size() < cb.size();
    return a.first > b.first;
  });
  r.chain = node(best->second.second).chain;

  for (const auto& [id, n] : nodes_) {
    r.node_chains.push_back({id, n.chain.size(), block_digest(n.chain.tip()), verify_chain(n.chain)});
  }

  // Wire tap: payload-bearing messages must be well-formed envelopes and no
  // plaintext may appear verbatim in any message.
  std::uint64_t leaks = 0;
  for (const auto& m : captured_) {
    try {
      if (m.kind == MessageKind::UploadEnvelope) (void)decode_upload_envelope(m.payload);
      if (m.kind == MessageKind::ShareEnvelope) (void)decode_share_envelope(m.payload);
    } catch (const ChainError&) {
      ++leaks;
    }
    for (const auto& p : plaintexts_) {
      if (p.size() < 16 || m.payload.size() < p.size()) continue;
      if (std::search(m.payload.begin(), m.payload.end(), p.begin(), p.end()) != m.payload.end()) {
        ++leaks;
      }
    }
  }
  r.metrics.plaintext_leaks = leaks;

  r.faults = faults_;
  for (std::size_t i = 0; i < r.faults.size(); ++i) {
    auto& f = r.faults[i];
    if (!f.activated) continue;
    switch (f.spec.kind) {
      case FaultKind::ForgeRecord: {
        auto [lo, hi] = forged_digests_.equal_range(i);
        std::size_t total = 0, caught = 0, committed = 0;
        for (auto it = lo; it != hi; ++it) {
          ++total;
          for (const auto& q : quarantine_) {
            if (q.record.payload_digest == it->second) {
              ++caught;
              break;
            }
          }
          if (!trace(r.chain, it->second).empty()) ++committed;
        }
        f.detected = total > 0 && caught == total && committed == 0;
        f.detail = std::to_string(caught) + "/" + std::to_string(total) + " quarantined, " +
                   std::to_string(committed) + " committed";
        break;
      }
      case FaultKind::TamperChainCopy: {
        const auto target_violation = verify_chain(node(f.spec.target).chain);
        bool others_ok = true;
        for (const auto& [id, n] : nodes_) {
          if (id != f.spec.target && verify_chain(n.chain)) others_ok = false;
        }
        f.detected = target_violation && f.mutated_block &&
                     target_violation->index <= *f.mutated_block + 1 && others_ok;
        f.detail = "mutated block " + std::to_string(f.mutated_block.value_or(0)) +
                   (target_violation ? "; target violation at " +
                                           std::to_string(target_violation->index) + " (" +
                                           to_string(target_violation->kind) + ")"
                                     : "; target verifies clean") +
                   (others_ok ? "; other copies verify" : "; another copy fails");
        break;
      }
      case FaultKind::CrashNode: {
        const Tick up = crash_until_.count(f.spec.target) ? crash_until_.at(f.spec.target) : 0;
        const bool resumed = r.chain.tip().header.timestamp_tick > f.spec.at;
        f.detected = resumed;
        f.detail = "down until tick " + std::to_string(up) + "; rounds skipped " +
                   std::to_string(metrics_.rounds_skipped) +
                   (resumed ? "; chain advanced after crash" : "; chain did not advance");
        break;
      }
      case FaultKind::ByzantineValidator: {
        std::size_t dissents = 0;
        for (const auto& ev : ledger_.audit_log()) {
          if (ev.node_id == f.spec.target && ev.reason == CreditReason::ValidatorDissented) {
            ++dissents;
          }
        }
        f.detected = dissents > 0;
        f.detail = std::to_string(dissents) + " dissenting votes penalised; credit " +
                   std::to_string(ledger_.credit(f.spec.target));
        break;
      }
      case FaultKind::TamperInFlight:
      case FaultKind::FailStorageUnit:
        break;
    }
  }
  return r;
}

std::string metrics(const SimReport& report) {
  std::ostringstream os;
  const auto& m = report.metrics;
  const auto secs = report.final_tick * report.config.tick_length_seconds;
  os << "final_tick\t" << report.final_tick << "\t(" << secs / 60 << " min " << secs % 60
     << " s)\n";
  os << "initial_credit\t" << report.config.initial_credit << '\n';
  os << "chain_height\t" << (report.chain.size() - 1) << '\n';
  os << "blocks_committed\t" << m.blocks_committed << '\n';
  os << "blocks_rejected\t" << m.blocks_rejected << '\n';
  os << "blocks_abandoned\t" << m.blocks_abandoned << '\n';
  os << "rounds_skipped\t" << m.rounds_skipped << '\n';
  os << "records_committed\t" << m.records_committed << '\n';
  os << "records_quarantined\t" << m.records_quarantined << '\n';
  os << "uploads_requested\t" << m.uploads_requested << '\n';
  os << "uploads_denied\t" << m.uploads_denied << '\n';
  os << "uploads_rejected\t" << m.uploads_rejected << '\n';
  os << "uploads_skipped\t" << m.uploads_skipped << '\n';
  os << "uploads_retried\t" << m.uploads_retried << '\n';
  os << "shares_delivered\t" << m.shares_delivered << '\n';
  os << "shares_failed\t" << m.shares_failed << '\n';
  os << "messages_sent\t" << m.messages_sent << '\n';
  os << "messages_dropped\t" << m.messages_dropped << '\n';
  os << "plaintext_leaks\t" << m.plaintext_leaks << '\n';

  Credit lo = 0, hi = 0, sum = 0;
  bool first = true;
  for (const auto& [id, p] : report.profiles) {
    lo = first ? p.credit : std::min(lo, p.credit);
    hi = first ? p.credit : std::max(hi, p.credit);
    sum += p.credit;
    first = false;
  }
  os << "credit_min\t" << lo << '\n' << "credit_max\t" << hi << '\n';
  os << "credit_sum\t" << sum << '\n';
  for (const auto& [id, p] : report.profiles) {
    os << "credit\t" << id << '\t' << p.credit << '\t' << to_string(p.role) << '\n';
  }
  for (std::size_t i = 0; i < m.role_churn.size(); ++i) {
    os << "role_churn\tepoch=" << (i + 1) << '\t' << m.role_churn[i] << '\n';
  }
  std::map<std::string, std::pair<std::size_t, std::size_t>> rates;
  for (const auto& f : report.faults) {
    if (!f.activated) continue;
    auto& slot = rates[to_string(f.spec.kind)];
    ++slot.second;
    if (f.detected) ++slot.first;
  }
  for (const auto& [kind, rate] : rates) {
    os << "detection\t" << kind << '\t' << rate.first << '/' << rate.second << '\n';
  }
  for (const auto& [kind, count] : report.message_counts) {
    os << "messages\t" << kind << '\t' << count << '\n';
  }
  return os.str();
}

}  // namespace gridledger
