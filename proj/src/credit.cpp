#include "gridledger/credit.hpp"

#include <algorithm>
#include <sstream>

namespace gridledger {

namespace {

template <typename Key>
RoleAssignment partition(std::vector<NodeId> ids, Key key, const CommitteeConfig& config) {
  std::stable_sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) {
    const auto ka = key(a);
    const auto kb = key(b);
    if (ka != kb) return ka > kb;
    return a < b;
  });
  RoleAssignment out;
  const std::size_t nr = std::min(config.max_recorders, ids.size());
  const std::size_t ns = std::min(config.max_supervisors, ids.size() - nr);
  out.recorders.assign(ids.begin(), ids.begin() + nr);
  out.supervisors.assign(ids.begin() + nr, ids.begin() + nr + ns);
  out.candidates.assign(ids.begin() + nr + ns, ids.end());
  return out;
}

}  // namespace

std::string to_string(Role role) {
  switch (role) {
    case Role::Recorder:
      return "recorder";
    case Role::Supervisor:
      return "supervisor";
    case Role::Candidate:
      return "candidate";
  }
  return "unknown";
}

std::string to_string(CreditReason reason) {
  switch (reason) {
    case CreditReason::RecordCorrect:
      return "record-correct";
    case CreditReason::RecordErroneous:
      return "record-erroneous";
    case CreditReason::BlockClean:
      return "block-clean";
    case CreditReason::BlockErroneous:
      return "block-erroneous";
    case CreditReason::ValidatorAgreed:
      return "validator-agreed";
    case CreditReason::ValidatorDissented:
      return "validator-dissented";
  }
  return "unknown";
}

std::optional<CreditReason> parse_credit_reason(std::string_view text) {
  for (auto r : {CreditReason::RecordCorrect, CreditReason::RecordErroneous,
                 CreditReason::BlockClean, CreditReason::BlockErroneous,
                 CreditReason::ValidatorAgreed, CreditReason::ValidatorDissented}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

std::string to_string(Verdict verdict) { return verdict == Verdict::Ok ? "ok" : "erroneous"; }

Role RoleAssignment::role_of(NodeId id) const {
  if (std::find(recorders.begin(), recorders.end(), id) != recorders.end()) return Role::Recorder;
  if (std::find(supervisors.begin(), supervisors.end(), id) != supervisors.end()) {
    return Role::Supervisor;
  }
  return Role::Candidate;
}

CreditLedger::CreditLedger(std::vector<NodeProfile> profiles, Credit initial_credit)
    : initial_credit_(initial_credit) {
  for (auto& p : profiles) {
    p.credit = initial_credit;
    const auto id = p.node_id;
    if (!profiles_.emplace(id, std::move(p)).second) {
      throw CreditError("duplicate node_id " + std::to_string(id));
    }
  }
}

const NodeProfile& CreditLedger::profile(NodeId id) const {
  auto it = profiles_.find(id);
  if (it == profiles_.end()) {
    throw CreditError("unknown node " + std::to_string(id));
  }
  return it->second;
}

NodeProfile& CreditLedger::mutable_profile(NodeId id) {
  return const_cast<NodeProfile&>(std::as_const(*this).profile(id));
}

std::optional<NodeId> CreditLedger::find_by_key(const PublicKey& key) const {
  for (const auto& [id, p] : profiles_) {
    if (p.public_key == key) return id;
  }
  return std::nullopt;
}

CreditEvent CreditLedger::record(NodeId id, int delta, CreditReason reason, Tick tick) {
  mutable_profile(id).credit += delta;
  CreditEvent ev{id, delta, reason, tick};
  log_.push_back(ev);
  return ev;
}

CreditEvent CreditLedger::apply_record_outcome(NodeId uploader, bool correct, Tick tick) {
  return correct ? record(uploader, +1, CreditReason::RecordCorrect, tick)
                 : record(uploader, -1, CreditReason::RecordErroneous, tick);
}

CreditEvent CreditLedger::apply_block_outcome(NodeId recorder, bool erroneous, Tick tick) {
  return erroneous ? record(recorder, -1, CreditReason::BlockErroneous, tick)
                   : record(recorder, +1, CreditReason::BlockClean, tick);
}

ValidatorOutcome CreditLedger::apply_validator_outcomes(const std::vector<ValidatorVote>& votes,
                                                        Tick tick) {
  if (votes.empty() || votes.size() % 2 == 0) {
    throw CreditError("validator vote set must be odd and non-empty, got " +
                      std::to_string(votes.size()));
  }
  for (const auto& v : votes) (void)profile(v.validator_id);

  const auto ok = std::count_if(votes.begin(), votes.end(),
                                [](const ValidatorVote& v) { return v.verdict == Verdict::Ok; });
  ValidatorOutcome out;
  out.majority = static_cast<std::size_t>(ok) * 2 > votes.size() ? Verdict::Ok : Verdict::Erroneous;
  for (const auto& v : votes) {
    out.events.push_back(v.verdict == out.majority
                             ? record(v.validator_id, +1, CreditReason::ValidatorAgreed, tick)
                             : record(v.validator_id, -1, CreditReason::ValidatorDissented, tick));
  }
  return out;
}

void CreditLedger::set_roles(const RoleAssignment& assignment) {
  for (auto& [id, p] : profiles_) p.role = assignment.role_of(id);
}

RoleAssignment initialize_roles(const std::vector<NodeProfile>& profiles,
                                const CommitteeConfig& config) {
  if (config.max_recorders < 1) {
    throw CreditError("at least one recorder seat is required");
  }
  if (profiles.empty()) {
    throw CreditError("cannot assign roles without nodes");
  }
  std::map<NodeId, std::uint64_t> assessment;
  std::vector<NodeId> ids;
  for (const auto& p : profiles) {
    if (!assessment.emplace(p.node_id, p.assessment).second) {
      throw CreditError("duplicate node_id " + std::to_string(p.node_id));
    }
    ids.push_back(p.node_id);
  }
  return partition(std::move(ids), [&](NodeId id) { return assessment.at(id); }, config);
}

RoleAssignment reelect(const CreditLedger& ledger, const RoleAssignment& assignment,
                       const CommitteeConfig& config) {
  std::vector<NodeId> ids;
  ids.insert(ids.end(), assignment.recorders.begin(), assignment.recorders.end());
  ids.insert(ids.end(), assignment.supervisors.begin(), assignment.supervisors.end());
  ids.insert(ids.end(), assignment.candidates.begin(), assignment.candidates.end());
  auto out = partition(std::move(ids), [&](NodeId id) { return ledger.credit(id); }, config);
  out.epoch = assignment.epoch + 1;
  return out;
}

NodeId duty_recorder(const RoleAssignment& assignment, std::uint64_t round) {
  if (assignment.recorders.empty()) {
    throw CreditError("no recorders assigned");
  }
  return assignment.recorders[round % assignment.recorders.size()];
}

std::optional<NodeId> duty_supervisor(const RoleAssignment& assignment, std::uint64_t round) {
  if (assignment.supervisors.empty()) return std::nullopt;
  return assignment.supervisors[round % assignment.supervisors.size()];
}

std::map<NodeId, Credit> replay_credits(const std::vector<NodeId>& nodes, Credit initial,
                                        const std::vector<CreditEvent>& log) {
  std::map<NodeId, Credit> out;
  for (auto id : nodes) out[id] = initial;
  for (const auto& ev : log) out[ev.node_id] += ev.delta;
  return out;
}

std::string export_audit_log(const std::vector<CreditEvent>& log) {
  std::ostringstream os;
  for (const auto& ev : log) {
    os << ev.tick << '\t' << ev.node_id << '\t' << (ev.delta > 0 ? "+1" : "-1") << '\t'
       << to_string(ev.reason) << '\n';
  }
  return os.str();
}

std::vector<CreditEvent> parse_audit_log(std::string_view text) {
  std::vector<CreditEvent> out;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tick, node, delta, reason;
    if (!std::getline(ls, tick, '\t') || !std::getline(ls, node, '\t') ||
        !std::getline(ls, delta, '\t') || !std::getline(ls, reason)) {
      throw CreditError("audit log line " + std::to_string(line_no) + ": expected 4 fields");
    }
    auto parsed = parse_credit_reason(reason);
    if (!parsed || (delta != "+1" && delta != "-1")) {
      throw CreditError("audit log line " + std::to_string(line_no) + ": bad delta or reason");
    }
    try {
      out.push_back({static_cast<NodeId>(std::stoul(node)), delta == "+1" ? 1 : -1, *parsed,
                     std::stoull(tick)});
    } catch (const std::exception&) {
      throw CreditError("audit log line " + std::to_string(line_no) + ": bad number");
    }
  }
  return out;
}

}  // namespace gridledger
