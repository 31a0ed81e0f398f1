#include "gridledger/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace gridledger {

namespace {

const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys = {
      "seed",          "max_recorders",      "max_supervisors",    "block_interval_ticks",
      "epoch_length_blocks", "replication_factor", "tick_length_seconds", "storage_units",
      "message_delay", "initial_credit",     "network_id"};
  return keys;
}

std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> words;
  std::istringstream is{std::string(line)};
  std::string w;
  while (is >> w) words.push_back(w);
  return words;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line, std::string_view what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ScenarioError(line, "expected non-negative integer for " + std::string(what) +
                                  ", got '" + s + "'");
  }
  return v;
}

NodeId parse_node(const std::string& s, std::size_t line) {
  const auto v = parse_u64(s, line, "node id");
  if (v > UINT32_MAX) throw ScenarioError(line, "node id out of range");
  return static_cast<NodeId>(v);
}

void expect(bool cond, std::size_t line, const std::string& usage) {
  if (!cond) throw ScenarioError(line, "malformed directive, expected: " + usage);
}

}  // namespace

std::string to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::ForgeRecord:
      return "forge-record";
    case FaultKind::TamperChainCopy:
      return "tamper-chain-copy";
    case FaultKind::TamperInFlight:
      return "tamper-in-flight";
    case FaultKind::CrashNode:
      return "crash-node";
    case FaultKind::ByzantineValidator:
      return "byzantine-validator";
    case FaultKind::FailStorageUnit:
      return "fail-storage-unit";
  }
  return "unknown";
}

std::optional<FaultKind> parse_fault_kind(std::string_view text) {
  for (auto k : {FaultKind::ForgeRecord, FaultKind::TamperChainCopy, FaultKind::TamperInFlight,
                 FaultKind::CrashNode, FaultKind::ByzantineValidator, FaultKind::FailStorageUnit}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::optional<std::uint64_t> FaultSpec::param_u64(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) return std::nullopt;
  return std::stoull(it->second);
}

namespace {

bool fault_param_allowed(FaultKind kind, const std::string& key) {
  switch (kind) {
    case FaultKind::ForgeRecord:
      return key == "count" || key == "class" || key == "size";
    case FaultKind::TamperChainCopy:
      return key == "block";
    case FaultKind::CrashNode:
    case FaultKind::FailStorageUnit:
      return key == "duration";
    case FaultKind::TamperInFlight:
    case FaultKind::ByzantineValidator:
      return false;
  }
  return false;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  Scenario sc;
  std::map<NodeId, std::size_t> declared;
  struct Ref {
    NodeId id;
    std::size_t line;
  };
  std::vector<Ref> node_refs;
  std::vector<std::pair<std::size_t, std::size_t>> upload_refs;  // (index, line)

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto w = split_words(line);
    if (w.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    const auto& cmd = w[0];
    if (cmd == "config") {
      expect(w.size() == 3, line_no, "config <key> <value>");
      if (!config_keys().count(w[1])) {
        throw ScenarioError(line_no, "unknown config key '" + w[1] + "'");
      }
      if (w[1] != "network_id") (void)parse_u64(w[2], line_no, w[1]);
      sc.config[w[1]] = w[2];
    } else if (cmd == "node") {
      expect(w.size() == 4 && w[2] == "assessment", line_no, "node <id> assessment <n>");
      NodeSpec n{parse_node(w[1], line_no), parse_u64(w[3], line_no, "assessment")};
      if (!declared.emplace(n.id, line_no).second) {
        throw ScenarioError(line_no, "node " + w[1] + " declared twice");
      }
      sc.nodes.push_back(n);
    } else if (cmd == "authorize") {
      expect(w.size() == 2, line_no, "authorize <id>");
      const auto id = parse_node(w[1], line_no);
      sc.authorized.push_back(id);
      node_refs.push_back({id, line_no});
    } else if (cmd == "upload") {
      expect(w.size() == 6 && w[4] == "at", line_no, "upload <id> <class> <size> at <tick>");
      UploadSpec u{parse_node(w[1], line_no), w[2], parse_u64(w[3], line_no, "size"),
                   parse_u64(w[5], line_no, "tick")};
      if (u.data_class.size() > kMaxDataClassBytes) {
        throw ScenarioError(line_no, "data class longer than " +
                                         std::to_string(kMaxDataClassBytes) + " bytes");
      }
      node_refs.push_back({u.node, line_no});
      sc.uploads.push_back(std::move(u));
    } else if (cmd == "share") {
      expect(w.size() == 6 && w[4] == "at", line_no, "share <from> <to> <digest-ref> at <tick>");
      ShareSpec s;
      s.from = parse_node(w[1], line_no);
      s.to = parse_node(w[2], line_no);
      s.at = parse_u64(w[5], line_no, "tick");
      const auto& ref = w[3];
      if (ref.rfind("upload:", 0) == 0) {
        const auto idx = parse_u64(ref.substr(7), line_no, "upload reference");
        s.ref = UploadRef{idx};
        upload_refs.emplace_back(idx, line_no);
      } else {
        try {
          s.ref = Digest::from_hex(ref);
        } catch (const std::exception&) {
          throw ScenarioError(line_no, "digest reference must be upload:<n> or 64 hex characters");
        }
      }
      node_refs.push_back({s.from, line_no});
      node_refs.push_back({s.to, line_no});
      sc.shares.push_back(std::move(s));
    } else if (cmd == "fault") {
      expect(w.size() >= 5 && w[3] == "at", line_no,
             "fault <kind> <target> at <tick> [key=value ...]");
      auto kind = parse_fault_kind(w[1]);
      if (!kind) throw ScenarioError(line_no, "unknown fault kind '" + w[1] + "'");
      FaultSpec f;
      f.kind = *kind;
      f.target = parse_node(w[2], line_no);
      f.at = parse_u64(w[4], line_no, "tick");
      for (std::size_t i = 5; i < w.size(); ++i) {
        auto eq = w[i].find('=');
        expect(eq != std::string::npos && eq > 0, line_no, "fault parameter key=value");
        const auto key = w[i].substr(0, eq);
        const auto value = w[i].substr(eq + 1);
        if (!fault_param_allowed(f.kind, key)) {
          throw ScenarioError(line_no, "fault " + w[1] + " takes no parameter '" + key + "'");
        }
        if (key != "class") (void)parse_u64(value, line_no, key);
        f.params[key] = value;
      }
      if (f.kind != FaultKind::FailStorageUnit) node_refs.push_back({f.target, line_no});
      sc.faults.push_back(std::move(f));
    } else if (cmd == "run") {
      expect(w.size() == 3 && w[1] == "until", line_no, "run until <tick>");
      sc.run_until = parse_u64(w[2], line_no, "tick");
    } else {
      throw ScenarioError(line_no, "unknown directive '" + cmd + "'");
    }
    if (nl == text.size()) break;
  }

  for (const auto& r : node_refs) {
    if (!declared.count(r.id)) {
      throw ScenarioError(r.line, "node " + std::to_string(r.id) + " is not declared");
    }
  }
  for (const auto& [idx, line] : upload_refs) {
    if (idx == 0 || idx > sc.uploads.size()) {
      throw ScenarioError(line, "upload:" + std::to_string(idx) + " does not name an upload");
    }
  }
  return sc;
}

}  // namespace gridledger
