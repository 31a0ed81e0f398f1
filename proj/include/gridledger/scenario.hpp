#pragma once

// Line-oriented scenario files.
//
//   # comment
//   config <key> <value>
//   node <id> assessment <n>
//   authorize <id>
//   upload <id> <class> <size> at <tick>
//   share <from> <to> <digest-ref> at <tick>
//   fault <kind> <target> at <tick> [key=value ...]
//   run until <tick>
//
// <digest-ref> is either `upload:<n>` (the n-th upload directive, 1-based) or
// a 64-character hex digest. Fault kinds: forge-record, tamper-chain-copy,
// tamper-in-flight, crash-node, byzantine-validator, fail-storage-unit.
// Fault parameters:
//   forge-record        count=<n> class=<label> size=<bytes>
//   tamper-chain-copy   block=<index>
//   crash-node          duration=<ticks>   (default: one block interval)
//   fail-storage-unit   duration=<ticks>   (default: stays failed)

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gridledger/chain.hpp"
#include "gridledger/credit.hpp"

namespace gridledger {

struct NodeSpec {
  NodeId id = 0;
  std::uint64_t assessment = 0;
};

struct UploadSpec {
  NodeId node = 0;
  std::string data_class;
  std::size_t size = 0;
  Tick at = 0;
};

struct UploadRef {
  std::size_t index = 0;  // 1-based
};

using DigestRef = std::variant<UploadRef, Digest>;

struct ShareSpec {
  NodeId from = 0;
  NodeId to = 0;
  DigestRef ref;
  Tick at = 0;
};

enum class FaultKind {
  ForgeRecord,
  TamperChainCopy,
  TamperInFlight,
  CrashNode,
  ByzantineValidator,
  FailStorageUnit,
};

std::string to_string(FaultKind kind);
std::optional<FaultKind> parse_fault_kind(std::string_view text);

struct FaultSpec {
  FaultKind kind = FaultKind::CrashNode;
  std::uint32_t target = 0;  // node id, or unit id for fail-storage-unit
  Tick at = 0;
  std::map<std::string, std::string> params;

  std::optional<std::uint64_t> param_u64(const std::string& key) const;
};

struct Scenario {
  std::map<std::string, std::string> config;
  std::vector<NodeSpec> nodes;
  std::vector<NodeId> authorized;
  std::vector<UploadSpec> uploads;
  std::vector<ShareSpec> shares;
  std::vector<FaultSpec> faults;
  std::optional<Tick> run_until;
};

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Throws ScenarioError carrying the offending line number.
Scenario parse_scenario(std::string_view text);

}  // namespace gridledger
