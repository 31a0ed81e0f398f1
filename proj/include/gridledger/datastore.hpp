#pragma once

// Replicated, content-addressed store for at-rest ciphertext.
//
// Objects are keyed by the digest of their plaintext and placed on
// `replication_factor` live units by rendezvous hashing. Units hold
// ciphertext only; nothing in here can read a payload.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridledger/crypto.hpp"

namespace gridledger {

using UnitId = std::uint32_t;

struct StoredObject {
  Digest payload_digest;
  Envelope ciphertext;  // sealed to the owner
  PublicKey owner_public_key;

  bool operator==(const StoredObject&) const = default;
};

struct StorageUnit {
  UnitId unit_id = 0;
  std::string region;
  bool alive = true;
  std::map<Digest, StoredObject> objects;
};

struct RepairReport {
  UnitId unit_id = 0;
  std::vector<Digest> restored;
  std::vector<Digest> unrecoverable;
};

struct ReplicaStatus {
  Digest payload_digest;
  std::size_t replication_factor = 0;
  std::size_t live_replicas = 0;
  bool under_replicated() const { return live_replicas < replication_factor; }
};

struct ReplicationReport {
  std::vector<ReplicaStatus> objects;  // ordered by digest
  std::size_t under_replicated_count() const;
};

class StoreError : public std::runtime_error {
 public:
  enum class Kind { InsufficientUnits, UnknownUnit, DuplicateUnit, BadReplicationFactor, Format };

  StoreError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class Datastore {
 public:
  void add_unit(UnitId id, std::string region);

  std::vector<UnitId> put(const StoredObject& object, std::size_t replication_factor);
  std::optional<StoredObject> get(const Digest& payload_digest) const;

  void fail_unit(UnitId id);
  RepairReport recover_unit(UnitId id);
  ReplicationReport audit() const;

  const std::map<UnitId, StorageUnit>& units() const { return units_; }
  std::optional<std::vector<UnitId>> placement(const Digest& payload_digest) const;

  // Directory of `objects/<digest>.obj` files plus `placement.txt` and
  // `units.txt` manifests.
  void dump(const std::filesystem::path& dir) const;
  static Datastore load(const std::filesystem::path& dir);

 private:
  struct PlacementEntry {
    std::size_t replication_factor = 0;
    std::vector<UnitId> units;
  };

  StorageUnit& unit(UnitId id);
  std::size_t live_replicas(const Digest& d, const PlacementEntry& entry) const;

  std::map<UnitId, StorageUnit> units_;
  std::map<Digest, PlacementEntry> placement_;
};

// Highest-random-weight choice of `count` units from `candidates`.
std::vector<UnitId> rendezvous_placement(const Digest& key, const std::vector<UnitId>& candidates,
                                         std::size_t count);

}  // namespace gridledger
