#include "gridledger/datastore.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gridledger {

namespace {

std::uint64_t rendezvous_weight(const Digest& key, UnitId unit) {
  ByteWriter w;
  w.raw(key.view());
  w.u32(unit);
  const auto h = digest(w.bytes());
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | h.value[i];
  return v;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    throw StoreError(StoreError::Kind::Format, "cannot read " + p.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<UnitId> parse_unit_list(const std::string& s) {
  std::vector<UnitId> out;
  if (s == "-") return out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(static_cast<UnitId>(std::stoul(item)));
  return out;
}

std::string join_units(const std::vector<UnitId>& ids) {
  if (ids.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

}  // namespace

std::size_t ReplicationReport::under_replicated_count() const {
  return static_cast<std::size_t>(std::count_if(
      objects.begin(), objects.end(), [](const ReplicaStatus& s) { return s.under_replicated(); }));
}

std::vector<UnitId> rendezvous_placement(const Digest& key, const std::vector<UnitId>& candidates,
                                         std::size_t count) {
  std::vector<std::pair<std::uint64_t, UnitId>> scored;
  for (auto id : candidates) scored.emplace_back(rendezvous_weight(key, id), id);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<UnitId> out;
  for (std::size_t i = 0; i < std::min(count, scored.size()); ++i) out.push_back(scored[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

void Datastore::add_unit(UnitId id, std::string region) {
  StorageUnit u;
  u.unit_id = id;
  u.region = std::move(region);
  if (!units_.emplace(id, std::move(u)).second) {
    throw StoreError(StoreError::Kind::DuplicateUnit, "unit " + std::to_string(id) + " exists");
  }
}

StorageUnit& Datastore::unit(UnitId id) {
  auto it = units_.find(id);
  if (it == units_.end()) {
    throw StoreError(StoreError::Kind::UnknownUnit, "unknown storage unit " + std::to_string(id));
  }
  return it->second;
}

std::vector<UnitId> Datastore::put(const StoredObject& object, std::size_t replication_factor) {
  if (replication_factor < 1) {
    throw StoreError(StoreError::Kind::BadReplicationFactor, "replication factor must be >= 1");
  }
  std::vector<UnitId> live;
  for (const auto& [id, u] : units_) {
    if (u.alive) live.push_back(id);
  }
  if (live.size() < replication_factor) {
    throw StoreError(StoreError::Kind::InsufficientUnits,
                     "need " + std::to_string(replication_factor) + " live units, have " +
                         std::to_string(live.size()));
  }
  auto chosen = rendezvous_placement(object.payload_digest, live, replication_factor);
  for (auto id : chosen) {
    units_.at(id).objects.insert_or_assign(object.payload_digest, object);
  }
  placement_[object.payload_digest] = PlacementEntry{replication_factor, chosen};
  return chosen;
}

std::optional<StoredObject> Datastore::get(const Digest& payload_digest) const {
  for (const auto& [id, u] : units_) {
    if (!u.alive) continue;
    if (auto it = u.objects.find(payload_digest); it != u.objects.end()) return it->second;
  }
  return std::nullopt;
}

void Datastore::fail_unit(UnitId id) {
  auto& u = unit(id);
  u.alive = false;
  u.objects.clear();
}

RepairReport Datastore::recover_unit(UnitId id) {
  auto& target = unit(id);
  RepairReport report;
  report.unit_id = id;
  if (target.alive) return report;
  target.alive = true;
  for (const auto& [d, entry] : placement_) {
    if (std::find(entry.units.begin(), entry.units.end(), id) == entry.units.end()) continue;
    std::optional<StoredObject> source;
    for (const auto& [uid, u] : units_) {
      if (uid == id || !u.alive) continue;
      if (auto it = u.objects.find(d); it != u.objects.end()) {
        source = it->second;
        break;
      }
    }
    if (source) {
      target.objects.insert_or_assign(d, *source);
      report.restored.push_back(d);
    } else {
      report.unrecoverable.push_back(d);
    }
  }
  return report;
}

std::size_t Datastore::live_replicas(const Digest& d, const PlacementEntry& entry) const {
  std::size_t n = 0;
  for (auto uid : entry.units) {
    const auto& u = units_.at(uid);
    if (u.alive && u.objects.count(d)) ++n;
  }
  return n;
}

ReplicationReport Datastore::audit() const {
  ReplicationReport report;
  for (const auto& [d, entry] : placement_) {
    report.objects.push_back({d, entry.replication_factor, live_replicas(d, entry)});
  }
  return report;
}

std::optional<std::vector<UnitId>> Datastore::placement(const Digest& payload_digest) const {
  auto it = placement_.find(payload_digest);
  if (it == placement_.end()) return std::nullopt;
  return it->second.units;
}

void Datastore::dump(const std::filesystem::path& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "objects");
  std::map<Digest, const StoredObject*> any_copy;
  for (const auto& [uid, u] : units_) {
    for (const auto& [d, obj] : u.objects) any_copy.emplace(d, &obj);
  }
  for (const auto& [d, obj] : any_copy) {
    std::ofstream out(dir / "objects" / (d.hex() + ".obj"), std::ios::binary);
    out << "owner " << obj->owner_public_key.hex() << '\n'
        << "envelope " << to_hex(encode_envelope(obj->ciphertext)) << '\n';
  }
  std::ofstream units(dir / "units.txt", std::ios::binary);
  for (const auto& [uid, u] : units_) {
    units << uid << '\t' << u.region << '\t' << (u.alive ? "alive" : "failed") << '\n';
  }
  std::ofstream manifest(dir / "placement.txt", std::ios::binary);
  for (const auto& [d, entry] : placement_) {
    std::vector<UnitId> holders;
    for (auto uid : entry.units) {
      if (units_.at(uid).objects.count(d)) holders.push_back(uid);
    }
    manifest << d.hex() << '\t' << entry.replication_factor << '\t' << join_units(entry.units)
             << '\t' << join_units(holders) << '\n';
  }
}

Datastore Datastore::load(const std::filesystem::path& dir) {
  Datastore store;
  try {
    std::istringstream units(read_file(dir / "units.txt"));
    std::string line;
    while (std::getline(units, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string id, region, state;
      std::getline(ls, id, '\t');
      std::getline(ls, region, '\t');
      std::getline(ls, state);
      const auto uid = static_cast<UnitId>(std::stoul(id));
      store.add_unit(uid, region);
      store.units_.at(uid).alive = state == "alive";
    }
    std::istringstream manifest(read_file(dir / "placement.txt"));
    while (std::getline(manifest, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string dhex, rf, placed, held;
      std::getline(ls, dhex, '\t');
      std::getline(ls, rf, '\t');
      std::getline(ls, placed, '\t');
      std::getline(ls, held);
      const auto d = Digest::from_hex(dhex);
      store.placement_[d] = PlacementEntry{std::stoul(rf), parse_unit_list(placed)};
      const auto holders = parse_unit_list(held);
      if (holders.empty()) continue;

      std::istringstream obj(read_file(dir / "objects" / (dhex + ".obj")));
      std::string tag, owner_hex, env_tag, env_hex;
      obj >> tag >> owner_hex >> env_tag >> env_hex;
      if (tag != "owner" || env_tag != "envelope") {
        throw StoreError(StoreError::Kind::Format, "object file for " + dhex + " is malformed");
      }
      StoredObject so{d, decode_envelope(from_hex(env_hex)), PublicKey::from_hex(owner_hex)};
      for (auto uid : holders) store.unit(uid).objects.insert_or_assign(d, so);
    }
  } catch (const StoreError&) {
    throw;
  } catch (const std::exception& e) {
    throw StoreError(StoreError::Kind::Format, std::string("datastore dump: ") + e.what());
  }
  return store;
}

}  // namespace gridledger
