#pragma once

// A six-node desk network (3 recorders, 1 supervisor, 2 candidates) with a
// ledger, permissions, and five storage units, for protocol-level tests.

#include <map>

#include "chain_fixtures.hpp"
#include "gridledger/record_protocol.hpp"

namespace fixtures {

struct Desk {
  std::map<gridledger::NodeId, gridledger::Keypair> keys;
  gridledger::CreditLedger ledger;
  gridledger::RoleAssignment roles;
  gridledger::PermissionList permissions;
  gridledger::Datastore datastore;
  gridledger::Chain chain;
  gridledger::DeterministicRng rng{99};

  Desk() {
    using namespace gridledger;
    std::vector<NodeProfile> profiles;
    for (NodeId id = 1; id <= 6; ++id) {
      keys[id] = key("node" + std::to_string(id));
      profiles.push_back({id, keys[id].public_key, 0, Role::Candidate, 100 - id});
      permissions.authorize(keys[id].public_key);
    }
    roles = initialize_roles(profiles, CommitteeConfig{3, 1, 0});
    ledger = CreditLedger(profiles, 0);
    ledger.set_roles(roles);
    for (UnitId u = 0; u < 5; ++u) datastore.add_unit(u, "region-" + std::to_string(u));
    chain.blocks.push_back(genesis({}));
  }

  gridledger::ReceiveContext context(gridledger::Tick tick = 10) {
    return gridledger::ReceiveContext{permissions, ledger, datastore, 3, tick,
                                      gridledger::derive_seed({}, "reseal")};
  }

  gridledger::Seed entropy(const std::string& label) { return gridledger::derive_seed({}, label); }
};

}  // namespace fixtures
