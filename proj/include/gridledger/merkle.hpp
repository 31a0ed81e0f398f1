#pragma once

// Binary Merkle tree over an ordered list of leaf digests.
//
// Conventions (pinned by tests/fixtures/merkle_roots.txt):
//   - interior node = SHA-256(0x01 || left || right)
//   - an odd node at any level is paired with itself
//   - one leaf: the root is the leaf
//   - no leaves: the root is SHA-256 of the empty string
// Leaves are taken as given. Callers hashing records into leaves use the 0x00
// prefix (see chain.hpp) so a leaf can never be confused with an interior node.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gridledger/crypto.hpp"

namespace gridledger::merkle {

inline constexpr std::uint8_t kLeafPrefix = 0x00;
inline constexpr std::uint8_t kInteriorPrefix = 0x01;

Digest hash_interior(const Digest& left, const Digest& right);
Digest empty_root();

enum class Side : std::uint8_t { Left = 0, Right = 1 };

struct ProofStep {
  Digest sibling;
  Side side;  // where the sibling sits relative to the running hash

  bool operator==(const ProofStep&) const = default;
};

struct InclusionProof {
  std::size_t leaf_index = 0;
  std::vector<ProofStep> path;

  bool operator==(const InclusionProof&) const = default;
};

class MerkleTree {
 public:
  explicit MerkleTree(std::vector<Digest> leaves);

  const std::vector<Digest>& leaves() const { return levels_.front(); }
  // levels()[0] are the leaves; levels().back() holds the single root.
  const std::vector<std::vector<Digest>>& levels() const { return levels_; }
  std::size_t height() const { return levels_.size() - 1; }
  Digest root() const;

 private:
  std::vector<std::vector<Digest>> levels_;
};

MerkleTree build_tree(std::vector<Digest> leaf_digests);

// Throws std::out_of_range if index >= leaf count.
InclusionProof prove_inclusion(const MerkleTree& tree, std::size_t index);

bool verify_inclusion(const Digest& root, const Digest& leaf, const InclusionProof& proof);

}  // namespace gridledger::merkle
