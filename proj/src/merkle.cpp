#include "gridledger/merkle.hpp"

#include <string>

namespace gridledger::merkle {

Digest hash_interior(const Digest& left, const Digest& right) {
  std::array<std::uint8_t, 1 + 2 * Digest::kSize> buf{};
  buf[0] = kInteriorPrefix;
  std::copy(left.value.begin(), left.value.end(), buf.begin() + 1);
  std::copy(right.value.begin(), right.value.end(), buf.begin() + 1 + Digest::kSize);
  return digest(ByteView{buf.data(), buf.size()});
}

Digest empty_root() { return digest(ByteView{}); }

MerkleTree::MerkleTree(std::vector<Digest> leaves) {
  levels_.push_back(std::move(leaves));
  while (levels_.back().size() > 1) {
    const auto& below = levels_.back();
    std::vector<Digest> next;
    next.reserve((below.size() + 1) / 2);
    for (std::size_t i = 0; i < below.size(); i += 2) {
      const Digest& left = below[i];
      const Digest& right = i + 1 < below.size() ? below[i + 1] : below[i];
      next.push_back(hash_interior(left, right));
    }
    levels_.push_back(std::move(next));
  }
}

Digest MerkleTree::root() const {
  if (levels_.front().empty()) {
    return empty_root();
  }
  return levels_.back().front();
}

MerkleTree build_tree(std::vector<Digest> leaf_digests) {
  return MerkleTree(std::move(leaf_digests));
}

InclusionProof prove_inclusion(const MerkleTree& tree, std::size_t index) {
  if (index >= tree.leaves().size()) {
    throw std::out_of_range("leaf index " + std::to_string(index) + " out of range for " +
                            std::to_string(tree.leaves().size()) + " leaves");
  }
  InclusionProof proof;
  proof.leaf_index = index;
  std::size_t pos = index;
  for (std::size_t level = 0; level < tree.height(); ++level) {
    const auto& nodes = tree.levels()[level];
    if (pos % 2 == 0) {
      const Digest& sib = pos + 1 < nodes.size() ? nodes[pos + 1] : nodes[pos];
      proof.path.push_back({sib, Side::Right});
    } else {
      proof.path.push_back({nodes[pos - 1], Side::Left});
    }
    pos /= 2;
  }
  return proof;
}

bool verify_inclusion(const Digest& root, const Digest& leaf, const InclusionProof& proof) {
  // The side flags must spell out the claimed index, otherwise a proof for
  // one position could be replayed at another.
  if (proof.path.size() < sizeof(std::size_t) * 8 &&
      (proof.leaf_index >> proof.path.size()) != 0) {
    return false;
  }
  Digest running = leaf;
  std::size_t pos = proof.leaf_index;
  for (const auto& step : proof.path) {
    const bool odd = (pos & 1) != 0;
    if (odd != (step.side == Side::Left)) {
      return false;
    }
    running = odd ? hash_interior(step.sibling, running) : hash_interior(running, step.sibling);
    pos >>= 1;
  }
  return running == root;
}

}  // namespace gridledger::merkle
