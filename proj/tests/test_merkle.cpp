#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "gridledger/merkle.hpp"
#include "merkle_oracle.hpp"

using namespace gridledger;
using namespace gridledger::merkle;

namespace {

std::vector<Digest> byte_leaves(std::size_t n) {
  std::vector<Digest> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t b = static_cast<std::uint8_t>(i);
    out.push_back(digest(ByteView(&b, 1)));
  }
  return out;
}

std::vector<Digest> random_leaves(std::size_t n, std::mt19937_64& gen) {
  std::vector<Digest> out(n);
  for (auto& d : out) {
    for (auto& b : d.value) b = static_cast<std::uint8_t>(gen());
  }
  return out;
}

}  // namespace

// Roots produced by a separate Python implementation.
TEST(MerkleRoot, MatchesGoldenFixture) {
  std::ifstream in(std::string(GRIDLEDGER_FIXTURES) + "/merkle_roots.txt");
  ASSERT_TRUE(in);
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::size_t n = 0;
    std::string hex;
    fields >> n >> hex;
    EXPECT_EQ(build_tree(byte_leaves(n)).root().hex(), hex) << "n=" << n;
    ++checked;
  }
  EXPECT_GE(checked, 10);
}

TEST(MerkleRoot, EmptyAndSingle) {
  EXPECT_EQ(build_tree({}).root(), digest(std::string_view("")));
  EXPECT_EQ(empty_root(), digest(std::string_view("")));
  const auto leaves = byte_leaves(1);
  EXPECT_EQ(build_tree(leaves).root(), leaves[0]);
  EXPECT_EQ(build_tree(leaves).height(), 0u);
}

TEST(MerkleRoot, OddNodeIsPairedWithItself) {
  const auto l = byte_leaves(3);
  const auto expected = hash_interior(hash_interior(l[0], l[1]), hash_interior(l[2], l[2]));
  EXPECT_EQ(build_tree(l).root(), expected);
}

TEST(MerkleRoot, AgreesWithTopDownOracle) {
  std::mt19937_64 gen(11);
  for (std::size_t n = 0; n <= 40; ++n) {
    const auto leaves = random_leaves(n, gen);
    EXPECT_EQ(build_tree(leaves).root(), oracle::merkle_root(leaves)) << "n=" << n;
  }
}

TEST(MerkleRoot, OrderMatters) {
  auto l = byte_leaves(4);
  const auto a = build_tree(l).root();
  std::swap(l[1], l[2]);
  EXPECT_NE(build_tree(l).root(), a);
}

TEST(InclusionProof, EveryLeafVerifies) {
  std::mt19937_64 gen(5);
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 13u}) {
    const auto leaves = random_leaves(n, gen);
    const auto tree = build_tree(leaves);
    for (std::size_t i = 0; i < n; ++i) {
      const auto proof = prove_inclusion(tree, i);
      EXPECT_TRUE(verify_inclusion(tree.root(), leaves[i], proof)) << n << "/" << i;
    }
  }
}

TEST(InclusionProof, PerturbationsFail) {
  const auto leaves = byte_leaves(6);
  const auto tree = build_tree(leaves);
  const auto proof = prove_inclusion(tree, 4);
  ASSERT_TRUE(verify_inclusion(tree.root(), leaves[4], proof));

  EXPECT_FALSE(verify_inclusion(tree.root(), leaves[3], proof));
  auto bad_sibling = proof;
  bad_sibling.path[0].sibling.value[0] ^= 1;
  EXPECT_FALSE(verify_inclusion(tree.root(), leaves[4], bad_sibling));
  auto bad_side = proof;
  bad_side.path[1].side = bad_side.path[1].side == Side::Left ? Side::Right : Side::Left;
  EXPECT_FALSE(verify_inclusion(tree.root(), leaves[4], bad_side));
  auto bad_index = proof;
  bad_index.leaf_index = 5;
  EXPECT_FALSE(verify_inclusion(tree.root(), leaves[4], bad_index));
  auto short_path = proof;
  short_path.path.pop_back();
  EXPECT_FALSE(verify_inclusion(tree.root(), leaves[4], short_path));
}

TEST(InclusionProof, OutOfRangeThrows) {
  const auto tree = build_tree(byte_leaves(3));
  EXPECT_THROW(prove_inclusion(tree, 3), std::out_of_range);
  EXPECT_THROW(prove_inclusion(build_tree({}), 0), std::out_of_range);
}
