#include <gtest/gtest.h>

#include "gridledger/scenario.hpp"

using namespace gridledger;

namespace {

std::size_t error_line(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("line " + std::to_string(e.line())), std::string::npos);
    return e.line();
  }
  ADD_FAILURE() << "parsed without error:\n" << text;
  return 0;
}

}  // namespace

TEST(Scenario, ParsesEveryDirective) {
  const auto sc = parse_scenario(R"(# desk network
config seed 42
config max_recorders 3
node 1 assessment 90
node 2 assessment 80   # trailing comment
authorize 1
upload 1 load-profile 128 at 50
share 1 2 upload:1 at 700
share 2 1 e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855 at 900
fault forge-record 2 at 100 count=3 class=fake size=32
fault fail-storage-unit 4 at 10
run until 1200
)");
  EXPECT_EQ(sc.config.at("seed"), "42");
  ASSERT_EQ(sc.nodes.size(), 2u);
  EXPECT_EQ(sc.nodes[1].assessment, 80u);
  EXPECT_EQ(sc.authorized, (std::vector<NodeId>{1}));
  ASSERT_EQ(sc.uploads.size(), 1u);
  EXPECT_EQ(sc.uploads[0].data_class, "load-profile");
  EXPECT_EQ(sc.uploads[0].size, 128u);
  EXPECT_EQ(sc.uploads[0].at, 50u);
  ASSERT_EQ(sc.shares.size(), 2u);
  EXPECT_EQ(std::get<UploadRef>(sc.shares[0].ref).index, 1u);
  EXPECT_EQ(std::get<Digest>(sc.shares[1].ref), digest(std::string_view("")));
  ASSERT_EQ(sc.faults.size(), 2u);
  EXPECT_EQ(sc.faults[0].kind, FaultKind::ForgeRecord);
  EXPECT_EQ(sc.faults[0].param_u64("count"), 3u);
  EXPECT_EQ(sc.faults[0].params.at("class"), "fake");
  EXPECT_FALSE(sc.faults[1].param_u64("duration"));
  EXPECT_EQ(sc.faults[1].target, 4u);  // a unit id, not a node
  EXPECT_EQ(sc.run_until, 1200u);
}

TEST(Scenario, EmptyAndCommentOnly) {
  EXPECT_TRUE(parse_scenario("").nodes.empty());
  EXPECT_FALSE(parse_scenario("# nothing\n\n").run_until);
}

TEST(Scenario, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("node 1 assessment 1\nnode 2 assesment 1\n"), 2u);
  EXPECT_EQ(error_line("node 1 assessment 1\n\n\nfly 1\n"), 4u);
  EXPECT_EQ(error_line("config colour blue\n"), 1u);
  EXPECT_EQ(error_line("config seed -1\n"), 1u);
  EXPECT_EQ(error_line("node 1 assessment 1\nnode 1 assessment 2\n"), 2u);
  EXPECT_EQ(error_line("node 1 assessment 1\nupload 1 c 10 at x\n"), 2u);
  EXPECT_EQ(error_line("node 1 assessment 1\nfault melt 1 at 5\n"), 2u);
  EXPECT_EQ(error_line("node 1 assessment 1\nfault crash-node 1 at 5 duration\n"), 2u);
  EXPECT_EQ(error_line("node 1 assessment 1\nfault crash-node 1 at 5 count=2\n"), 2u);
  EXPECT_EQ(error_line("node 1 assessment 1\nshare 1 1 deadbeef at 5\n"), 2u);
  EXPECT_EQ(error_line("run until\n"), 1u);
}

TEST(Scenario, ReferencesAreChecked) {
  EXPECT_EQ(error_line("node 1 assessment 1\nauthorize 2\n"), 2u);
  EXPECT_EQ(error_line("node 1 assessment 1\nnode 2 assessment 1\nshare 1 2 upload:1 at 5\n"), 3u);
  EXPECT_EQ(error_line("node 1 assessment 1\nfault byzantine-validator 9 at 0\n"), 2u);
  // A node may be declared after it is referenced.
  EXPECT_NO_THROW(parse_scenario("authorize 3\nnode 3 assessment 1\n"));
}

TEST(Scenario, FaultKindNames) {
  for (auto k : {FaultKind::ForgeRecord, FaultKind::TamperChainCopy, FaultKind::TamperInFlight,
                 FaultKind::CrashNode, FaultKind::ByzantineValidator, FaultKind::FailStorageUnit}) {
    EXPECT_EQ(parse_fault_kind(to_string(k)), k);
  }
  EXPECT_FALSE(parse_fault_kind("meteor"));
}
