#include <gtest/gtest.h>

#include <random>

#include "gridledger/credit.hpp"

using namespace gridledger;

namespace {

std::vector<NodeProfile> nodes(std::size_t n) {
  std::vector<NodeProfile> out;
  for (std::size_t i = 1; i <= n; ++i) {
    NodeProfile p;
    p.node_id = static_cast<NodeId>(i);
    p.public_key.value.fill(static_cast<std::uint8_t>(i));
    p.assessment = 1000 - i;  // node 1 ranks highest
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(InitializeRoles, PaperCommitteeSizes) {
  const auto a = initialize_roles(nodes(150), CommitteeConfig{});
  EXPECT_EQ(a.recorders.size(), 101u);
  EXPECT_EQ(a.supervisors.size(), 20u);
  EXPECT_EQ(a.candidates.size(), 29u);
  EXPECT_EQ(a.recorders.front(), 1u);
  EXPECT_EQ(a.supervisors.front(), 102u);
  EXPECT_EQ(a.epoch, 0u);
}

TEST(InitializeRoles, FillsByAvailability) {
  auto a = initialize_roles(nodes(6), CommitteeConfig{3, 1, 0});
  EXPECT_EQ(a.recorders, (std::vector<NodeId>{1, 2, 3}));
  EXPECT_EQ(a.supervisors, (std::vector<NodeId>{4}));
  EXPECT_EQ(a.candidates, (std::vector<NodeId>{5, 6}));

  a = initialize_roles(nodes(2), CommitteeConfig{3, 1, 0});
  EXPECT_EQ(a.recorders.size(), 2u);
  EXPECT_TRUE(a.supervisors.empty());
  EXPECT_TRUE(a.candidates.empty());
}

TEST(InitializeRoles, TiesBreakByNodeId) {
  auto ps = nodes(4);
  for (auto& p : ps) p.assessment = 5;
  std::reverse(ps.begin(), ps.end());
  const auto a = initialize_roles(ps, CommitteeConfig{2, 1, 0});
  EXPECT_EQ(a.recorders, (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(a.supervisors, (std::vector<NodeId>{3}));
}

TEST(InitializeRoles, Errors) {
  EXPECT_THROW(initialize_roles({}, CommitteeConfig{}), CreditError);
  EXPECT_THROW(initialize_roles(nodes(3), CommitteeConfig{0, 1, 0}), CreditError);
  auto dup = nodes(2);
  dup[1].node_id = 1;
  EXPECT_THROW(initialize_roles(dup, CommitteeConfig{}), CreditError);
}

TEST(Ledger, InitialCreditAndEvents) {
  CreditLedger ledger(nodes(3), 5);
  EXPECT_EQ(ledger.credit(2), 5);
  ledger.apply_record_outcome(2, true, 10);
  ledger.apply_record_outcome(2, false, 11);
  ledger.apply_record_outcome(2, true, 12);
  ledger.apply_block_outcome(1, false, 13);
  ledger.apply_block_outcome(3, true, 14);
  EXPECT_EQ(ledger.credit(1), 6);
  EXPECT_EQ(ledger.credit(2), 6);
  EXPECT_EQ(ledger.credit(3), 4);
  ASSERT_EQ(ledger.audit_log().size(), 5u);
  EXPECT_EQ(ledger.audit_log()[1], (CreditEvent{2, -1, CreditReason::RecordErroneous, 11}));
  EXPECT_THROW(ledger.apply_record_outcome(99, true, 0), CreditError);
}

TEST(Ledger, UnanimousValidatorsAllGain) {
  CreditLedger ledger(nodes(3), 0);
  const auto out = ledger.apply_validator_outcomes(
      {{1, Verdict::Ok}, {2, Verdict::Ok}, {3, Verdict::Ok}}, 0);
  EXPECT_EQ(out.majority, Verdict::Ok);
  for (NodeId id : {1u, 2u, 3u}) EXPECT_EQ(ledger.credit(id), 1);
}

TEST(Ledger, DissenterLosesMajorityGains) {
  CreditLedger ledger(nodes(3), 0);
  const auto out = ledger.apply_validator_outcomes(
      {{1, Verdict::Erroneous}, {2, Verdict::Ok}, {3, Verdict::Erroneous}}, 0);
  EXPECT_EQ(out.majority, Verdict::Erroneous);
  EXPECT_EQ(ledger.credit(1), 1);
  EXPECT_EQ(ledger.credit(2), -1);
  EXPECT_EQ(ledger.credit(3), 1);
}

TEST(Ledger, EvenVoteSetRejected) {
  CreditLedger ledger(nodes(3), 0);
  EXPECT_THROW(ledger.apply_validator_outcomes({}, 0), CreditError);
  EXPECT_THROW(ledger.apply_validator_outcomes({{1, Verdict::Ok}, {2, Verdict::Ok}}, 0),
               CreditError);
  EXPECT_TRUE(ledger.audit_log().empty());
}

TEST(Ledger, EqualsFoldOfAuditLog) {
  CreditLedger ledger(nodes(10), 3);
  std::mt19937_64 gen(1);
  for (int i = 0; i < 500; ++i) {
    const NodeId id = static_cast<NodeId>(gen() % 10 + 1);
    if (gen() % 2) {
      ledger.apply_record_outcome(id, gen() % 3 != 0, i);
    } else {
      ledger.apply_block_outcome(id, gen() % 4 == 0, i);
    }
  }
  std::vector<NodeId> ids;
  for (const auto& [id, p] : ledger.profiles()) ids.push_back(id);
  const auto folded = replay_credits(ids, 3, ledger.audit_log());
  for (auto id : ids) EXPECT_EQ(folded.at(id), ledger.credit(id));
}

TEST(AuditLog, TextRoundTrip) {
  CreditLedger ledger(nodes(3), 0);
  ledger.apply_record_outcome(1, true, 600);
  ledger.apply_validator_outcomes({{1, Verdict::Ok}, {2, Verdict::Erroneous}, {3, Verdict::Ok}},
                                  601);
  const auto text = export_audit_log(ledger.audit_log());
  EXPECT_EQ(text.substr(0, text.find('\n')), "600\t1\t+1\trecord-correct");
  EXPECT_EQ(parse_audit_log(text), ledger.audit_log());
  EXPECT_THROW(parse_audit_log("1\t2\t+2\trecord-correct\n"), CreditError);
  EXPECT_THROW(parse_audit_log("1\t2\t+1\n"), CreditError);
  EXPECT_THROW(parse_audit_log("1\t2\t+1\tbribe\n"), CreditError);
}

TEST(Reelect, RanksByCreditThenId) {
  CreditLedger ledger(nodes(6), 0);
  const auto initial = initialize_roles(nodes(6), CommitteeConfig{3, 1, 0});
  ledger.apply_record_outcome(6, true, 0);
  ledger.apply_record_outcome(6, true, 0);
  ledger.apply_record_outcome(5, true, 0);
  ledger.apply_record_outcome(1, false, 0);
  const auto next = reelect(ledger, initial, CommitteeConfig{3, 1, 0});
  EXPECT_EQ(next.epoch, 1u);
  EXPECT_EQ(next.recorders, (std::vector<NodeId>{6, 5, 2}));
  EXPECT_EQ(next.supervisors, (std::vector<NodeId>{3}));
  EXPECT_EQ(next.candidates, (std::vector<NodeId>{4, 1}));
  ledger.set_roles(next);
  EXPECT_EQ(ledger.profile(6).role, Role::Recorder);
  EXPECT_EQ(ledger.profile(1).role, Role::Candidate);
}

TEST(Duty, RoundRobin) {
  const auto a = initialize_roles(nodes(6), CommitteeConfig{3, 2, 0});
  EXPECT_EQ(duty_recorder(a, 0), 1u);
  EXPECT_EQ(duty_recorder(a, 1), 2u);
  EXPECT_EQ(duty_recorder(a, 5), 3u);
  EXPECT_EQ(duty_supervisor(a, 0), 4u);
  EXPECT_EQ(duty_supervisor(a, 3), 5u);
  EXPECT_FALSE(duty_supervisor(initialize_roles(nodes(2), CommitteeConfig{3, 1, 0}), 0));
  EXPECT_THROW(duty_recorder(RoleAssignment{}, 0), CreditError);
}
