#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;  // stdout and stderr interleaved
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(GRIDLEDGER_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  while (auto n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string scenario(const std::string& name) {
  return std::string(GRIDLEDGER_SCENARIOS) + "/" + name;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gridledger-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path run_honest(const std::string& sub = "out") {
    const auto out = dir_ / sub;
    const auto r = cli("run " + scenario("honest.scn") + " --out " + out.string());
    EXPECT_EQ(r.code, 0) << r.out;
    return out;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, RunWritesReportDirectory) {
  const auto out = run_honest();
  for (const char* f : {"chain.txt", "ledger.tsv", "credits.tsv", "roles.tsv", "trace.tsv", "metrics.txt"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_TRUE(fs::is_directory(out / "store"));
}

TEST_F(Cli, SameSeedSameBytes) {
  const auto a = run_honest("a");
  const auto b = run_honest("b");
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), a);
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
  }
  EXPECT_GT(files, 6u);
}

TEST_F(Cli, SeedOverrideChangesChain) {
  const auto a = run_honest("a");
  const auto b = dir_ / "b";
  ASSERT_EQ(cli("run " + scenario("honest.scn") + " --seed 8 --out " + b.string()).code, 0);
  EXPECT_NE(slurp(a / "chain.txt"), slurp(b / "chain.txt"));
}

TEST_F(Cli, MalformedScenarioNamesLine) {
  std::ifstream in(scenario("honest.scn"));
  std::ostringstream bad;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) bad << (n == 7 ? "node seven assessment" : line) << '\n';
  const auto path = dir_ / "bad.scn";
  std::ofstream(path) << bad.str();
  const auto r = cli("run " + path.string() + " --out " + (dir_ / "o").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("line 7"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(dir_ / "o" / "chain.txt"));
}

TEST_F(Cli, MissingScenarioFile) {
  EXPECT_EQ(cli("run " + (dir_ / "nope.scn").string()).code, 2);
}

TEST_F(Cli, VerifyHonestChain) {
  const auto out = run_honest();
  const auto r = cli("verify " + (out / "chain.txt").string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("3 blocks verified"), std::string::npos);
}

TEST_F(Cli, VerifyReportsEditedBlock) {
  const auto out = run_honest();
  std::ifstream in(out / "chain.txt");
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 3u);
  // Block 1's record section follows its fixed-size header; edit a hex digit near the end.
  auto& hex = lines[1];
  auto& c = hex[hex.size() - 40];
  c = c == '0' ? '1' : '0';
  const auto edited = dir_ / "edited.txt";
  {
    std::ofstream o(edited);
    for (const auto& l : lines) o << l << '\n';
  }
  const auto r = cli("verify " + edited.string());
  EXPECT_EQ(r.code, 1) << r.out;
  const auto pos = r.out.find("violation at block ");
  ASSERT_NE(pos, std::string::npos) << r.out;
  const auto index = std::stoul(r.out.substr(pos + 19));
  EXPECT_GE(index, 1u);
  EXPECT_LE(index, 2u);
}

TEST_F(Cli, VerifyRejectsEmptyAndNonHex) {
  const auto empty = dir_ / "empty.txt";
  std::ofstream(empty).close();
  EXPECT_EQ(cli("verify " + empty.string()).code, 2);
  const auto junk = dir_ / "junk.txt";
  std::ofstream(junk) << "not hex at all\n";
  EXPECT_EQ(cli("verify " + junk.string()).code, 2);
}

TEST_F(Cli, InspectListsBlocks) {
  const auto out = run_honest();
  const auto r = cli("inspect " + (out / "chain.txt").string() + " --tick-length 1");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("600 (10m0s)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("grid-data"), std::string::npos);
}

TEST_F(Cli, TraceShareLineage) {
  const auto out = dir_ / "share";
  ASSERT_EQ(cli("run " + scenario("sharing.scn") + " --out " + out.string()).code, 0);
  // The shared payload is the first record of block 1.
  const auto inspect = cli("inspect " + (out / "chain.txt").string()).out;
  const auto row = inspect.find("  1.0\t");
  ASSERT_NE(row, std::string::npos) << inspect;
  std::istringstream fields(inspect.substr(row));
  std::string idx, kind, cls, digest;
  fields >> idx >> kind >> cls >> digest;
  const auto r = cli("trace " + (out / "chain.txt").string() + " --digest " + digest);
  EXPECT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  std::vector<std::string> got;
  for (std::string l; std::getline(lines, l);) got.push_back(l);
  ASSERT_EQ(got.size(), 2u) << r.out;
  EXPECT_NE(got[0].find("grid-data"), std::string::npos);
  EXPECT_NE(got[1].find("share-transaction"), std::string::npos);
}

TEST_F(Cli, TraceUnknownDigest) {
  const auto out = run_honest();
  const auto r = cli("trace " + (out / "chain.txt").string() + " --digest " + std::string(64, 'a'));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "no records\n");
}

TEST_F(Cli, TraceNeedsExactlyOneSelector) {
  const auto out = run_honest();
  const auto chain = (out / "chain.txt").string();
  EXPECT_EQ(cli("trace " + chain).code, 2);
  EXPECT_EQ(cli("trace " + chain + " --digest " + std::string(64, 'a') + " --key " + std::string(64, 'b')).code, 2);
  EXPECT_EQ(cli("trace " + chain + " --digest xyz").code, 2);
}

TEST_F(Cli, CreditsMatchGolden) {
  const auto out = run_honest();
  const auto r = cli("credits " + out.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, slurp(std::string(GRIDLEDGER_FIXTURES) + "/honest_credits.txt"));
}

TEST_F(Cli, CreditsDetectEditedTable) {
  const auto out = run_honest();
  auto table = slurp(out / "credits.tsv");
  const auto pos = table.find("\n1\t");
  ASSERT_NE(pos, std::string::npos);
  table.replace(pos + 3, 1, "9");
  std::ofstream(out / "credits.tsv") << table;
  const auto r = cli("credits " + out.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("mismatch: node 1"), std::string::npos) << r.out;
}

TEST_F(Cli, RolesShowReelection) {
  const auto out = dir_ / "mixed";
  ASSERT_EQ(cli("run " + scenario("mixed20.scn") + " --out " + out.string()).code, 0);
  const auto r = cli("roles " + out.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\n3\t"), std::string::npos) << "expected epoch 3 rows";
}

TEST_F(Cli, AuditCleanRun) {
  const auto out = run_honest();
  const auto r = cli("audit " + out.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("under_replicated\t0"), std::string::npos) << r.out;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("run --no-such-flag x").code, 2);
  EXPECT_EQ(cli("credits " + (dir_ / "missing").string()).code, 2);
  EXPECT_EQ(cli("--help").code, 0);
}
