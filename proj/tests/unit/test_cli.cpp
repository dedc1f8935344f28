// Copyright 2026 The ProSA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "prosa/document.hpp"

#ifdef PROSA_CLI_PATH

namespace prosa {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int status = -1;
  std::string output;
};

CliRun run(const fs::path& cwd, const std::string& args) {
  const std::string cmd =
      "cd '" + cwd.string() + "' && '" PROSA_CLI_PATH "' " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

TEST(Cli, SynthCampaignStatsPipeline) {
  testing::TempDir dir("cli");
  CliRun r = run(dir.path(), "synth --out pool --pages 2 --qa qa.json");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir / "pool/page_0001.png"));
  EXPECT_TRUE(fs::exists(dir / "qa.json"));

  r = run(dir.path(), "campaign --pool pool --adapter mock --out rec.csv --configs A01,A09,NT03");
  ASSERT_EQ(r.status, 0) << r.output;
  const std::string first = slurp(dir / "rec.csv");
  EXPECT_EQ(first.rfind("image_id,config_id,TOR,", 0), 0u);
  EXPECT_EQ(line_count(first), 7u);
  EXPECT_TRUE(fs::exists(dir / "rec.csv.log.json"));

  r = run(dir.path(), "campaign --pool pool --adapter mock --out again.csv --configs A01,A09,NT03 --workers 2");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(slurp(dir / "again.csv"), first);

  r = run(dir.path(), "stats --records rec.csv");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("\"layers\""), std::string::npos);
  r = run(dir.path(), "stats --records rec.csv --out report");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir / "report/config_table.csv"));
  EXPECT_TRUE(fs::exists(dir / "report/report.json"));

  r = run(dir.path(), "retrieval --pool pool --adapter mock --qa qa.json --out ret.csv");
  ASSERT_EQ(r.status, 0) << r.output;
  const std::string ret = slurp(dir / "ret.csv");
  EXPECT_NE(ret.find("\nclean,2,"), std::string::npos);
  EXPECT_NE(ret.find("\nLA,2,"), std::string::npos);
}

#ifdef PROSA_MOCK_PARSER_PATH
TEST(Cli, SubprocessAdapterMatchesInProcessMock) {
  testing::TempDir dir("cli");
  ASSERT_EQ(run(dir.path(), "synth --out pool --pages 1").status, 0);
  CliRun r = run(dir.path(), "campaign --pool pool --adapter mock --out a.csv --configs A01,A09");
  ASSERT_EQ(r.status, 0) << r.output;
  r = run(dir.path(), "campaign --pool pool --adapter '" PROSA_MOCK_PARSER_PATH
                      "' --out b.csv --configs A01,A09 --workdir wd");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
}
#endif

TEST(Cli, AuditPrintsStructuralBlock) {
  testing::TempDir dir("cli");
  const ParseOutput clean = testing::page({testing::element(10, 10, 90, 40, Category::kText, "first block"),
                                           testing::element(10, 60, 90, 90, Category::kText, "second block")});
  ParseOutput adv = clean;
  adv.elements.pop_back();
  write_parse_output(clean, dir / "clean.json");
  write_parse_output(adv, dir / "adv.json");
  CliRun r = run(dir.path(), "audit --clean clean.json --adv adv.json --out audit.json");
  ASSERT_EQ(r.status, 0) << r.output;
  const auto doc = nlohmann::json::parse(slurp(dir / "audit.json"));
  EXPECT_DOUBLE_EQ(doc.at("structural").at("B_SLR").get<double>(), 0.5);
}

TEST(Cli, ErrorsExitWithStatusOne) {
  testing::TempDir dir("cli");
  CliRun r = run(dir.path(), "campaign --pool missing --adapter mock --out x.csv");
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.output.rfind("error: ", 0), 0u) << r.output;

  std::ofstream(dir / "bad.ini") << "nonsense = 1\n";
  ASSERT_EQ(run(dir.path(), "synth --out pool --pages 1").status, 0);
  r = run(dir.path(), "campaign --pool pool --adapter mock --out x.csv --settings bad.ini");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("unknown setting"), std::string::npos) << r.output;

  r = run(dir.path(), "campaign --pool pool --adapter mock --out x.csv --configs Z99");
  EXPECT_EQ(r.status, 1);
  EXPECT_FALSE(fs::exists(dir / "x.csv"));
}

}  // namespace
}  // namespace prosa

#endif
