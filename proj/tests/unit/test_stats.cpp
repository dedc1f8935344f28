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
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "prosa/rng.hpp"
#include "prosa/stats.hpp"

namespace prosa {
namespace {

std::string fmt_id(int i) { return "img" + std::to_string(i); }

CampaignRecord rec(std::string image, std::string config, double tor, double b_slr,
                   double cer, std::string policy = {}) {
  CampaignRecord r;
  r.image_id = std::move(image);
  r.config_id = std::move(config);
  r.tor = tor;
  r.eir = tor;
  r.b_slr = b_slr;
  r.cer = cer;
  r.slr_miss = b_slr / 2;
  r.slr_topo = b_slr / 2;
  r.policy = std::move(policy);
  return r;
}

TEST(Ols, ExactLine) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9};
  const stats::Regression r = stats::ols(x, y);
  EXPECT_NEAR(r.slope, 2.0, 1e-12);
  EXPECT_NEAR(r.intercept, 1.0, 1e-12);
  EXPECT_NEAR(r.r2, 1.0, 1e-12);
  EXPECT_FALSE(r.degenerate);
  const std::vector<double> flat{2, 2, 2, 2};
  EXPECT_TRUE(stats::ols(flat, y).degenerate);
  EXPECT_DOUBLE_EQ(stats::ols(flat, y).r2, 0.0);
}

TEST(Ranks, AverageTies) {
  const std::vector<double> v{10, 20, 20, 5};
  EXPECT_EQ(stats::average_ranks(v), (std::vector<double>{2, 3.5, 3.5, 1}));
  EXPECT_EQ(stats::descending_ranks(v), (std::vector<double>{3, 1.5, 1.5, 4}));
}

TEST(Spearman, MatchesOracleOnRandomTies) {
  Rng rng(8);
  for (int t = 0; t < 500; ++t) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(3, 12));
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.uniform_int(0, 5));
      y[i] = static_cast<double>(rng.uniform_int(0, 5));
    }
    const stats::Correlation c = stats::spearman(x, y);
    if (c.degenerate) continue;
    ASSERT_NEAR(c.rho, oracle::spearman(x, y), 1e-12);
  }
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{3, 2, 1};
  EXPECT_NEAR(stats::spearman(a, b).rho, -1.0, 1e-12);
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> s{0, 10, 20, 30};
  EXPECT_DOUBLE_EQ(stats::quantile_sorted(s, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(stats::quantile_sorted(s, 0.5), 15.0);
  EXPECT_DOUBLE_EQ(stats::quantile_sorted(s, 1.0), 30.0);
  EXPECT_THROW(stats::quantile_sorted({}, 0.5), Error);
}

TEST(Trend, Classification) {
  using stats::Trend;
  EXPECT_EQ(stats::classify_trend(std::vector<double>{1, 2, 3}), Trend::kIncreasing);
  EXPECT_EQ(stats::classify_trend(std::vector<double>{1, 1, 3}), Trend::kNondecreasing);
  EXPECT_EQ(stats::classify_trend(std::vector<double>{2, 2, 2}), Trend::kFlat);
  EXPECT_EQ(stats::classify_trend(std::vector<double>{1, 3, 2}), Trend::kNonMonotone);
}

TEST(Binning, QuantileBinsAndMergedEdges) {
  std::vector<double> dose(100);
  std::iota(dose.begin(), dose.end(), 0.0);
  std::vector<double> resp = dose;
  const stats::BinnedResponse b = stats::binned_response(dose, resp, 5);
  ASSERT_EQ(b.bins.size(), 5u);
  for (const auto& bin : b.bins) EXPECT_EQ(bin.n, 20u);
  EXPECT_EQ(b.trend, stats::Trend::kIncreasing);

  std::vector<double> tied(50, 0.0);
  tied.resize(100, 1.0);
  const stats::BinnedResponse t = stats::binned_response(tied, resp, 5);
  EXPECT_GT(t.merged_edges, 0u);
  std::size_t total = 0;
  for (const auto& bin : t.bins) total += bin.n;
  EXPECT_EQ(total, 100u);
  EXPECT_THROW(stats::binned_response(std::vector<double>{1, 2}, std::vector<double>{1, 2}, 5), Error);
}

TEST(Aggregates, MeansByConfigSkipMissing) {
  std::vector<CampaignRecord> rs{rec("a", "A01", 0.1, 0.2, 0.3), rec("b", "A01", 0.3, 0.4, 0.5),
                                 rec("a", "A02", 0.5, 0.0, 0.0)};
  rs[0].map_clean = 1.0;
  const auto agg = stats::aggregate_by_config(rs);
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_EQ(agg[0].key, "A01");
  EXPECT_EQ(agg[0].n, 2u);
  EXPECT_NEAR(*agg[0].mean(Variable::kTor), 0.2, 1e-12);
  EXPECT_NEAR(*agg[0].mean(Variable::kMapClean), 1.0, 1e-12);
  EXPECT_FALSE(agg[1].mean(Variable::kMapClean));
}

TEST(Faithfulness, ConfigMeansOnALineGiveUnitR2) {
  std::vector<CampaignRecord> rs;
  for (int c = 0; c < 6; ++c) {
    for (int i = 0; i < 4; ++i) {
      const double jitter = (i % 2 ? 0.01 : -0.01);
      rs.push_back(rec(fmt_id(i), "C" + std::to_string(c), 0.1 * c + jitter, 0.05 * c + jitter, 0.3 * c + 0.1 + jitter));
    }
  }
  const auto agg = stats::aggregate_by_config(rs);
  const stats::Regression f = stats::faithfulness(agg, Variable::kBSlr, Variable::kCer);
  EXPECT_NEAR(f.r2, 1.0, 1e-9);
  EXPECT_NEAR(f.slope, 6.0, 1e-9);
}

TEST(FixedEffects, RemovesPerImageOffsets) {
  std::vector<CampaignRecord> rs;
  for (int img = 0; img < 5; ++img) {
    for (int c = 0; c < 4; ++c) {
      rs.push_back(rec(fmt_id(img), "C" + std::to_string(c), 0.1 * c, 0.2 * c + 0.3 * img, 0));
    }
  }
  rs.push_back(rec("lonely", "C0", 0.5, 0.5, 0));
  const stats::FixedEffects fe = stats::fixed_effects(rs, Variable::kTor, Variable::kBSlr);
  EXPECT_EQ(fe.images, 5u);
  EXPECT_EQ(fe.dropped_images, 1u);
  EXPECT_NEAR(fe.fit.slope, 2.0, 1e-9);
  EXPECT_NEAR(fe.fit.r2, 1.0, 1e-9);
  EXPECT_LT(stats::raw_ols(rs, Variable::kTor, Variable::kBSlr).r2, 0.9);
}

TEST(PerImage, SpearmanAndWinRate) {
  std::vector<CampaignRecord> rs;
  for (int img = 0; img < 4; ++img) {
    for (int c = 0; c < 4; ++c) {
      CampaignRecord r = rec(fmt_id(img), "C" + std::to_string(c), 0.1 * c, 0.1 * c, 0);
      r.acr = img < 3 ? 0.1 * (3 - c) : 0.1 * c;
      rs.push_back(r);
    }
  }
  const stats::PerImageRank pr = stats::per_image_spearman(rs, Variable::kTor, Variable::kBSlr);
  EXPECT_EQ(pr.images, 4u);
  EXPECT_NEAR(pr.mean_rho, 1.0, 1e-12);
  EXPECT_NEAR(*stats::win_rate(rs, Variable::kTor, Variable::kAcr, Variable::kBSlr), 0.75, 1e-12);
}

TEST(Policy, SummaryRatiosAndRankConsistency) {
  std::vector<CampaignRecord> rs{rec("a", "x", 0.1, 0.4, 0.8, "rule"),
                                 rec("b", "x", 0.1, 0.2, 0.4, "rule"),
                                 rec("a", "x", 0.2, 0.2, 0.3, "random"),
                                 rec("b", "x", 0.2, 0.2, 0.3, "random"),
                                 rec("a", "x", 0.4, 0.1, 0.1, "llm-neutral")};
  const stats::PolicySummary s = stats::policy_summary(rs);
  ASSERT_EQ(s.rows.size(), 3u);
  const auto rule = std::find_if(s.rows.begin(), s.rows.end(),
                                 [](const auto& r) { return r.policy == "rule"; });
  ASSERT_NE(rule, s.rows.end());
  EXPECT_NEAR(*rule->eff_b, 3.0, 1e-12);
  EXPECT_NEAR(*rule->eff_b_per_image, 3.0, 1e-12);
  EXPECT_NEAR(*rule->topo_share, 0.5, 1e-12);
  ASSERT_TRUE(s.consistency_cer);
  EXPECT_NEAR(*s.consistency_cer, 1.0, 1e-12);
  EXPECT_FALSE(stats::topo_share(0, 0));
}

TEST(Report, WritesTables) {
  testing::TempDir dir("stats");
  std::vector<CampaignRecord> rs{rec("a", "A01", 0.1, 0.4, 0.8, "rule"),
                                 rec("b", "A01", 0.2, 0.2, 0.4, "random")};
  stats::write_report(rs, dir.path());
  EXPECT_TRUE(std::filesystem::exists(dir / "config_table.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "policy_table.csv"));
  EXPECT_EQ(stats::report(rs).at("n_records"), 2);
}

}  // namespace
}  // namespace prosa
