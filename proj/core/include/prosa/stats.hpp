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
// Verification statistics over campaign records: OLS, Spearman, config
// aggregation, faithfulness, image fixed effects, per-image rank checks,
// dose-response bins, within-config quartiles and policy summaries.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "prosa/record.hpp"

namespace prosa::stats {

struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
  /// Zero variance in x or y; r2 is reported as 0.
  bool degenerate = false;
};

/// Least squares with intercept. Throws Error for mismatched lengths or n < 2.
Regression ols(std::span<const double> x, std::span<const double> y);

/// Ranks 1..n in ascending order, ties receive their average rank.
std::vector<double> average_ranks(std::span<const double> v);

struct Correlation {
  double rho = 0.0;
  std::size_t n = 0;
  bool degenerate = false;
};

double pearson(std::span<const double> x, std::span<const double> y, bool* degenerate = nullptr);
Correlation spearman(std::span<const double> x, std::span<const double> y);

struct Aggregate {
  std::string key;
  std::size_t n = 0;
  std::map<Variable, double> means;
  std::map<Variable, std::size_t> counts;

  std::optional<double> mean(Variable v) const;
};

/// Means over the records sharing config_id, in order of first appearance.
std::vector<Aggregate> aggregate_by_config(std::span<const CampaignRecord> records);
std::vector<Aggregate> aggregate_by_policy(std::span<const CampaignRecord> records);

/// Paired (x, y) values of records where both are present.
void paired_values(std::span<const CampaignRecord> records, Variable x, Variable y,
                   std::vector<double>& xs, std::vector<double>& ys);

/// Layer 0: OLS over the raw per-image records.
Regression raw_ols(std::span<const CampaignRecord> records, Variable x, Variable y);

/// Layer 1 / faithfulness: R^2 of config-mean X against config-mean CER.
Regression faithfulness(std::span<const Aggregate> aggregates, Variable x,
                        Variable y = Variable::kCer);

struct FixedEffects {
  Regression fit;
  std::size_t images = 0;
  std::size_t dropped_images = 0;
};

/// Layer 2: de-mean x and y within each image, then OLS on the residuals.
/// Images with a single record are dropped and counted.
FixedEffects fixed_effects(std::span<const CampaignRecord> records, Variable x,
                           Variable y);

struct PerImageRank {
  std::map<std::string, double> rho;
  double mean_rho = 0.0;
  std::size_t images = 0;
  std::size_t degenerate_images = 0;
};

/// Layer 3: Spearman of x against y within each image.
PerImageRank per_image_spearman(std::span<const CampaignRecord> records, Variable x,
                                Variable y);

/// Fraction of images, among those where both are defined, whose per-image
/// Spearman of candidate against y exceeds that of baseline against y.
std::optional<double> win_rate(std::span<const CampaignRecord> records,
                               Variable candidate, Variable baseline, Variable y);

/// Inclusive linear empirical quantile (p in [0, 1]) of sorted values.
double quantile_sorted(std::span<const double> sorted, double p);

enum class Trend { kIncreasing, kNondecreasing, kFlat, kNonMonotone };
std::string_view to_string(Trend t) noexcept;
Trend classify_trend(std::span<const double> means, double tolerance = 1e-12);

struct Bin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
  double mean = 0.0;
};

struct BinnedResponse {
  std::vector<Bin> bins;
  std::size_t merged_edges = 0;
  Trend trend = Trend::kFlat;
};

/// Quantile-edge bins on the dose, mean response per bin. Coinciding edges
/// are merged. Throws Error when fewer records than bins.
BinnedResponse binned_response(std::span<const double> dose,
                               std::span<const double> response, std::size_t bins);

/// Layer 4: EIR quintiles against B-SLR by default.
BinnedResponse dose_response(std::span<const CampaignRecord> records,
                             Variable dose = Variable::kEir,
                             Variable response = Variable::kBSlr,
                             std::size_t bins = 5);

/// Layer 5: quartiles of dose within one config.
BinnedResponse within_config_quartiles(std::span<const CampaignRecord> records,
                                       std::string_view config_id,
                                       Variable dose = Variable::kEir,
                                       Variable response = Variable::kBSlr);

/// Rank 1 is the largest value; ties share their average rank.
std::vector<double> descending_ranks(std::span<const double> v);

struct PolicyRow {
  std::string policy;
  std::size_t n = 0;
  double b_slr = 0.0;
  double tor = 0.0;
  double cer = 0.0;
  std::optional<double> delta_map;
  double slr_miss = 0.0;
  double slr_topo = 0.0;
  std::optional<double> topo_share;
  std::optional<double> eff_b;
  std::optional<double> eff_c;
  /// Mean over records with TOR > 0 of the per-record ratios.
  std::optional<double> eff_b_per_image;
  std::optional<double> eff_c_per_image;
};

std::optional<double> topo_share(double slr_miss, double slr_topo);

struct PolicySummary {
  std::vector<PolicyRow> rows;
  std::vector<double> rank_eff_b;
  std::vector<double> rank_cer;
  std::vector<double> rank_delta_map;
  std::optional<double> consistency_cer;
  std::optional<double> consistency_delta_map;
};

PolicySummary policy_summary(std::span<const CampaignRecord> records);

/// Full layered report as JSON.
nlohmann::json report(std::span<const CampaignRecord> records);

/// Writes config_table.csv, policy_table.csv (when a policy column exists)
/// and report.json into dir.
void write_report(std::span<const CampaignRecord> records,
                  const std::filesystem::path& dir);

}  // namespace prosa::stats
