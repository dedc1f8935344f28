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

#include "prosa/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace prosa::stats {
namespace {

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

template <typename KeyFn>
std::vector<Aggregate> aggregate_by(std::span<const CampaignRecord> records, KeyFn key) {
  std::vector<Aggregate> out;
  std::map<std::string, std::size_t> index;
  std::vector<std::map<Variable, double>> sums;
  for (const CampaignRecord& r : records) {
    const std::string k = key(r);
    auto [it, inserted] = index.try_emplace(k, out.size());
    if (inserted) {
      out.push_back({k, 0, {}, {}});
      sums.emplace_back();
    }
    Aggregate& a = out[it->second];
    ++a.n;
    for (Variable v : kAllVariables) {
      if (const auto x = value(r, v)) {
        sums[it->second][v] += *x;
        ++a.counts[v];
      }
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& [v, s] : sums[i]) {
      out[i].means[v] = s / static_cast<double>(out[i].counts[v]);
    }
  }
  return out;
}

std::map<std::string, std::vector<const CampaignRecord*>> by_image(
    std::span<const CampaignRecord> records) {
  std::map<std::string, std::vector<const CampaignRecord*>> groups;
  for (const CampaignRecord& r : records) groups[r.image_id].push_back(&r);
  return groups;
}

nlohmann::json regression_json(const Regression& r) {
  return {{"slope", r.slope}, {"intercept", r.intercept}, {"r2", r.r2},
          {"n", r.n}, {"degenerate", r.degenerate}};
}

nlohmann::json binned_json(const BinnedResponse& b) {
  nlohmann::json bins = nlohmann::json::array();
  for (const Bin& bin : b.bins) {
    bins.push_back({{"lo", bin.lo}, {"hi", bin.hi}, {"n", bin.n}, {"mean", bin.mean}});
  }
  return {{"bins", bins}, {"merged_edges", b.merged_edges},
          {"trend", std::string(to_string(b.trend))}};
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string cell(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string();
}

}  // namespace

Regression ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("ols: series lengths differ");
  if (x.size() < 2) throw Error("ols: need at least two points");
  Regression r;
  r.n = x.size();
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    r.degenerate = true;
    r.intercept = my;
    return r;
  }
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (r.intercept + r.slope * x[i]);
    ss_res += e * e;
  }
  r.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return r;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y, bool* degenerate) {
  if (x.size() != y.size()) throw Error("pearson: series lengths differ");
  if (x.size() < 2) throw Error("pearson: need at least two points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const bool flat = sxx == 0.0 || syy == 0.0;
  if (degenerate != nullptr) *degenerate = flat;
  if (flat) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  Correlation c;
  c.n = x.size();
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  c.rho = pearson(rx, ry, &c.degenerate);
  return c;
}

std::optional<double> Aggregate::mean(Variable v) const {
  const auto it = means.find(v);
  if (it == means.end()) return std::nullopt;
  return it->second;
}

std::vector<Aggregate> aggregate_by_config(std::span<const CampaignRecord> records) {
  return aggregate_by(records, [](const CampaignRecord& r) { return r.config_id; });
}

std::vector<Aggregate> aggregate_by_policy(std::span<const CampaignRecord> records) {
  return aggregate_by(records, [](const CampaignRecord& r) { return r.policy; });
}

void paired_values(std::span<const CampaignRecord> records, Variable x, Variable y,
                   std::vector<double>& xs, std::vector<double>& ys) {
  xs.clear();
  ys.clear();
  for (const CampaignRecord& r : records) {
    const auto a = value(r, x);
    const auto b = value(r, y);
    if (a && b) {
      xs.push_back(*a);
      ys.push_back(*b);
    }
  }
}

Regression raw_ols(std::span<const CampaignRecord> records, Variable x, Variable y) {
  std::vector<double> xs;
  std::vector<double> ys;
  paired_values(records, x, y, xs, ys);
  return ols(xs, ys);
}

Regression faithfulness(std::span<const Aggregate> aggregates, Variable x, Variable y) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const Aggregate& a : aggregates) {
    const auto mx = a.mean(x);
    const auto my = a.mean(y);
    if (mx && my) {
      xs.push_back(*mx);
      ys.push_back(*my);
    }
  }
  return ols(xs, ys);
}

FixedEffects fixed_effects(std::span<const CampaignRecord> records, Variable x,
                           Variable y) {
  FixedEffects out;
  std::vector<double> rx;
  std::vector<double> ry;
  for (const auto& [image, group] : by_image(records)) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const CampaignRecord* r : group) {
      const auto a = value(*r, x);
      const auto b = value(*r, y);
      if (a && b) {
        xs.push_back(*a);
        ys.push_back(*b);
      }
    }
    if (xs.size() < 2) {
      ++out.dropped_images;
      continue;
    }
    ++out.images;
    const double mx = mean(xs);
    const double my = mean(ys);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      rx.push_back(xs[i] - mx);
      ry.push_back(ys[i] - my);
    }
  }
  out.fit = ols(rx, ry);
  return out;
}

PerImageRank per_image_spearman(std::span<const CampaignRecord> records, Variable x,
                                Variable y) {
  PerImageRank out;
  double sum = 0.0;
  for (const auto& [image, group] : by_image(records)) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const CampaignRecord* r : group) {
      const auto a = value(*r, x);
      const auto b = value(*r, y);
      if (a && b) {
        xs.push_back(*a);
        ys.push_back(*b);
      }
    }
    if (xs.size() < 2) continue;
    const Correlation c = spearman(xs, ys);
    if (c.degenerate) {
      ++out.degenerate_images;
      continue;
    }
    out.rho[image] = c.rho;
    sum += c.rho;
  }
  out.images = out.rho.size();
  if (out.images > 0) out.mean_rho = sum / static_cast<double>(out.images);
  return out;
}

std::optional<double> win_rate(std::span<const CampaignRecord> records,
                               Variable candidate, Variable baseline, Variable y) {
  const PerImageRank a = per_image_spearman(records, candidate, y);
  const PerImageRank b = per_image_spearman(records, baseline, y);
  std::size_t both = 0;
  std::size_t wins = 0;
  for (const auto& [image, rho] : a.rho) {
    const auto it = b.rho.find(image);
    if (it == b.rho.end()) continue;
    ++both;
    if (rho > it->second) ++wins;
  }
  if (both == 0) return std::nullopt;
  return static_cast<double>(wins) / static_cast<double>(both);
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error("quantile of an empty series");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string_view to_string(Trend t) noexcept {
  switch (t) {
    case Trend::kIncreasing: return "increasing";
    case Trend::kNondecreasing: return "nondecreasing";
    case Trend::kFlat: return "flat";
    case Trend::kNonMonotone: return "non-monotone";
  }
  return "flat";
}

Trend classify_trend(std::span<const double> means, double tolerance) {
  bool strict = true;
  bool nondecreasing = true;
  bool flat = true;
  for (std::size_t i = 1; i < means.size(); ++i) {
    const double d = means[i] - means[i - 1];
    if (std::abs(d) > tolerance) flat = false;
    if (d <= tolerance) strict = false;
    if (d < -tolerance) nondecreasing = false;
  }
  if (flat) return Trend::kFlat;
  if (strict) return Trend::kIncreasing;
  if (nondecreasing) return Trend::kNondecreasing;
  return Trend::kNonMonotone;
}

BinnedResponse binned_response(std::span<const double> dose,
                               std::span<const double> response, std::size_t bins) {
  if (dose.size() != response.size()) throw Error("binning: series lengths differ");
  if (bins == 0 || dose.size() < bins) {
    throw Error(fmt::format("binning: {} records for {} bins", dose.size(), bins));
  }
  std::vector<double> sorted(dose.begin(), dose.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (std::size_t k = 0; k <= bins; ++k) {
    edges.push_back(quantile_sorted(sorted, static_cast<double>(k) / static_cast<double>(bins)));
  }
  BinnedResponse out;
  const std::size_t before = edges.size();
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  out.merged_edges = before - edges.size();
  if (edges.size() == 1) edges.push_back(edges.front());
  const std::size_t n_bins = edges.size() - 1;
  out.bins.resize(n_bins);
  std::vector<double> sums(n_bins, 0.0);
  for (std::size_t i = 0; i < dose.size(); ++i) {
    // Interior edges split bins; the last bin is closed on the right.
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, dose[i]);
    const auto k = static_cast<std::size_t>(it - (edges.begin() + 1));
    ++out.bins[k].n;
    sums[k] += response[i];
  }
  std::vector<double> means;
  for (std::size_t k = 0; k < n_bins; ++k) {
    out.bins[k].lo = edges[k];
    out.bins[k].hi = edges[k + 1];
    if (out.bins[k].n > 0) {
      out.bins[k].mean = sums[k] / static_cast<double>(out.bins[k].n);
      means.push_back(out.bins[k].mean);
    }
  }
  out.trend = classify_trend(means);
  return out;
}

BinnedResponse dose_response(std::span<const CampaignRecord> records, Variable dose,
                             Variable response, std::size_t bins) {
  std::vector<double> xs;
  std::vector<double> ys;
  paired_values(records, dose, response, xs, ys);
  return binned_response(xs, ys, bins);
}

BinnedResponse within_config_quartiles(std::span<const CampaignRecord> records,
                                       std::string_view config_id, Variable dose,
                                       Variable response) {
  std::vector<CampaignRecord> subset;
  for (const CampaignRecord& r : records) {
    if (r.config_id == config_id) subset.push_back(r);
  }
  return dose_response(subset, dose, response, 4);
}

std::vector<double> descending_ranks(std::span<const double> v) {
  std::vector<double> neg(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) neg[i] = -v[i];
  return average_ranks(neg);
}

std::optional<double> topo_share(double slr_miss, double slr_topo) {
  const double total = slr_miss + slr_topo;
  if (!(total > 0.0)) return std::nullopt;
  return slr_topo / total;
}

PolicySummary policy_summary(std::span<const CampaignRecord> records) {
  PolicySummary out;
  for (const Aggregate& a : aggregate_by_policy(records)) {
    PolicyRow row;
    row.policy = a.key;
    row.n = a.n;
    row.b_slr = a.mean(Variable::kBSlr).value_or(0.0);
    row.tor = a.mean(Variable::kTor).value_or(0.0);
    row.cer = a.mean(Variable::kCer).value_or(0.0);
    row.delta_map = a.mean(Variable::kDeltaMap);
    row.slr_miss = a.mean(Variable::kSlrMiss).value_or(0.0);
    row.slr_topo = a.mean(Variable::kSlrTopo).value_or(0.0);
    row.topo_share = topo_share(row.slr_miss, row.slr_topo);
    if (row.tor > 0.0) {
      row.eff_b = row.b_slr / row.tor;
      row.eff_c = row.cer / row.tor;
    }
    double sum_b = 0.0;
    double sum_c = 0.0;
    std::size_t n = 0;
    for (const CampaignRecord& r : records) {
      if (r.policy != a.key || !(r.tor > 0.0)) continue;
      sum_b += r.b_slr / r.tor;
      sum_c += r.cer / r.tor;
      ++n;
    }
    if (n > 0) {
      row.eff_b_per_image = sum_b / static_cast<double>(n);
      row.eff_c_per_image = sum_c / static_cast<double>(n);
    }
    out.rows.push_back(std::move(row));
  }
  std::vector<double> eff;
  std::vector<double> cer;
  std::vector<double> dmap;
  bool have_eff = true;
  bool have_dmap = true;
  for (const PolicyRow& row : out.rows) {
    have_eff = have_eff && row.eff_b.has_value();
    have_dmap = have_dmap && row.delta_map.has_value();
    eff.push_back(row.eff_b.value_or(0.0));
    cer.push_back(row.cer);
    dmap.push_back(row.delta_map.value_or(0.0));
  }
  out.rank_eff_b = descending_ranks(eff);
  out.rank_cer = descending_ranks(cer);
  out.rank_delta_map = descending_ranks(dmap);
  if (have_eff && out.rows.size() >= 2) {
    const Correlation c = spearman(out.rank_eff_b, out.rank_cer);
    if (!c.degenerate) out.consistency_cer = c.rho;
    if (have_dmap) {
      const Correlation d = spearman(out.rank_eff_b, out.rank_delta_map);
      if (!d.degenerate) out.consistency_delta_map = d.rho;
    }
  }
  return out;
}

nlohmann::json report(std::span<const CampaignRecord> records) {
  nlohmann::json doc;
  doc["n_records"] = records.size();
  doc["settings"] = {{"ranking", "parse order"},
                     {"ap_interpolation", "all-points"},
                     {"quantiles", "inclusive linear"}};
  const auto aggregates = aggregate_by_config(records);
  doc["n_configs"] = aggregates.size();
  const std::vector<Variable> exposures = {Variable::kTor, Variable::kAcr, Variable::kBpo,
                                           Variable::kBoc, Variable::kEir, Variable::kBSlr,
                                           Variable::kBSlrIouOnly, Variable::kSlrMiss,
                                           Variable::kSlrTopo};
  nlohmann::json layers;
  for (Variable v : exposures) {
    const std::string name(column_name(v));
    std::vector<double> xs;
    std::vector<double> ys;
    paired_values(records, v, Variable::kCer, xs, ys);
    if (xs.size() >= 2) layers["raw_ols"][name] = regression_json(ols(xs, ys));
    try {
      layers["config_ols"][name] = regression_json(faithfulness(aggregates, v));
    } catch (const Error&) {
    }
    try {
      const FixedEffects fe = fixed_effects(records, v, Variable::kCer);
      layers["fixed_effects"][name] = {{"fit", regression_json(fe.fit)},
                                       {"images", fe.images},
                                       {"dropped_images", fe.dropped_images}};
    } catch (const Error&) {
    }
    const PerImageRank pr = per_image_spearman(records, v, Variable::kCer);
    layers["per_image_spearman"][name] = {
        {"mean_rho", pr.mean_rho},
        {"images", pr.images},
        {"degenerate_images", pr.degenerate_images},
        {"win_rate_vs_TOR", opt(win_rate(records, v, Variable::kTor, Variable::kCer))}};
  }
  try {
    layers["dose_response"] = binned_json(dose_response(records));
  } catch (const Error& e) {
    layers["dose_response"] = {{"error", e.what()}};
  }
  for (const Aggregate& a : aggregates) {
    try {
      layers["within_config_quartiles"][a.key] =
          binned_json(within_config_quartiles(records, a.key));
    } catch (const Error& e) {
      layers["within_config_quartiles"][a.key] = {{"error", e.what()}};
    }
  }
  doc["layers"] = std::move(layers);
  const bool has_policy =
      std::any_of(records.begin(), records.end(),
                  [](const CampaignRecord& r) { return !r.policy.empty(); });
  if (has_policy) {
    const PolicySummary ps = policy_summary(records);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < ps.rows.size(); ++i) {
      const PolicyRow& r = ps.rows[i];
      rows.push_back({{"policy", r.policy}, {"n", r.n}, {"B_SLR", r.b_slr},
                      {"TOR", r.tor}, {"CER", r.cer}, {"delta_mAP", opt(r.delta_map)},
                      {"SLR_miss", r.slr_miss}, {"SLR_topo", r.slr_topo},
                      {"TopoShare", opt(r.topo_share)}, {"Eff_B", opt(r.eff_b)},
                      {"Eff_C", opt(r.eff_c)},
                      {"Eff_B_per_image", opt(r.eff_b_per_image)},
                      {"Eff_C_per_image", opt(r.eff_c_per_image)},
                      {"rank_Eff_B", ps.rank_eff_b[i]}, {"rank_CER", ps.rank_cer[i]},
                      {"rank_delta_mAP", ps.rank_delta_map[i]}});
    }
    doc["policies"] = {{"rows", rows},
                       {"rank_consistency_CER", opt(ps.consistency_cer)},
                       {"rank_consistency_delta_mAP", opt(ps.consistency_delta_map)}};
  }
  return doc;
}

void write_report(std::span<const CampaignRecord> records,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "config_table.csv", std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write {}", (dir / "config_table.csv").string()));
    out << "config_id,n";
    for (Variable v : kAllVariables) out << ',' << column_name(v);
    out << '\n';
    for (const Aggregate& a : aggregate_by_config(records)) {
      out << csv_escape(a.key) << ',' << a.n;
      for (Variable v : kAllVariables) out << ',' << cell(a.mean(v));
      out << '\n';
    }
  }
  const nlohmann::json doc = report(records);
  if (doc.contains("policies")) {
    std::ofstream out(dir / "policy_table.csv", std::ios::binary);
    out << "policy,n,B_SLR,TOR,CER,delta_mAP,SLR_miss,SLR_topo,TopoShare,Eff_B,Eff_C,"
           "Eff_B_per_image,Eff_C_per_image\n";
    for (const PolicyRow& r : policy_summary(records).rows) {
      out << csv_escape(r.policy) << ',' << r.n << ',' << cell(r.b_slr) << ','
          << cell(r.tor) << ',' << cell(r.cer) << ',' << cell(r.delta_map) << ','
          << cell(r.slr_miss) << ',' << cell(r.slr_topo) << ',' << cell(r.topo_share)
          << ',' << cell(r.eff_b) << ',' << cell(r.eff_c) << ','
          << cell(r.eff_b_per_image) << ',' << cell(r.eff_c_per_image) << '\n';
    }
  }
  std::ofstream out(dir / "report.json", std::ios::binary);
  out << doc.dump(2) << '\n';
}

}  // namespace prosa::stats
