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

#include "prosa/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <opencv2/imgproc.hpp>

#include "prosa/hash.hpp"
#include "prosa/image_io.hpp"

namespace prosa {
namespace {

constexpr std::string_view kBiasedTemplate = R"(You are stress-testing a document layout analysis system.
Pick exactly one visual probe and one placement strategy that you expect to break the parser's structure: blocks merged together, blocks split apart, or blocks lost.

Probe types:
P1 horizontal crease (w 1-10 px, l_r 0.5-1.0)
P2 vertical crease (w 1-10 px, l_r 0.5-1.0)
P3 circular overlay (r 30-90 px, alpha 0.2-1.0)
P4 rectangular erasure (a_area 0.03-0.25, beta 0.2-1.0)
P5 thin horizontal line (w 1-5 px, l_r 0.2-0.8)
P6 gradient band (alpha 0.05-0.4, w 2-10 px)
P7 dot cluster (n 10-100, r 1-4 px, sigma 10-50 px)
P8 irregular patch (r_b 30-80 px, kappa 0.1-0.5, alpha 0.3-0.7)
P9 diagonal crease (theta 20-70 deg, w 1-6 px)

Placement strategies:
bridge: across the space separating two neighboring blocks
anchor: on the outline of a block
content: inside a block
random: anywhere on the page

Page:
{context}

Reply with a single JSON object and nothing else:
{"probe": "P1".."P9", "strategy": "bridge|anchor|content|random", "params": {"name": value}}
)";

constexpr std::string_view kNeutralTemplate = R"(You review how a document layout model copes with imperfect scans.
Choose one plausible degradation and where it lands, so we can observe the model's response.

Degradation types:
P1 horizontal crease (w 1-10 px, l_r 0.5-1.0)
P2 vertical crease (w 1-10 px, l_r 0.5-1.0)
P3 circular overlay (r 30-90 px, alpha 0.2-1.0)
P4 rectangular erasure (a_area 0.03-0.25, beta 0.2-1.0)
P5 thin horizontal line (w 1-5 px, l_r 0.2-0.8)
P6 gradient band (alpha 0.05-0.4, w 2-10 px)
P7 dot cluster (n 10-100, r 1-4 px, sigma 10-50 px)
P8 irregular patch (r_b 30-80 px, kappa 0.1-0.5, alpha 0.3-0.7)
P9 diagonal crease (theta 20-70 deg, w 1-6 px)

Location options: between, edge, inside, anywhere.

Page elements:
{context}

Reply with a single JSON object and nothing else:
{"probe": "P1".."P9", "strategy": "between|edge|inside|anywhere", "params": {"name": value}}
)";

constexpr std::string_view kVlmTemplate = R"(The attached image is a document page.
Look at its text blocks, figures, tables and empty areas, then choose one degradation type (P1-P9: horizontal crease, vertical crease, circular overlay, rectangular erasure, thin horizontal line, gradient band, dot cluster, irregular patch, diagonal crease) and one location option (between, edge, inside, anywhere).
Positions are computed from the location option, so do not give coordinates.

Reply with a single JSON object and nothing else:
{"probe": "P1".."P9", "strategy": "between|edge|inside|anywhere"}
)";

std::string_view template_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kLlmBiased: return "llm-biased";
    case PolicyKind::kLlmNeutral: return "llm-neutral";
    case PolicyKind::kVlm: return "vlm";
    default: return "";
  }
}

std::string box_text(const BBox& b) {
  return fmt::format("[{:.0f}, {:.0f}, {:.0f}, {:.0f}]", b.x0, b.y0, b.x1, b.y1);
}

std::string_view extract_object(std::string_view reply) {
  const auto begin = reply.find('{');
  const auto end = reply.rfind('}');
  if (begin == std::string_view::npos || end == std::string_view::npos || end < begin) {
    return {};
  }
  return reply.substr(begin, end - begin + 1);
}

ProbeConfig random_config(ProbeId id, Rng& rng) {
  ProbeConfig c = default_config(id);
  for (const auto& [param, range] : catalog(id).ranges) {
    if (param == ProbeParam::kCount) {
      set_param(c, param, static_cast<double>(rng.uniform_int(
                              static_cast<std::int64_t>(range.lo), static_cast<std::int64_t>(range.hi))));
    } else {
      set_param(c, param, rng.uniform(range.lo, range.hi));
    }
  }
  if (id == ProbeId::kP6 || id == ProbeId::kP9) c.l_r = 1.0;
  return c;
}

}  // namespace

PolicyContext compute_policy_context(const cv::Mat& image, const ParseOutput& clean,
                                     const PageContext& page) {
  PolicyContext ctx;
  ctx.width = image.cols;
  ctx.height = image.rows;
  cv::Mat gray;
  cv::cvtColor(image, gray, cv::COLOR_BGR2GRAY);
  cv::Scalar mean;
  cv::Scalar stddev;
  cv::meanStdDev(gray, mean, stddev);
  ctx.gray_mean = mean[0];
  ctx.gray_std = stddev[0];
  if (ctx.gray_std > 0.0) {
    double m3 = 0.0;
    for (int y = 0; y < gray.rows; ++y) {
      const auto* row = gray.ptr<std::uint8_t>(y);
      for (int x = 0; x < gray.cols; ++x) {
        const double d = (row[x] - ctx.gray_mean) / ctx.gray_std;
        m3 += d * d * d;
      }
    }
    ctx.gray_skew = m3 / static_cast<double>(gray.total());
  }
  cv::Mat edges;
  cv::Canny(gray, edges, 50, 150);
  ctx.edge_density = static_cast<double>(cv::countNonZero(edges)) /
                     static_cast<double>(gray.total());

  const double page_area = static_cast<double>(ctx.width) * ctx.height;
  ctx.block_count = clean.elements.size();
  std::map<Category, std::size_t> counts;
  std::vector<double> fractions;
  for (const LayoutElement& e : clean.elements) {
    ctx.blocks.push_back({e.box, e.category});
    ++counts[e.category];
    fractions.push_back(std::max(0.0, e.box.area()) / page_area);
  }
  for (const auto& [c, n] : counts) {
    const double p = static_cast<double>(n) / static_cast<double>(ctx.block_count);
    ctx.category_entropy -= p * std::log2(p);
  }
  if (!fractions.empty()) {
    double sum = 0.0;
    for (double f : fractions) sum += f;
    ctx.mean_area_fraction = sum / static_cast<double>(fractions.size());
    double var = 0.0;
    for (double f : fractions) var += (f - ctx.mean_area_fraction) * (f - ctx.mean_area_fraction);
    ctx.std_area_fraction = std::sqrt(var / static_cast<double>(fractions.size()));
    ctx.max_area_fraction = *std::max_element(fractions.begin(), fractions.end());
  }
  ctx.gaps = page.gaps();
  ctx.gap_density = ctx.height > 0
                        ? static_cast<double>(ctx.gaps.size()) / (ctx.height / 1000.0)
                        : 0.0;
  if (!ctx.gaps.empty()) {
    double sum = 0.0;
    for (const Gap& g : ctx.gaps) sum += g.size;
    ctx.mean_gap = sum / static_cast<double>(ctx.gaps.size());
  }
  if (clean.elements.size() >= 2) {
    double sum = 0.0;
    for (std::size_t i = 0; i < clean.elements.size(); ++i) {
      const BBox& a = clean.elements[i].box;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < clean.elements.size(); ++j) {
        if (i == j) continue;
        const BBox& b = clean.elements[j].box;
        const double dx = (a.x0 + a.x1 - b.x0 - b.x1) / 2.0;
        const double dy = (a.y0 + a.y1 - b.y0 - b.y1) / 2.0;
        best = std::min(best, std::hypot(dx, dy));
      }
      sum += best;
    }
    ctx.mean_nn_spacing = sum / static_cast<double>(clean.elements.size());
  }
  for (const LayoutElement& e : clean.elements) {
    const double cy = (e.box.y0 + e.box.y1) / 2.0;
    int n = 0;
    for (const LayoutElement& f : clean.elements) {
      if (f.box.y0 <= cy && cy <= f.box.y1) ++n;
    }
    ctx.column_count = std::max(ctx.column_count, n);
  }
  ctx.boundary_density = page_area > 0 ? static_cast<double>(page.anchor().count()) / page_area : 0.0;
  return ctx;
}

std::string_view to_string(PolicyKind k) noexcept {
  switch (k) {
    case PolicyKind::kRandom: return "random";
    case PolicyKind::kRule: return "rule";
    case PolicyKind::kLlmBiased: return "llm-biased";
    case PolicyKind::kLlmNeutral: return "llm-neutral";
    case PolicyKind::kVlm: return "vlm";
  }
  return "random";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view s) noexcept {
  for (PolicyKind k : {PolicyKind::kRandom, PolicyKind::kRule, PolicyKind::kLlmBiased,
                       PolicyKind::kLlmNeutral, PolicyKind::kVlm}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

nlohmann::json to_json(const PolicyDecision& d) {
  return {{"policy", std::string(to_string(d.kind))},
          {"config", to_json(d.config)},
          {"raw_response", d.raw_response},
          {"strategy_fallback", d.strategy_fallback},
          {"probe_fallback", d.probe_fallback},
          {"clamped", d.clamped},
          {"attempts", d.attempts}};
}

PolicyDecision policy_random(Rng& rng) {
  PolicyDecision d;
  d.kind = PolicyKind::kRandom;
  const auto id = static_cast<ProbeId>(rng.uniform_int(1, 9));
  d.config = random_config(id, rng);
  d.config.placement = kAllPlacements[static_cast<std::size_t>(rng.uniform_int(0, 3))];
  d.config.seed = rng.next();
  return d;
}

PolicyDecision policy_rule(const PolicyContext& ctx, Rng& rng,
                           const RuleThresholds& thresholds) {
  PolicyDecision d;
  d.kind = PolicyKind::kRule;
  if (ctx.gap_density > thresholds.gap_density && !ctx.gaps.empty()) {
    d.config = default_config(ProbeId::kP5);
    d.config.placement = Placement::kBridge;
    d.config.w = 2;
    d.config.l_r = 0.5;
  } else if (ctx.boundary_density > thresholds.boundary_density) {
    const ProbeId id = ctx.column_count >= 2 ? ProbeId::kP2 : ProbeId::kP1;
    d.config = default_config(id);
    d.config.placement = Placement::kAnchor;
    d.config.w = 3;
    d.config.l_r = 1.0;
  } else {
    d.config = default_config(ProbeId::kP4);
    d.config.placement = Placement::kContent;
    d.config.a_area = 0.03;
    d.config.beta = 1.0;
  }
  d.config.seed = rng.next();
  return d;
}

std::string encode_context_biased(const PolicyContext& ctx) {
  std::ostringstream out;
  out << fmt::format("Page size: {} x {} px, {} blocks, about {} column(s).\n", ctx.width,
                     ctx.height, ctx.block_count, ctx.column_count);
  out << fmt::format("Boundary density: {:.4f}; gap density: {:.2f} per 1000 px of height; "
                     "mean gap {:.1f} px.\n",
                     ctx.boundary_density, ctx.gap_density, ctx.mean_gap);
  out << "Blocks:\n";
  for (std::size_t i = 0; i < ctx.blocks.size(); ++i) {
    out << fmt::format("  [{}] {} {}\n", i, to_string(ctx.blocks[i].category),
                       box_text(ctx.blocks[i].box));
  }
  out << "Gaps between neighboring blocks:\n";
  if (ctx.gaps.empty()) out << "  none\n";
  for (const Gap& g : ctx.gaps) {
    out << fmt::format("  blocks {} and {}: {} gap of {:.1f} px, midpoint ({:.0f}, {:.0f})\n",
                       g.first, g.second,
                       g.axis == GapAxis::kStacked ? "vertical" : "horizontal", g.size,
                       g.mid_x, g.mid_y);
  }
  std::vector<const Gap*> narrow;
  for (const Gap& g : ctx.gaps) narrow.push_back(&g);
  std::stable_sort(narrow.begin(), narrow.end(),
                   [](const Gap* a, const Gap* b) { return a->size < b->size; });
  out << "Candidate vulnerable regions (narrowest gaps first):\n";
  if (narrow.empty()) out << "  block boundaries only\n";
  for (std::size_t i = 0; i < narrow.size() && i < 3; ++i) {
    out << fmt::format("  between blocks {} and {} around ({:.0f}, {:.0f})\n", narrow[i]->first,
                       narrow[i]->second, narrow[i]->mid_x, narrow[i]->mid_y);
  }
  return out.str();
}

std::string encode_context_neutral(const PolicyContext& ctx) {
  std::ostringstream out;
  out << fmt::format("Page size: {} x {} px.\n", ctx.width, ctx.height);
  for (std::size_t i = 0; i < ctx.blocks.size(); ++i) {
    out << fmt::format("{}. {} at {}\n", i + 1, to_string(ctx.blocks[i].category),
                       box_text(ctx.blocks[i].box));
  }
  return out.str();
}

std::optional<Placement> map_strategy_name(std::string_view name) noexcept {
  if (name == "between") return Placement::kBridge;
  if (name == "edge") return Placement::kAnchor;
  if (name == "inside") return Placement::kContent;
  if (name == "anywhere") return Placement::kRandom;
  return parse_placement(name);
}

std::string prompt_template(PolicyKind kind, const PromptOptions& options) {
  const std::string_view name = template_name(kind);
  if (name.empty()) throw PolicyError("policy kind has no prompt template");
  if (options.template_dir) {
    const auto path = *options.template_dir / (std::string(name) + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (in) {
      std::ostringstream buf;
      buf << in.rdbuf();
      return buf.str();
    }
  }
  switch (kind) {
    case PolicyKind::kLlmBiased: return std::string(kBiasedTemplate);
    case PolicyKind::kLlmNeutral: return std::string(kNeutralTemplate);
    default: return std::string(kVlmTemplate);
  }
}

nlohmann::json build_prompt_request(PolicyKind kind, const PolicyContext& ctx,
                                    const cv::Mat& image, const PromptOptions& options) {
  std::string text = prompt_template(kind, options);
  const std::string context = kind == PolicyKind::kLlmBiased   ? encode_context_biased(ctx)
                              : kind == PolicyKind::kLlmNeutral ? encode_context_neutral(ctx)
                                                                : std::string();
  const auto pos = text.find("{context}");
  if (pos != std::string::npos) text.replace(pos, 9, context);

  nlohmann::json request;
  request["model"] = options.model;
  request["temperature"] = options.temperature;
  request["max_tokens"] = options.max_tokens;
  nlohmann::json user;
  user["role"] = "user";
  if (kind == PolicyKind::kVlm) {
    const std::string jpeg = encode_jpeg(image, options.image_long_edge, options.jpeg_quality);
    user["content"] = nlohmann::json::array(
        {{{"type", "text"}, {"text", text}},
         {{"type", "image_url"},
          {"image_url", {{"url", "data:image/jpeg;base64," + base64_encode(jpeg)}}}}});
  } else {
    user["content"] = text;
  }
  request["messages"] = nlohmann::json::array({user});
  return request;
}

PolicyDecision parse_policy_response(PolicyKind kind, std::string_view reply) {
  const std::string_view body = extract_object(reply);
  if (body.empty()) throw PolicyError("reply contains no JSON object");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw PolicyError(fmt::format("reply is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw PolicyError("reply JSON is not an object");
  PolicyDecision d;
  d.kind = kind;
  d.raw_response = std::string(reply);
  std::optional<ProbeId> id;
  if (doc.contains("probe") && doc["probe"].is_string()) {
    id = parse_probe_id(doc["probe"].get<std::string>());
  }
  if (!id) {
    id = ProbeId::kP5;
    d.probe_fallback = true;
  }
  d.config = default_config(*id);
  std::optional<Placement> placement;
  if (doc.contains("strategy") && doc["strategy"].is_string()) {
    placement = map_strategy_name(doc["strategy"].get<std::string>());
  }
  if (!placement) {
    placement = Placement::kRandom;
    d.strategy_fallback = true;
  }
  d.config.placement = *placement;
  if (doc.contains("params") && doc["params"].is_object()) {
    for (const auto& [key, v] : doc["params"].items()) {
      const auto param = parse_param(key);
      if (param && v.is_number()) set_param(d.config, *param, v.get<double>());
    }
  }
  d.clamped = clamp_to_catalog(d.config);
  return d;
}

PolicyDecision policy_prompted(PolicyKind kind, const PolicyContext& ctx,
                               const cv::Mat& image, ChatClient& client, Rng& rng,
                               const PromptOptions& options) {
  if (template_name(kind).empty()) throw PolicyError("not a prompted policy kind");
  const nlohmann::json request = build_prompt_request(kind, ctx, image, options);
  std::vector<std::string> reasons;
  const std::uint64_t seed = rng.next();
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    try {
      const std::string reply = client.complete(request, attempt);
      PolicyDecision d = parse_policy_response(kind, reply);
      d.attempts = attempt + 1;
      d.config.seed = seed;
      return d;
    } catch (const Error& e) {
      reasons.push_back(fmt::format("attempt {}: {}", attempt + 1, e.what()));
    }
  }
  std::string all;
  for (const std::string& r : reasons) {
    if (!all.empty()) all += "; ";
    all += r;
  }
  throw PolicyError(fmt::format("{} policy failed: {}", to_string(kind), all));
}

}  // namespace prosa
