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

#include "prosa/config_matrix.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "prosa/rng.hpp"

namespace prosa {
namespace {

using P = ProbeParam;

ProbeConfig probe(ProbeId id, Placement placement) {
  ProbeConfig c = default_config(id);
  c.placement = placement;
  c.probe_count = 1;
  return c;
}

ConfigSpec fixed(std::string id, std::string label, std::string purpose,
                 ProbeConfig c) {
  ConfigSpec s;
  s.id = std::move(id);
  s.kind = ConfigKind::kFixed;
  s.probe = c;
  s.label = std::move(label);
  s.purpose = std::move(purpose);
  return s;
}

ProbeConfig line(ProbeId id, Placement t, double w, double l_r) {
  ProbeConfig c = probe(id, t);
  c.w = w;
  c.l_r = l_r;
  return c;
}

ProbeConfig disk(Placement t, double r, double alpha) {
  ProbeConfig c = probe(ProbeId::kP3, t);
  c.r = r;
  c.alpha = alpha;
  return c;
}

ProbeConfig erase(Placement t, double a_area, double beta) {
  ProbeConfig c = probe(ProbeId::kP4, t);
  c.a_area = a_area;
  c.beta = beta;
  return c;
}

ProbeConfig band(double alpha, double w) {
  ProbeConfig c = probe(ProbeId::kP6, Placement::kAnchor);
  c.alpha = alpha;
  c.w = w;
  c.l_r = 1.0;
  return c;
}

ConfigSpec sweep(std::string id, ProbeId pid, Placement t,
                 std::vector<SweepParam> params, int pair_group, std::string label) {
  ConfigSpec s;
  s.id = std::move(id);
  s.kind = ConfigKind::kSweep;
  s.probe = probe(pid, t);
  // Parameters the sweep leaves fixed follow the fixed-matrix conventions.
  if (pid == ProbeId::kP1 || pid == ProbeId::kP2 || pid == ProbeId::kP6 ||
      pid == ProbeId::kP9) {
    s.probe.l_r = 1.0;
  }
  s.sweep = std::move(params);
  s.pair_group = pair_group;
  s.label = std::move(label);
  s.purpose = pair_group > 0 ? fmt::format("pair group {}", pair_group) : "sweep";
  return s;
}

std::vector<ConfigSpec> build() {
  using T = Placement;
  std::vector<ConfigSpec> v;
  v.push_back(fixed("A01", "P1.a[w1]", "P1 lower bound", line(ProbeId::kP1, T::kAnchor, 1, 1.0)));
  v.push_back(fixed("A02", "P1.a[w8]", "P1 upper bound", line(ProbeId::kP1, T::kAnchor, 8, 1.0)));
  v.push_back(fixed("A03", "P2.a[w1]", "P2 lower bound", line(ProbeId::kP2, T::kAnchor, 1, 1.0)));
  v.push_back(fixed("A04", "P2.a[w8]", "P2 upper bound", line(ProbeId::kP2, T::kAnchor, 8, 1.0)));
  v.push_back(fixed("A05", "P3.a[alpha.3]", "stamp faint", disk(T::kAnchor, 60, 0.3)));
  v.push_back(fixed("A06", "P3.a[alpha1]", "stamp opaque", disk(T::kAnchor, 60, 1.0)));
  v.push_back(fixed("A07", "P4.c[5%]", "erasure mild", erase(T::kContent, 0.05, 0.3)));
  v.push_back(fixed("A08", "P4.c[20%]", "erasure severe", erase(T::kContent, 0.20, 1.0)));
  v.push_back(fixed("A09", "P5.b[w1]", "separator thin", line(ProbeId::kP5, T::kBridge, 1, 0.5)));
  v.push_back(fixed("A10", "P5.b[w3]", "separator thick", line(ProbeId::kP5, T::kBridge, 3, 0.5)));
  v.push_back(fixed("A11", "P6.a[alpha.1]", "ghost imperceptible", band(0.1, 5)));
  v.push_back(fixed("A12", "P6.a[alpha.3]", "ghost visible", band(0.3, 5)));
  v.push_back(fixed("A13", "P1.c[w3]", "crease on text", line(ProbeId::kP1, T::kContent, 3, 1.0)));
  v.push_back(fixed("A14", "P1.r[w3]", "crease random", line(ProbeId::kP1, T::kRandom, 3, 1.0)));
  v.push_back(fixed("A15", "P3.c[alpha.5]", "stamp on text", disk(T::kContent, 60, 0.5)));
  v.push_back(fixed("A16", "P3.r[alpha.5]", "stamp random", disk(T::kRandom, 60, 0.5)));
  v.push_back(fixed("A17", "P5.c[w2]", "separator on text", line(ProbeId::kP5, T::kContent, 2, 0.5)));
  v.push_back(fixed("A18", "P5.r[w2]", "separator random", line(ProbeId::kP5, T::kRandom, 2, 0.5)));
  v.push_back(fixed("A19", "P4.b[20%]", "erasure bridge", erase(T::kBridge, 0.20, 1.0)));
  v.push_back(fixed("A20", "P5.c[w3]", "separator extended", line(ProbeId::kP5, T::kContent, 3, 0.5)));
  v.push_back(fixed("A21", "P3.a[alpha.5]", "stamp anchor", disk(T::kAnchor, 60, 0.5)));
  v.push_back(fixed("A22", "P1.a[w3]", "crease anchor", line(ProbeId::kP1, T::kAnchor, 3, 1.0)));

  const double targets[] = {0.05, 0.10, 0.20, 0.35, 0.50, 0.70, 1.00};
  for (int i = 0; i < 7; ++i) {
    ConfigSpec s;
    s.id = fmt::format("NT{:02d}", i + 1);
    s.kind = ConfigKind::kTarget;
    s.probe = probe(ProbeId::kP3, Placement::kContent);
    const NtOptions nt = nt_options();
    s.probe.r = nt.radius;
    s.probe.alpha = nt.alpha;
    s.probe.color = nt.color;
    s.nt_target = targets[i];
    s.label = fmt::format("NT[{:.2f}]", targets[i]);
    s.purpose = "targeted stamp placement";
    v.push_back(std::move(s));
  }

  v.push_back(sweep("S01", ProbeId::kP1, T::kAnchor, {{P::kWidth, 1, 10}}, 1, "P1 w~U(1,10)"));
  v.push_back(sweep("S02", ProbeId::kP2, T::kAnchor, {{P::kWidth, 1, 10}}, 0, "P2 w~U(1,10)"));
  v.push_back(sweep("S03", ProbeId::kP3, T::kAnchor, {{P::kRadius, 30, 90}, {P::kAlpha, 0.2, 1.0}}, 2,
                    "P3 r~U(30,90) alpha~U(0.2,1)"));
  v.push_back(sweep("S04", ProbeId::kP4, T::kContent,
                    {{P::kAreaFraction, 0.03, 0.25}, {P::kBeta, 0.2, 1.0}}, 0,
                    "P4 a_area~U(3%,25%) beta~U(0.2,1)"));
  v.push_back(sweep("S05", ProbeId::kP5, T::kBridge, {{P::kWidth, 1, 5}, {P::kLengthRatio, 0.2, 0.8}},
                    0, "P5 w~U(1,5) l~U(0.2W,0.8W)"));
  v.push_back(sweep("S06", ProbeId::kP6, T::kAnchor, {{P::kAlpha, 0.05, 0.4}, {P::kWidth, 2, 10}}, 0,
                    "P6 alpha~U(0.05,0.4) w~U(2,10)"));
  v.push_back(sweep("S07", ProbeId::kP7, T::kRandom, {{P::kCount, 10, 100}, {P::kRadius, 1, 4}}, 0,
                    "P7 n~U(10,100) r~U(1,4)"));
  v.push_back(sweep("S08", ProbeId::kP8, T::kAnchor, {{P::kBaseRadius, 30, 80}, {P::kKappa, 0.1, 0.5}},
                    0, "P8 r_b~U(30,80) kappa~U(0.1,0.5)"));
  v.push_back(sweep("S09", ProbeId::kP9, T::kAnchor, {{P::kTheta, 20, 70}, {P::kWidth, 1, 6}}, 0,
                    "P9 theta~U(20,70) w~U(1,6)"));
  v.push_back(sweep("S10", ProbeId::kP1, T::kContent, {{P::kWidth, 1, 10}}, 1, "P1 content, paired with S01"));
  v.push_back(sweep("S11", ProbeId::kP1, T::kRandom, {{P::kWidth, 1, 10}}, 1, "P1 random, paired with S01"));
  v.push_back(sweep("S12", ProbeId::kP3, T::kContent, {{P::kRadius, 30, 90}, {P::kAlpha, 0.2, 1.0}}, 2,
                    "P3 content, paired with S03"));
  v.push_back(sweep("S13", ProbeId::kP3, T::kRandom, {{P::kRadius, 30, 90}, {P::kAlpha, 0.2, 1.0}}, 2,
                    "P3 random, paired with S03"));
  return v;
}

}  // namespace

std::optional<MatrixKind> parse_matrix(std::string_view name) noexcept {
  if (name == "a") return MatrixKind::kA;
  if (name == "nt") return MatrixKind::kNt;
  if (name == "s") return MatrixKind::kS;
  if (name == "fixed") return MatrixKind::kFixed;
  if (name == "all") return MatrixKind::kAll;
  return std::nullopt;
}

const std::vector<ConfigSpec>& all_configs() {
  static const std::vector<ConfigSpec> configs = build();
  return configs;
}

std::vector<ConfigSpec> matrix(MatrixKind kind) {
  std::vector<ConfigSpec> out;
  for (const ConfigSpec& s : all_configs()) {
    const bool a = s.kind == ConfigKind::kFixed;
    const bool nt = s.kind == ConfigKind::kTarget;
    const bool sw = s.kind == ConfigKind::kSweep;
    bool keep = false;
    switch (kind) {
      case MatrixKind::kA: keep = a; break;
      case MatrixKind::kNt: keep = nt; break;
      case MatrixKind::kS: keep = sw; break;
      case MatrixKind::kFixed: keep = a || nt; break;
      case MatrixKind::kAll: keep = true; break;
    }
    if (keep) out.push_back(s);
  }
  return out;
}

const ConfigSpec& decode_config(std::string_view id) {
  for (const ConfigSpec& s : all_configs()) {
    if (s.id == id) return s;
  }
  throw Error(fmt::format("unknown config id '{}'", id));
}

std::uint64_t sweep_seed(std::size_t image_index, int pair_id) noexcept {
  return (static_cast<std::uint64_t>(image_index) + 1) * 100000ULL +
         static_cast<std::uint64_t>(pair_id);
}

std::uint64_t page_seed(std::size_t image_index, std::string_view config_id,
                        std::uint64_t base) noexcept {
  return derive_seed({base, static_cast<std::uint64_t>(image_index), fnv1a(config_id)});
}

std::uint64_t config_seed(const ConfigSpec& spec, std::size_t image_index,
                          std::uint64_t base) noexcept {
  return page_seed(image_index, spec.kind == ConfigKind::kTarget ? kNtStreamKey : spec.id, base);
}

ProbeConfig sample_sweep(const ConfigSpec& spec, std::size_t image_index) {
  ProbeConfig c = spec.probe;
  const std::uint64_t seed = sweep_seed(image_index, spec.pair_group);
  Rng rng(seed);
  for (const SweepParam& p : spec.sweep) {
    if (p.param == ProbeParam::kCount) {
      set_param(c, p.param, static_cast<double>(rng.uniform_int(
                                static_cast<std::int64_t>(p.lo), static_cast<std::int64_t>(p.hi))));
    } else {
      set_param(c, p.param, rng.uniform(p.lo, p.hi));
    }
  }
  c.seed = seed;
  return c;
}

ProbeConfig instantiate(const ConfigSpec& spec, std::size_t image_index,
                        std::uint64_t base) {
  if (spec.kind == ConfigKind::kSweep) return sample_sweep(spec, image_index);
  ProbeConfig c = spec.probe;
  c.seed = config_seed(spec, image_index, base);
  return c;
}

NtOptions nt_options() { return NtOptions{}; }

nlohmann::json to_json(const ConfigSpec& spec) {
  nlohmann::json doc;
  doc["config_id"] = spec.id;
  doc["label"] = spec.label;
  doc["purpose"] = spec.purpose;
  switch (spec.kind) {
    case ConfigKind::kFixed: doc["kind"] = "fixed"; break;
    case ConfigKind::kTarget: doc["kind"] = "target"; break;
    case ConfigKind::kSweep: doc["kind"] = "sweep"; break;
  }
  doc["probe"] = to_json(spec.probe);
  if (spec.kind == ConfigKind::kTarget) {
    const NtOptions nt = nt_options();
    doc["nt"] = {{"target", spec.nt_target}, {"stamp", "P3 disk"}, {"radius", nt.radius},
                 {"alpha", nt.alpha}, {"max_stamps", nt.max_stamps}};
  }
  if (!spec.sweep.empty()) {
    nlohmann::json params = nlohmann::json::array();
    for (const SweepParam& p : spec.sweep) {
      params.push_back({{"param", std::string(param_name(p.param))}, {"lo", p.lo}, {"hi", p.hi}});
    }
    doc["sweep"] = params;
    doc["pair_group"] = spec.pair_group;
  }
  return doc;
}

}  // namespace prosa
