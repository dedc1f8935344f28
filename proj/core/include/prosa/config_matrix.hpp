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
// Phase-1 configuration matrices: fixed A01-A22, target-hit NT01-NT07 and
// randomized sweeps S01-S13, plus the seed scheme.
//
// Seeds: fixed and NT configs render with derive_seed({base, image_index,
// fnv1a(config_id)}). Sweep parameters are drawn from a generator seeded
// with (image_index + 1) * 100000 + pair_id, where pair_id is the pair group
// (1 for S01/S10/S11, 2 for S03/S12/S13, 0 otherwise), so paired configs
// share every sampled value and differ only in placement.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "prosa/placement.hpp"
#include "prosa/probe.hpp"

namespace prosa {

inline constexpr std::uint64_t kBaseSeed = 42;

enum class ConfigKind : std::uint8_t { kFixed, kTarget, kSweep };

struct SweepParam {
  ProbeParam param = ProbeParam::kWidth;
  double lo = 0.0;
  double hi = 0.0;
};

struct ConfigSpec {
  std::string id;
  ConfigKind kind = ConfigKind::kFixed;
  /// Template; sweep entries overwrite the sampled parameters.
  ProbeConfig probe;
  double nt_target = 0.0;
  std::vector<SweepParam> sweep;
  int pair_group = 0;
  std::string label;
  std::string purpose;
};

enum class MatrixKind : std::uint8_t {
  kA,      // A01-A22
  kNt,     // NT01-NT07
  kS,      // S01-S13
  kFixed,  // A + NT, the 29 Phase-1 configurations
  kAll,    // A + NT + S
};

std::optional<MatrixKind> parse_matrix(std::string_view name) noexcept;

/// Every known configuration in matrix order.
const std::vector<ConfigSpec>& all_configs();
std::vector<ConfigSpec> matrix(MatrixKind kind);
/// Throws Error for unknown ids.
const ConfigSpec& decode_config(std::string_view id);

std::uint64_t sweep_seed(std::size_t image_index, int pair_id) noexcept;
std::uint64_t page_seed(std::size_t image_index, std::string_view config_id,
                        std::uint64_t base = kBaseSeed) noexcept;

/// Stream key shared by NT01-NT07, so the stamps placed for a lower target
/// are a prefix of those placed for a higher one on the same image.
inline constexpr std::string_view kNtStreamKey = "NT";

/// Seed of the random source for (spec, image): page_seed of the config id,
/// or of kNtStreamKey for target configs.
std::uint64_t config_seed(const ConfigSpec& spec, std::size_t image_index,
                          std::uint64_t base = kBaseSeed) noexcept;

/// Draws the sweep parameters of spec for one image. The returned config
/// carries the sweep seed so shape noise is shared within a pair group.
ProbeConfig sample_sweep(const ConfigSpec& spec, std::size_t image_index);

/// Concrete probe for (spec, image): the template for fixed configs, a
/// sampled config for sweeps. NT configs return the stamp template.
ProbeConfig instantiate(const ConfigSpec& spec, std::size_t image_index,
                        std::uint64_t base = kBaseSeed);

/// The disk stamp used by NT placement.
NtOptions nt_options();

nlohmann::json to_json(const ConfigSpec& spec);

}  // namespace prosa
