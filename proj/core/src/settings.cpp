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

#include "prosa/settings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace prosa {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(fmt::format("setting '{}': '{}' is not a number", key, v));
  }
  return out;
}

long long to_int(std::string_view key, std::string_view v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(fmt::format("setting '{}': '{}' is not an integer", key, v));
  }
  return out;
}

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return std::string(v);
}

void flatten(const nlohmann::json& j, const std::string& prefix, Settings& s) {
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      flatten(v, key, s);
    } else if (v.is_string()) {
      apply_setting(s, key, v.get<std::string>());
    } else if (v.is_number() || v.is_boolean()) {
      apply_setting(s, key, v.dump());
    } else {
      throw Error(fmt::format("setting '{}' has an unsupported value", key));
    }
  }
}

}  // namespace

void apply_setting(Settings& s, std::string_view key, std::string_view raw) {
  const std::string value = unquote(trim(raw));
  if (key == "tau_iou") {
    s.thresholds.tau_iou = to_double(key, value);
  } else if (key == "tau_text") {
    s.thresholds.tau_text = to_double(key, value);
  } else if (key == "eta_occ") {
    s.thresholds.eta_occ = to_double(key, value);
  } else if (key == "delta") {
    s.thresholds.delta = static_cast<int>(to_int(key, value));
  } else if (key == "area_budget") {
    s.area_budget = to_double(key, value);
  } else if (key == "min_spans") {
    s.min_spans = static_cast<std::size_t>(to_int(key, value));
  } else if (key == "rule.gap_density") {
    s.rule.gap_density = to_double(key, value);
  } else if (key == "rule.boundary_density") {
    s.rule.boundary_density = to_double(key, value);
  } else if (key == "llm.model") {
    s.prompt.model = value;
  } else if (key == "llm.temperature") {
    s.prompt.temperature = to_double(key, value);
  } else if (key == "llm.max_tokens") {
    s.prompt.max_tokens = static_cast<int>(to_int(key, value));
  } else if (key == "llm.attempts") {
    s.prompt.max_attempts = static_cast<int>(to_int(key, value));
  } else if (key == "llm.template_dir") {
    s.prompt.template_dir = value;
  } else if (key == "llm.base_url") {
    s.http.base_url = value;
  } else if (key == "llm.path") {
    s.http.path = value;
  } else if (key == "llm.api_key_env") {
    s.http.api_key_env = value;
  } else if (key == "mock.drop") {
    s.mock.drop = to_double(key, value);
  } else if (key == "mock.misclass") {
    s.mock.misclass = to_double(key, value);
  } else {
    throw Error(fmt::format("unknown setting '{}'", key));
  }
  if (s.prompt.max_attempts < 1) throw Error("llm.attempts must be at least 1");
}

Settings parse_settings(std::string_view text) {
  Settings s;
  const std::string_view body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(fmt::format("settings JSON is invalid: {}", e.what()));
    }
    flatten(j, "", s);
    return s;
  }
  std::size_t line_no = 0;
  std::string section;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::string_view l = line;
    if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    if (l.front() == '[' && l.back() == ']') {
      section = std::string(trim(l.substr(1, l.size() - 2)));
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) {
      throw Error(fmt::format("settings line {}: expected key = value", line_no));
    }
    std::string key(trim(l.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    apply_setting(s, key, l.substr(eq + 1));
  }
  return s;
}

Settings load_settings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open settings file {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_settings(buf.str());
}

}  // namespace prosa
