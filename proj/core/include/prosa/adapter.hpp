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
// Parser adapters. The campaign hands a batch of page images (plus probe
// masks and any sidecar files) to an adapter and receives canonical parse
// outputs. The subprocess adapter runs "<command> --in <dir> --out <dir>"
// and reads <key>.json per image; the in-process mock is the same mock
// parser the prosa-mock-parser executable wraps.

#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>
#include <opencv2/core.hpp>

#include "prosa/document.hpp"
#include "prosa/raster.hpp"
#include "prosa/synthetic.hpp"

namespace prosa {

struct ParseJob {
  /// Unique within a batch; used as the exchange file stem.
  std::string key;
  std::string image_id;
  /// Original pool image; sidecars are looked up next to it.
  std::filesystem::path source;
  cv::Mat image;
  /// Probe support and inject subset; zero-sized for clean pages.
  Mask support;
  Mask inject;
};

struct ParseOutcome {
  std::optional<ParseOutput> output;
  std::string error;
};

class ParserAdapter {
 public:
  virtual ~ParserAdapter() = default;
  virtual std::string name() const = 0;
  /// One outcome per job, same order. Must be safe to call concurrently.
  virtual std::vector<ParseOutcome> parse(std::span<const ParseJob> jobs) = 0;
};

/// Exchange file names inside a batch directory.
std::filesystem::path exchange_image(const std::filesystem::path& dir, const std::string& key);
std::filesystem::path exchange_support(const std::filesystem::path& dir, const std::string& key);
std::filesystem::path exchange_inject(const std::filesystem::path& dir, const std::string& key);
std::filesystem::path exchange_output(const std::filesystem::path& dir, const std::string& key);

/// True for "<key>.png" files that are page images rather than masks.
bool is_exchange_image(const std::filesystem::path& path);

class SubprocessAdapter : public ParserAdapter {
 public:
  SubprocessAdapter(std::string command, std::filesystem::path workdir, bool keep_files = false);

  std::string name() const override { return command_; }
  std::vector<ParseOutcome> parse(std::span<const ParseJob> jobs) override;

 private:
  std::string command_;
  std::filesystem::path workdir_;
  bool keep_files_;
  std::atomic<std::size_t> batch_{0};
};

class MockParserAdapter : public ParserAdapter {
 public:
  explicit MockParserAdapter(MockParserRules rules = {}) : rules_(rules) {}

  std::string name() const override { return "mock"; }
  std::vector<ParseOutcome> parse(std::span<const ParseJob> jobs) override;

 private:
  std::shared_ptr<const GlyphSidecar> sidecar(const std::filesystem::path& source);

  MockParserRules rules_;
  std::mutex mutex_;
  std::map<std::filesystem::path, std::shared_ptr<const GlyphSidecar>> cache_;
};

/// Runs the mock parser over an exchange directory and writes <key>.json
/// and manifest.json into out_dir. Returns the manifest.
nlohmann::json run_mock_batch(const std::filesystem::path& in_dir,
                              const std::filesystem::path& out_dir,
                              const MockParserRules& rules = {});

}  // namespace prosa
