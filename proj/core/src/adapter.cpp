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

#include "prosa/adapter.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "prosa/image_io.hpp"

namespace prosa {
namespace {

namespace fs = std::filesystem;

constexpr std::string_view kMockVersion = "1.0";

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string tail(const fs::path& path, std::size_t max_chars) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string s = buf.str();
  if (s.size() > max_chars) s = s.substr(s.size() - max_chars);
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

void copy_if_exists(const fs::path& from, const fs::path& to) {
  if (fs::exists(from)) fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

}  // namespace

fs::path exchange_image(const fs::path& dir, const std::string& key) { return dir / (key + ".png"); }
fs::path exchange_support(const fs::path& dir, const std::string& key) {
  return dir / (key + ".mask.png");
}
fs::path exchange_inject(const fs::path& dir, const std::string& key) {
  return dir / (key + ".inject.png");
}
fs::path exchange_output(const fs::path& dir, const std::string& key) { return dir / (key + ".json"); }

bool is_exchange_image(const fs::path& path) {
  if (path.extension() != ".png") return false;
  return path.stem().extension().empty();
}

SubprocessAdapter::SubprocessAdapter(std::string command, fs::path workdir, bool keep_files)
    : command_(std::move(command)), workdir_(std::move(workdir)), keep_files_(keep_files) {
  if (command_.empty()) throw Error("adapter command is empty");
}

std::vector<ParseOutcome> SubprocessAdapter::parse(std::span<const ParseJob> jobs) {
  std::vector<ParseOutcome> out(jobs.size());
  if (jobs.empty()) return out;
  const fs::path batch =
      workdir_ / fmt::format("batch-{}-{:06d}", static_cast<long>(::getpid()), batch_.fetch_add(1));
  const fs::path in_dir = batch / "in";
  const fs::path out_dir = batch / "out";
  fs::create_directories(in_dir);
  fs::create_directories(out_dir);
  for (const ParseJob& job : jobs) {
    write_png(job.image, exchange_image(in_dir, job.key));
    if (job.support.width() > 0) {
      write_mask_png(job.support, exchange_support(in_dir, job.key));
      write_mask_png(job.inject.width() > 0 ? job.inject : Mask(job.support.width(), job.support.height()),
                     exchange_inject(in_dir, job.key));
    }
    const fs::path dir = job.source.parent_path();
    const std::string stem = job.source.stem().string();
    copy_if_exists(dir / (stem + ".annotations.json"), in_dir / (job.key + ".annotations.json"));
    copy_if_exists(dir / (stem + ".glyphs.json"), in_dir / (job.key + ".glyphs.json"));
  }
  const fs::path log = batch / "adapter.log";
  const std::string cmd = fmt::format("{} --in {} --out {} > {} 2>&1", command_,
                                      shell_quote(in_dir.string()), shell_quote(out_dir.string()),
                                      shell_quote(log.string()));
  const int status = std::system(cmd.c_str());
  std::string batch_error;
  if (status == -1) {
    batch_error = "could not start adapter process";
  } else if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    batch_error = fmt::format("adapter exited with status {}",
                              WIFEXITED(status) ? WEXITSTATUS(status) : -1);
    const std::string t = tail(log, 400);
    if (!t.empty()) batch_error += ": " + t;
  }

  std::map<std::string, std::string> statuses;
  const fs::path manifest = out_dir / "manifest.json";
  if (fs::exists(manifest)) {
    try {
      std::ifstream in(manifest, std::ios::binary);
      const auto doc = nlohmann::json::parse(in);
      for (const auto& img : doc.value("images", nlohmann::json::array())) {
        if (img.value("status", "") != "ok") {
          statuses[img.value("key", "")] = img.value("error", std::string("failed"));
        }
      }
    } catch (const nlohmann::json::exception&) {
    }
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const fs::path result = exchange_output(out_dir, jobs[i].key);
    if (fs::exists(result)) {
      try {
        out[i].output = load_parse_output(result);
      } catch (const Error& e) {
        out[i].error = fmt::format("invalid adapter output: {}", e.what());
      }
    } else if (auto it = statuses.find(jobs[i].key); it != statuses.end()) {
      out[i].error = it->second;
    } else {
      out[i].error = batch_error.empty() ? "adapter produced no output" : batch_error;
    }
  }
  if (!keep_files_) {
    std::error_code ec;
    fs::remove_all(batch, ec);
  }
  return out;
}

std::shared_ptr<const GlyphSidecar> MockParserAdapter::sidecar(const fs::path& source) {
  std::lock_guard lock(mutex_);
  auto it = cache_.find(source);
  if (it != cache_.end()) return it->second;
  auto s = std::make_shared<const GlyphSidecar>(load_sidecar(source));
  cache_.emplace(source, s);
  return s;
}

std::vector<ParseOutcome> MockParserAdapter::parse(std::span<const ParseJob> jobs) {
  std::vector<ParseOutcome> out(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      const auto s = sidecar(jobs[i].source);
      out[i].output = mock_parse(*s, jobs[i].support, jobs[i].inject, rules_);
    } catch (const Error& e) {
      out[i].error = e.what();
    }
  }
  return out;
}

nlohmann::json run_mock_batch(const fs::path& in_dir, const fs::path& out_dir,
                              const MockParserRules& rules) {
  if (!fs::is_directory(in_dir)) throw Error(fmt::format("input directory {} not found", in_dir.string()));
  fs::create_directories(out_dir);
  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    if (entry.is_regular_file() && is_exchange_image(entry.path())) images.push_back(entry.path());
  }
  std::sort(images.begin(), images.end());
  nlohmann::json list = nlohmann::json::array();
  for (const fs::path& image : images) {
    const std::string key = image.stem().string();
    nlohmann::json status = {{"key", key}};
    try {
      const cv::Mat pixels = read_page_image(image);
      const GlyphSidecar s = load_sidecar(image);
      Mask support;
      Mask inject;
      if (fs::exists(exchange_support(in_dir, key))) {
        support = read_mask_png(exchange_support(in_dir, key));
        if (fs::exists(exchange_inject(in_dir, key))) inject = read_mask_png(exchange_inject(in_dir, key));
      }
      if (pixels.cols != static_cast<int>(std::lround(s.annotations.page_width)) ||
          pixels.rows != static_cast<int>(std::lround(s.annotations.page_height))) {
        throw Error("image size differs from the sidecar page size");
      }
      write_parse_output(mock_parse(s, support, inject, rules), exchange_output(out_dir, key));
      status["status"] = "ok";
    } catch (const std::exception& e) {
      status["status"] = "failed";
      status["error"] = e.what();
    }
    list.push_back(std::move(status));
  }
  nlohmann::json manifest = {{"parser", "prosa-mock-parser"},
                             {"version", std::string(kMockVersion)},
                             {"models", nlohmann::json::array()},
                             {"input_dir", in_dir.string()},
                             {"output_dir", out_dir.string()},
                             {"images", std::move(list)}};
  std::ofstream out(out_dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  return manifest;
}

}  // namespace prosa
