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
// prosa-mock-parser --in <dir> --out <dir>: the synthetic-page mock parser
// behind the subprocess adapter exchange.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "prosa/adapter.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mock layout parser for synthetic pages"};
  std::string in_dir;
  std::string out_dir;
  prosa::MockParserRules rules;
  std::string fail_key;
  app.add_option("--in", in_dir, "Directory of <key>.png pages with sidecars")->required();
  app.add_option("--out", out_dir, "Directory for <key>.json outputs")->required();
  app.add_option("--drop", rules.drop, "Occlusion ratio at which an element disappears");
  app.add_option("--misclass", rules.misclass, "Boundary coverage that flips text and title");
  app.add_option("--fail-key", fail_key, "Report every key containing this text as failed");
  CLI11_PARSE(app, argc, argv);

  try {
    auto manifest = prosa::run_mock_batch(in_dir, out_dir, rules);
    if (!fail_key.empty()) {
      for (auto& img : manifest["images"]) {
        const std::string key = img["key"].get<std::string>();
        if (key.find(fail_key) == std::string::npos) continue;
        std::filesystem::remove(prosa::exchange_output(out_dir, key));
        img["status"] = "failed";
        img["error"] = "injected failure";
      }
      std::ofstream out(std::filesystem::path(out_dir) / "manifest.json", std::ios::binary);
      out << manifest.dump(2) << '\n';
    }
    std::size_t failed = 0;
    for (const auto& img : manifest["images"]) failed += img["status"] == "ok" ? 0 : 1;
    std::cerr << fmt::format("parsed {} page(s), {} failed\n", manifest["images"].size() - failed, failed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
