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

#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "prosa/audit.hpp"
#include "prosa/config_matrix.hpp"
#include "prosa/page_audit.hpp"
#include "prosa/placement.hpp"
#include "prosa/retrieval.hpp"
#include "prosa/rng.hpp"
#include "prosa/synthetic.hpp"
#include "prosa/terminal.hpp"
#include "prosa/text.hpp"

namespace {

using namespace prosa;

std::string random_text(Rng& rng, std::size_t n) {
  static const char kChars[] = "abcdefghij klmnopqrstuvwxyz";
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += kChars[rng.uniform_int(0, sizeof(kChars) - 2)];
  return s;
}

const SyntheticPage& page() {
  static const SyntheticPage p = generate_page(PageSpec{}, "bench");
  return p;
}

ParseOutput clean_of(const SyntheticPage& p) {
  ParseOutput out;
  out.page_id = "bench";
  out.page_width = p.image.cols;
  out.page_height = p.image.rows;
  out.elements = p.annotations.elements;
  return out;
}

void BM_TextSim(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::string a = random_text(rng, n);
  const std::string b = random_text(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(text_sim(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TextSim)->RangeMultiplier(4)->Range(8, 8 << 10)->Complexity();

void BM_TextSimUtf8(benchmark::State& state) {
  Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::string a = random_text(rng, n) + "\xc3\xa9";
  const std::string b = random_text(rng, n) + "\xc3\xa9";
  for (auto _ : state) benchmark::DoNotOptimize(text_sim(a, b));
}
BENCHMARK(BM_TextSimUtf8)->RangeMultiplier(8)->Range(8, 4 << 10);

void BM_Levenshtein(benchmark::State& state) {
  Rng rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::u32string a = text::decode_utf8(random_text(rng, n));
  const std::u32string b = text::decode_utf8(random_text(rng, n));
  for (auto _ : state) benchmark::DoNotOptimize(levenshtein(a, b));
}
BENCHMARK(BM_Levenshtein)->RangeMultiplier(4)->Range(8, 2 << 10);

void BM_ApplyProbe(benchmark::State& state, const char* config_id) {
  const SyntheticPage& p = page();
  const PageContext ctx = compute_page_context(p.annotations, p.image.cols, p.image.rows);
  const ProbeConfig probe = instantiate(decode_config(config_id), 0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Rng rng(++seed);
    benchmark::DoNotOptimize(apply_probe(probe, p.image, ctx, rng));
  }
}
BENCHMARK_CAPTURE(BM_ApplyProbe, A01, "A01")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ApplyProbe, A06, "A06")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ApplyProbe, A08, "A08")->Unit(benchmark::kMillisecond);

void BM_PageContext(benchmark::State& state) {
  const SyntheticPage& p = page();
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_page_context(p.annotations, p.image.cols, p.image.rows));
  }
}
BENCHMARK(BM_PageContext)->Unit(benchmark::kMillisecond);

void BM_MockParseAndAudit(benchmark::State& state) {
  const SyntheticPage& p = page();
  const ParseOutput clean = clean_of(p);
  const GlyphSidecar sidecar{p.annotations, p.glyphs};
  const PageContext ctx = compute_page_context(p.annotations, p.image.cols, p.image.rows);
  Rng rng(5);
  const PerturbResult perturbed = apply_probe(instantiate(decode_config("A09"), 0), p.image, ctx, rng);
  const AnnotationGeometry geometry(p.annotations, p.image.cols, p.image.rows);
  for (auto _ : state) {
    const ParseOutput adv = mock_parse(sidecar, perturbed.mask.support, perturbed.mask.inject);
    benchmark::DoNotOptimize(audit_page(clean, adv, perturbed.mask.support, &p.annotations, &geometry));
  }
}
BENCHMARK(BM_MockParseAndAudit)->Unit(benchmark::kMillisecond);

void BM_Bm25Rank(benchmark::State& state) {
  std::vector<Chunk> chunks;
  Rng rng(6);
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    Chunk c;
    c.text = random_text(rng, 400);
    chunks.push_back(std::move(c));
  }
  const Bm25Index index(chunks);
  const std::string query = random_text(rng, 60);
  for (auto _ : state) benchmark::DoNotOptimize(index.rank(query, 10));
}
BENCHMARK(BM_Bm25Rank)->RangeMultiplier(4)->Range(4, 256);

void BM_Chunk(benchmark::State& state) {
  const ParseOutput clean = clean_of(page());
  for (auto _ : state) benchmark::DoNotOptimize(chunk(clean));
}
BENCHMARK(BM_Chunk);

}  // namespace

BENCHMARK_MAIN();
