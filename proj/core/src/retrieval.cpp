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

#include "prosa/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "prosa/text.hpp"

namespace prosa {
namespace {

constexpr std::size_t kTopK = 10;

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

std::size_t snap_back(const std::string& s, std::size_t pos) {
  while (pos > 0 && pos < s.size() && is_continuation(static_cast<unsigned char>(s[pos]))) --pos;
  return pos;
}

std::size_t lookup(const std::vector<std::pair<std::string, std::size_t>>& v, const std::string& key) {
  auto it = std::lower_bound(v.begin(), v.end(), key,
                             [](const auto& p, const std::string& k) { return p.first < k; });
  return it != v.end() && it->first == key ? it->second : 0;
}

}  // namespace

std::string page_text(const ParseOutput& parse) {
  std::string out;
  for (const LayoutElement& e : parse.elements) {
    if (e.text.empty()) continue;
    if (!out.empty()) out += '\n';
    out += e.text;
  }
  return out;
}

std::vector<Chunk> chunk(const ParseOutput& parse, const ChunkOptions& options) {
  std::string text;
  std::vector<std::size_t> starts;  // element start offsets
  std::vector<std::size_t> owners;
  for (std::size_t i = 0; i < parse.elements.size(); ++i) {
    const std::string& t = parse.elements[i].text;
    if (t.empty()) continue;
    if (!text.empty()) text += '\n';
    starts.push_back(text.size());
    owners.push_back(i);
    text += t;
  }
  std::vector<Chunk> out;
  const std::size_t n = text.size();
  if (n == 0) return out;

  auto make = [&](std::size_t b, std::size_t e) {
    Chunk c;
    c.begin = b;
    c.end = e;
    c.text = text.substr(b, e - b);
    for (std::size_t k = 0; k < starts.size(); ++k) {
      const std::size_t s = starts[k];
      const std::size_t f = k + 1 < starts.size() ? starts[k + 1] - 1 : n;
      if (s < e && f > b) c.elements.push_back(owners[k]);
    }
    out.push_back(std::move(c));
  };

  std::size_t begin = 0;
  while (true) {
    if (n - begin <= options.max) {
      make(begin, n);
      break;
    }
    const std::size_t lo = begin + options.min;
    const std::size_t hi = std::min(begin + options.max, n - options.min - 1);
    const std::size_t goal = begin + options.target;
    std::optional<std::size_t> cut;
    for (std::size_t s : starts) {
      // A boundary cut ends the chunk before the separating newline.
      const std::size_t e = s == 0 ? 0 : s - 1;
      if (e < lo || e > hi) continue;
      const auto dist = [&](std::size_t x) { return x > goal ? x - goal : goal - x; };
      if (!cut || dist(e) < dist(*cut)) cut = e;
    }
    if (cut) {
      make(begin, *cut);
      begin = *cut + 1;
    } else {
      const std::size_t e = snap_back(text, std::min(goal, n - options.min));
      make(begin, e);
      begin = snap_back(text, e - options.overlap);
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view input) {
  std::vector<std::string> out;
  const std::u32string folded = text::normalize(input);
  std::u32string current;
  for (char32_t c : folded) {
    if (text::is_space(c)) {
      if (!current.empty()) out.push_back(text::encode_utf8(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) out.push_back(text::encode_utf8(current));
  return out;
}

Bm25Index::Bm25Index(std::span<const Chunk> chunks, Bm25Params params) : params_(params) {
  std::map<std::string, std::size_t> df;
  double total = 0.0;
  for (const Chunk& c : chunks) {
    std::map<std::string, std::size_t> tf;
    const auto tokens = tokenize(c.text);
    for (const auto& t : tokens) ++tf[t];
    Doc d;
    d.length = tokens.size();
    total += static_cast<double>(d.length);
    for (auto& [term, count] : tf) {
      ++df[term];
      d.terms.emplace_back(term, count);
    }
    docs_.push_back(std::move(d));
  }
  df_.assign(df.begin(), df.end());
  avgdl_ = docs_.empty() ? 0.0 : total / static_cast<double>(docs_.size());
}

std::vector<double> Bm25Index::scores(std::string_view query) const {
  std::vector<double> out(docs_.size(), 0.0);
  if (docs_.empty()) return out;
  const double n_docs = static_cast<double>(docs_.size());
  for (const std::string& term : tokenize(query)) {
    const double n = static_cast<double>(lookup(df_, term));
    if (n == 0.0) continue;
    const double idf = std::log((n_docs - n + 0.5) / (n + 0.5) + 1.0);
    for (std::size_t i = 0; i < docs_.size(); ++i) {
      const double f = static_cast<double>(lookup(docs_[i].terms, term));
      if (f == 0.0) continue;
      const double norm = avgdl_ > 0.0 ? static_cast<double>(docs_[i].length) / avgdl_ : 0.0;
      out[i] += idf * f * (params_.k1 + 1.0) / (f + params_.k1 * (1.0 - params_.b + params_.b * norm));
    }
  }
  return out;
}

std::vector<std::size_t> Bm25Index::rank(std::string_view query, std::size_t k) const {
  const auto s = scores(query);
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  if (order.size() > k) order.resize(k);
  return order;
}

std::vector<std::size_t> dense_rank(DenseEncoder& encoder, std::string_view query,
                                    std::span<const Chunk> chunks, std::size_t k) {
  const auto q = encoder.embed(query);
  auto cosine = [&](const std::vector<float>& v) {
    double dot = 0.0;
    double nq = 0.0;
    double nv = 0.0;
    for (std::size_t i = 0; i < std::min(q.size(), v.size()); ++i) {
      dot += static_cast<double>(q[i]) * v[i];
      nq += static_cast<double>(q[i]) * q[i];
      nv += static_cast<double>(v[i]) * v[i];
    }
    return nq > 0.0 && nv > 0.0 ? dot / std::sqrt(nq * nv) : 0.0;
  };
  std::vector<double> s;
  for (const Chunk& c : chunks) s.push_back(cosine(encoder.embed(c.text)));
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  if (order.size() > k) order.resize(k);
  return order;
}

bool contains_normalized(std::string_view haystack, std::string_view needle) {
  const std::u32string n = text::normalize(needle);
  const std::u32string h = text::normalize(haystack);
  return h.find(n) != std::u32string::npos;
}

QaOutcome evaluate_qa(const QaPair& qa, const ParseOutput& parse, std::span<const Chunk> chunks,
                      std::span<const std::size_t> ranked) {
  QaOutcome out;
  out.answer_missing = !contains_normalized(page_text(parse), qa.answer);
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const std::string& t = chunks[ranked[r]].text;
    if (out.answer_rank == 0 && contains_normalized(t, qa.answer)) out.answer_rank = r + 1;
    if (out.evidence_rank == 0 && contains_normalized(t, qa.evidence)) out.evidence_rank = r + 1;
  }
  return out;
}

RetrievalMetrics aggregate_metrics(std::span<const QaOutcome> outcomes) {
  RetrievalMetrics m;
  m.n = outcomes.size();
  if (m.n == 0) return m;
  auto hit = [](std::size_t rank, std::size_t k) { return rank > 0 && rank <= k ? 1.0 : 0.0; };
  for (const QaOutcome& o : outcomes) {
    m.answer_hit_1 += hit(o.answer_rank, 1);
    m.answer_hit_5 += hit(o.answer_rank, 5);
    m.answer_hit_10 += hit(o.answer_rank, 10);
    m.recall_1 += hit(o.evidence_rank, 1);
    m.recall_5 += hit(o.evidence_rank, 5);
    m.recall_10 += hit(o.evidence_rank, 10);
    if (o.evidence_rank > 0 && o.evidence_rank <= 10) {
      m.mrr_10 += 1.0 / static_cast<double>(o.evidence_rank);
    }
    m.answer_missing += o.answer_missing ? 1.0 : 0.0;
  }
  const double scale = 100.0 / static_cast<double>(m.n);
  for (double* v : {&m.answer_hit_1, &m.answer_hit_5, &m.answer_hit_10, &m.recall_1, &m.recall_5,
                    &m.recall_10, &m.answer_missing}) {
    *v *= scale;
  }
  m.mrr_10 /= static_cast<double>(m.n);
  return m;
}

std::vector<QaOutcome> evaluate_page_bm25(std::span<const QaPair> qa, const ParseOutput& parse,
                                          const ChunkOptions& options) {
  const auto chunks = chunk(parse, options);
  const Bm25Index index(chunks);
  std::vector<QaOutcome> out;
  for (const QaPair& q : qa) {
    const auto ranked = index.rank(q.question, kTopK);
    out.push_back(evaluate_qa(q, parse, chunks, ranked));
  }
  return out;
}

}  // namespace prosa
