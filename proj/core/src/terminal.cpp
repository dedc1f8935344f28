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

#include "prosa/terminal.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <vector>

#include "prosa/text.hpp"

namespace prosa {
namespace {

// Myers / Hyyro bit-vector edit distance for patterns of at most 64 symbols.
std::size_t levenshtein_bits(std::u32string_view a, std::u32string_view b) {
  thread_local std::array<std::uint64_t, 128> ascii{};
  std::array<std::pair<char32_t, std::uint64_t>, 64> other{};
  std::size_t n_other = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const char32_t c = a[i];
    const std::uint64_t bit = std::uint64_t{1} << i;
    if (c < 128) {
      ascii[c] |= bit;
      continue;
    }
    std::size_t k = 0;
    while (k < n_other && other[k].first != c) ++k;
    if (k == n_other) other[n_other++] = {c, 0};
    other[k].second |= bit;
  }
  auto peq = [&](char32_t c) -> std::uint64_t {
    if (c < 128) return ascii[c];
    for (std::size_t k = 0; k < n_other; ++k) {
      if (other[k].first == c) return other[k].second;
    }
    return 0;
  };
  const std::uint64_t high = std::uint64_t{1} << (a.size() - 1);
  std::uint64_t pv = ~std::uint64_t{0};
  std::uint64_t mv = 0;
  std::size_t score = a.size();
  for (char32_t c : b) {
    const std::uint64_t eq = peq(c);
    const std::uint64_t xv = eq | mv;
    const std::uint64_t xh = (((eq & pv) + pv) ^ pv) | eq;
    std::uint64_t ph = mv | ~(xh | pv);
    std::uint64_t mh = pv & xh;
    if (ph & high) {
      ++score;
    } else if (mh & high) {
      --score;
    }
    ph = (ph << 1) | 1;
    mh <<= 1;
    pv = mh | ~(xv | ph);
    mv = ph & xv;
  }
  for (char32_t c : a) {
    if (c < 128) ascii[c] = 0;
  }
  return score;
}

std::size_t levenshtein_rows(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> row(a.size() + 1);
  for (std::size_t i = 0; i <= a.size(); ++i) row[i] = i;
  for (std::size_t j = 1; j <= b.size(); ++j) {
    std::size_t diag = row[0];
    row[0] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      const std::size_t up = row[i];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[i] = std::min({up + 1, row[i - 1] + 1, sub});
      diag = up;
    }
  }
  return row[a.size()];
}

double average_precision(const std::vector<bool>& tp, std::size_t n_truth) {
  if (n_truth == 0) return 0.0;
  const std::size_t n = tp.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (tp[k]) ++hits;
    precision[k] = static_cast<double>(hits) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(hits) / static_cast<double>(n_truth);
  }
  for (std::size_t k = n; k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (recall[k] > prev_recall) {
      ap += (recall[k] - prev_recall) * precision[k];
      prev_recall = recall[k];
    }
  }
  return ap;
}

}  // namespace

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() > b.size()) std::swap(a, b);
  if (a.empty()) return b.size();
  if (a.size() <= 64) return levenshtein_bits(a, b);
  return levenshtein_rows(a, b);
}

double cer_element(std::string_view reference, std::string_view hypothesis,
                   bool overlapped) {
  thread_local std::u32string r;
  thread_local std::u32string h;
  text::normalize_into(reference, r);
  if (r.empty()) throw Error("CER reference text is empty after normalization");
  if (!overlapped) return 1.0;
  text::normalize_into(hypothesis, h);
  return static_cast<double>(levenshtein(r, h)) / static_cast<double>(r.size());
}

double mean_cer(const ParseOutput& clean, const ParseOutput& adv,
                const MatchResult& matches) {
  if (matches.elements.size() != clean.elements.size()) {
    throw Error("match result does not belong to this clean parse");
  }
  double sum = 0.0;
  std::size_t count = 0;
  std::u32string probe;
  for (std::size_t i = 0; i < clean.elements.size(); ++i) {
    text::normalize_into(clean.elements[i].text, probe);
    if (probe.empty()) continue;
    const ElementMatch& m = matches.elements[i];
    const bool overlapped = m.adv_index.has_value() && m.iou > 0.0;
    const std::string_view hyp =
        overlapped ? std::string_view(adv.elements[*m.adv_index].text) : std::string_view();
    sum += cer_element(clean.elements[i].text, hyp, overlapped);
    ++count;
  }
  return count == 0 ? 1.0 : sum / static_cast<double>(count);
}

std::optional<double> map50(const AnnotationSet& truth, const ParseOutput& predictions) {
  std::map<Category, std::vector<std::size_t>> gt_by_class;
  for (std::size_t i = 0; i < truth.elements.size(); ++i) {
    gt_by_class[truth.elements[i].category].push_back(i);
  }
  if (gt_by_class.empty()) return std::nullopt;
  double total = 0.0;
  for (const auto& [category, gt] : gt_by_class) {
    std::vector<bool> used(gt.size(), false);
    std::vector<bool> tp;
    for (const LayoutElement& p : predictions.elements) {
      if (p.category != category) continue;
      double best = -1.0;
      std::size_t best_k = 0;
      for (std::size_t k = 0; k < gt.size(); ++k) {
        const double v = iou(p.box, truth.elements[gt[k]].box);
        if (v > best) {
          best = v;
          best_k = k;
        }
      }
      const bool hit = best >= kMapIou && !used[best_k];
      if (hit) used[best_k] = true;
      tp.push_back(hit);
    }
    total += average_precision(tp, gt.size());
  }
  return total / static_cast<double>(gt_by_class.size());
}

std::optional<double> delta_map(const AnnotationSet& truth, const ParseOutput& clean,
                                const ParseOutput& adv) {
  const auto a = map50(truth, clean);
  const auto b = map50(truth, adv);
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

TerminalScores terminal_scores(const ParseOutput& clean, const ParseOutput& adv,
                               const MatchResult& matches,
                               const AnnotationSet* truth) {
  TerminalScores s;
  s.cer_matched_mean = mean_cer(clean, adv, matches);
  if (truth != nullptr) {
    s.map_clean = map50(*truth, clean);
    s.map_adv = map50(*truth, adv);
    if (s.map_clean && s.map_adv) s.delta_map = *s.map_clean - *s.map_adv;
  }
  return s;
}

}  // namespace prosa
