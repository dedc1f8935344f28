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

#include "prosa/audit.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>

#include "prosa/text.hpp"

namespace prosa {
namespace {

// Bit-parallel LCS over 64-bit blocks: bit i of V is cleared once a[i]
// contributes to the common subsequence (Allison-Dix / Hyyro recurrence).
template <typename CharT>
char32_t code_point(CharT c) noexcept {
  if constexpr (sizeof(CharT) == 1) {
    return static_cast<unsigned char>(c);
  } else {
    return static_cast<char32_t>(c);
  }
}

template <typename CharT>
std::size_t lcs_single_word(std::basic_string_view<CharT> a, std::basic_string_view<CharT> b) {
  thread_local std::array<std::uint64_t, 128> ascii{};
  // Only the first n_other entries are ever read.
  char32_t other_char[64];
  std::uint64_t other_bits[64];
  std::size_t n_other = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const char32_t c = code_point(a[i]);
    const std::uint64_t bit = std::uint64_t{1} << i;
    if (c < 128) {
      ascii[c] |= bit;
      continue;
    }
    std::size_t k = 0;
    while (k < n_other && other_char[k] != c) ++k;
    if (k == n_other) {
      other_char[k] = c;
      other_bits[k] = 0;
      ++n_other;
    }
    other_bits[k] |= bit;
  }
  auto peq = [&](char32_t c) -> std::uint64_t {
    if (c < 128) return ascii[c];
    for (std::size_t k = 0; k < n_other; ++k) {
      if (other_char[k] == c) return other_bits[k];
    }
    return 0;
  };
  std::uint64_t v = ~std::uint64_t{0};
  for (CharT c : b) {
    const std::uint64_t u = v & peq(code_point(c));
    v = (v + u) | (v - u);
  }
  for (CharT c : a) {
    if (code_point(c) < 128) ascii[code_point(c)] = 0;
  }
  const std::uint64_t low =
      a.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << a.size()) - 1;
  return a.size() - static_cast<std::size_t>(std::popcount(v & low));
}

template <typename CharT>
std::size_t lcs_multi_word(std::basic_string_view<CharT> a, std::basic_string_view<CharT> b) {
  const std::size_t words = (a.size() + 63) / 64;
  std::vector<CharT> alphabet(a.begin(), a.end());
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
  std::vector<std::uint64_t> peq(alphabet.size() * words, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto k = static_cast<std::size_t>(
        std::lower_bound(alphabet.begin(), alphabet.end(), a[i]) - alphabet.begin());
    peq[k * words + i / 64] |= std::uint64_t{1} << (i % 64);
  }
  std::vector<std::uint64_t> v(words, ~std::uint64_t{0});
  for (CharT c : b) {
    const auto it = std::lower_bound(alphabet.begin(), alphabet.end(), c);
    if (it == alphabet.end() || *it != c) continue;
    const std::uint64_t* p = &peq[static_cast<std::size_t>(it - alphabet.begin()) * words];
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t u = v[w] & p[w];
      const std::uint64_t sum = v[w] + u;
      const std::uint64_t c1 = sum < v[w] ? 1 : 0;
      const std::uint64_t sum2 = sum + carry;
      const std::uint64_t c2 = sum2 < sum ? 1 : 0;
      v[w] = sum2 | (v[w] - u);
      carry = c1 | c2;
    }
  }
  std::size_t zeros = 0;
  for (std::size_t w = 0; w < words; ++w) {
    std::uint64_t word = v[w];
    const std::size_t bits = std::min<std::size_t>(64, a.size() - w * 64);
    if (bits < 64) word |= ~((std::uint64_t{1} << bits) - 1);
    zeros += static_cast<std::size_t>(64 - std::popcount(word));
  }
  return zeros;
}

// lcs_single_word for 7-bit input: a direct table, nothing else to look up.
std::size_t lcs_ascii_word(std::string_view a, std::string_view b) {
  thread_local std::array<std::uint64_t, 128> table{};
  std::uint64_t* peq = table.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    peq[static_cast<unsigned char>(a[i])] |= std::uint64_t{1} << i;
  }
  std::uint64_t v = ~std::uint64_t{0};
  for (char c : b) {
    const std::uint64_t u = v & peq[static_cast<unsigned char>(c)];
    v = (v + u) | (v - u);
  }
  for (char c : a) peq[static_cast<unsigned char>(c)] = 0;
  const std::uint64_t low =
      a.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << a.size()) - 1;
  return a.size() - static_cast<std::size_t>(std::popcount(v & low));
}

template <typename CharT>
std::size_t lcs_any(std::basic_string_view<CharT> a, std::basic_string_view<CharT> b) {
  if (a.size() > b.size()) std::swap(a, b);
  if (a.empty()) return 0;
  if (a.size() <= 64) {
    if constexpr (sizeof(CharT) == 1) {
      return lcs_ascii_word(a, b);
    } else {
      return lcs_single_word(a, b);
    }
  }
  return lcs_multi_word(a, b);
}

template <typename CharT>
double lcs_ratio(std::basic_string_view<CharT> a, std::basic_string_view<CharT> b) {
  if (a.empty() && b.empty()) return 1.0;
  return static_cast<double>(lcs_any(a, b)) / static_cast<double>(std::max(a.size(), b.size()));
}

bool is_ascii(std::string_view s) noexcept {
  return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

// ASCII form of text::normalize: the same strip and fold without widening.
// is_ascii_space agrees with text::is_space below 0x80.
// Returns a view into in, or into buf when folding changed a byte.
bool is_ascii_space(char c) noexcept {
  return c == ' ' || (c >= '\t' && c <= '\r') || (c >= 0x1C && c <= 0x1F);
}

std::string_view normalize_ascii(std::string_view in, std::string& buf) {
  while (!in.empty() && is_ascii_space(in.front())) in.remove_prefix(1);
  while (!in.empty() && is_ascii_space(in.back())) in.remove_suffix(1);
  if (std::none_of(in.begin(), in.end(), [](char c) { return c >= 'A' && c <= 'Z'; })) return in;
  buf.assign(in);
  for (char& c : buf) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  return buf;
}

// Strip + casefold into a reusable buffer, bounded by kTextSimCap.
bool normalize_into(std::string_view in, std::u32string& out) {
  text::normalize_into(in, out);
  if (out.size() > kTextSimCap) {
    out.resize(kTextSimCap);
    return true;
  }
  return false;
}

bool pixel_hit(const Mask& support, const PixelRect& r) {
  return !r.empty() && support.count(r) > 0;
}

}  // namespace


std::size_t lcs_length(std::u32string_view a, std::u32string_view b) { return lcs_any(a, b); }

double text_sim_normalized(std::u32string_view a, std::u32string_view b) { return lcs_ratio(a, b); }

TextSimResult text_sim_checked(std::string_view a, std::string_view b) {
  if (is_ascii(a) && is_ascii(b)) {
    thread_local std::string fa;
    thread_local std::string fb;
    std::string_view na = normalize_ascii(a, fa);
    std::string_view nb = normalize_ascii(b, fb);
    TextSimResult r;
    r.truncated = na.size() > kTextSimCap || nb.size() > kTextSimCap;
    na = na.substr(0, kTextSimCap);
    nb = nb.substr(0, kTextSimCap);
    r.value = lcs_ratio(na, nb);
    return r;
  }
  thread_local std::u32string na;
  thread_local std::u32string nb;
  TextSimResult r;
  r.truncated = normalize_into(a, na);
  r.truncated = normalize_into(b, nb) || r.truncated;
  r.value = text_sim_normalized(na, nb);
  return r;
}

MatchResult match(const ParseOutput& clean, const ParseOutput& adv,
                  const AuditThresholds& thresholds) {
  MatchResult out;
  out.elements.resize(clean.elements.size());
  out.multiplicity.assign(adv.elements.size(), 0);
  for (std::size_t i = 0; i < clean.elements.size(); ++i) {
    ElementMatch& m = out.elements[i];
    if (adv.elements.empty()) continue;
    const BBox& box = clean.elements[i].box;
    std::size_t best = 0;
    double best_iou = -1.0;
    for (std::size_t j = 0; j < adv.elements.size(); ++j) {
      const double v = iou(box, adv.elements[j].box);
      if (v > best_iou) {
        best_iou = v;
        best = j;
      }
    }
    m.adv_index = best;
    m.iou = best_iou;
    const TextSimResult ts =
        text_sim_checked(clean.elements[i].text, adv.elements[best].text);
    m.text_sim = ts.value;
    m.truncated = ts.truncated;
    m.aligned = m.iou >= thresholds.tau_iou && m.text_sim >= thresholds.tau_text;
    if (best_iou > 0.0) ++out.multiplicity[best];
  }
  return out;
}

std::optional<BSlr> b_slr(const MatchResult& result, const AuditThresholds& thresholds) {
  if (result.elements.empty()) return std::nullopt;
  BSlr s;
  s.total = result.elements.size();
  for (const ElementMatch& m : result.elements) {
    if (m.aligned) continue;
    ++s.failed;
    if (m.iou < thresholds.tau_iou) {
      ++s.iou_failed;
    } else {
      ++s.text_failed;
    }
  }
  const auto n = static_cast<double>(s.total);
  s.b_slr = static_cast<double>(s.failed) / n;
  s.iou_only = static_cast<double>(s.iou_failed) / n;
  s.text_only = static_cast<double>(s.text_failed) / n;
  return s;
}

double occlusion_ratio(const BBox& box, const Mask& support) {
  const PixelRect r = rasterize(box, support.width(), support.height());
  if (r.empty()) return 0.0;
  return static_cast<double>(support.count(r)) / static_cast<double>(r.area());
}

std::string_view to_string(Pathway p) noexcept {
  switch (p) {
    case Pathway::kIntact: return "intact";
    case Pathway::kMiss: return "miss";
    case Pathway::kMerge: return "merge";
    case Pathway::kMisclass: return "misclass";
    case Pathway::kDegraded: return "degraded";
  }
  return "intact";
}

PathwayAttribution attribute_pathways(const MatchResult& result,
                                      const ParseOutput& clean,
                                      const ParseOutput& adv, const Mask& support,
                                      const AuditThresholds& thresholds) {
  if (result.elements.size() != clean.elements.size()) {
    throw Error("match result does not belong to this clean parse");
  }
  PathwayAttribution out;
  const std::size_t n = clean.elements.size();
  out.labels.resize(n, Pathway::kIntact);
  out.rho.resize(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const ElementMatch& m = result.elements[i];
    out.rho[i] = occlusion_ratio(clean.elements[i].box, support);
    Pathway label = Pathway::kIntact;
    if (m.aligned) {
      label = Pathway::kIntact;
    } else if (out.rho[i] >= thresholds.eta_occ) {
      label = Pathway::kMiss;
    } else if (m.adv_index && result.multiplicity[*m.adv_index] > 1) {
      label = Pathway::kMerge;
    } else if (m.adv_index && m.iou >= thresholds.tau_iou &&
               clean.elements[i].category != adv.elements[*m.adv_index].category) {
      label = Pathway::kMisclass;
    } else {
      label = Pathway::kDegraded;
    }
    out.labels[i] = label;
    switch (label) {
      case Pathway::kIntact: ++out.n_intact; break;
      case Pathway::kMiss: ++out.n_miss; break;
      case Pathway::kMerge: ++out.n_merge; break;
      case Pathway::kMisclass: ++out.n_misclass; break;
      case Pathway::kDegraded: ++out.n_degraded; break;
    }
  }
  if (n > 0) {
    const auto total = static_cast<double>(n);
    out.slr_miss = static_cast<double>(out.n_miss) / total;
    out.slr_topo =
        static_cast<double>(out.n_merge + out.n_misclass + out.n_degraded) / total;
  }
  return out;
}

AnnotationGeometry::AnnotationGeometry(const AnnotationSet& annotations, int width,
                                       int height, int delta) {
  const auto boxes = boxes_of(annotations.elements);
  region_ = union_of_boxes(boxes, width, height);
  boundary_ = boundary_band(boxes, width, height, delta);
  rects_.reserve(boxes.size());
  for (const BBox& b : boxes) rects_.push_back(rasterize(b, width, height));
}

ExposureDescriptors exposure(const Mask& support, const AnnotationGeometry* annotations,
                             const ParseOutput& clean) {
  ExposureDescriptors d;
  const double page = static_cast<double>(support.pixel_count());
  const std::size_t area = support.count();
  d.tor = page > 0 ? static_cast<double>(area) / page : 0.0;
  if (annotations != nullptr) {
    const std::size_t region = annotations->region().count();
    if (region > 0) {
      d.acr = static_cast<double>(support.count_and(annotations->region())) /
              static_cast<double>(region);
    }
    const std::size_t band = annotations->boundary().count();
    if (band > 0) {
      d.bpo = static_cast<double>(support.count_and(annotations->boundary())) /
              static_cast<double>(band);
    }
    const auto& rects = annotations->rects();
    if (!rects.empty()) {
      std::size_t hits = 0;
      if (area > 0) {
        for (const PixelRect& r : rects) hits += pixel_hit(support, r) ? 1 : 0;
      }
      d.boc = static_cast<double>(hits) / static_cast<double>(rects.size());
    }
  }
  if (!clean.elements.empty() && area > 0) {
    std::size_t hits = 0;
    for (const LayoutElement& e : clean.elements) {
      hits += pixel_hit(support, rasterize(e.box, support.width(), support.height())) ? 1 : 0;
    }
    d.eir = static_cast<double>(hits) / static_cast<double>(clean.elements.size());
  }
  return d;
}

ExposureDescriptors exposure(const Mask& support, const AnnotationSet* annotations,
                             const ParseOutput& clean, int delta) {
  if (annotations == nullptr) return exposure(support, static_cast<const AnnotationGeometry*>(nullptr), clean);
  const AnnotationGeometry geometry(*annotations, support.width(), support.height(), delta);
  return exposure(support, &geometry, clean);
}

}  // namespace prosa
