// Copyright 2026 The stackkd Authors.
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

#include "stackkd/grapheme.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace stackkd {

extern const char* const kBengaliNormalizationTsv;

namespace {

constexpr char32_t kVirama = 0x09CD;
constexpr char32_t kNukta = 0x09BC;
constexpr char32_t kZwnj = 0x200C;
constexpr char32_t kZwj = 0x200D;

bool is_consonant(char32_t c) {
  return (c >= 0x0995 && c <= 0x09B9) || c == 0x09DC || c == 0x09DD || c == 0x09DF ||
         c == 0x09F0 || c == 0x09F1;
}

bool is_joiner(char32_t c) { return c == kZwj || c == kZwnj; }

// Consonant core: a consonant and any nukta marks following it.
std::size_t consume_core(std::u32string_view s, std::size_t i) {
  ++i;
  while (i < s.size() && s[i] == kNukta) ++i;
  return i;
}

std::size_t cluster_end(std::u32string_view s, std::size_t start) {
  std::size_t j = consume_core(s, start);
  while (j < s.size()) {
    std::size_t k = j;
    // ZWJ before hasanta (ra-phala rendering control) stays in the cluster.
    while (k < s.size() && is_joiner(s[k])) ++k;
    if (k >= s.size() || s[k] != kVirama) break;
    ++k;
    while (k < s.size() && is_joiner(s[k])) ++k;
    if (k < s.size() && is_consonant(s[k])) {
      j = consume_core(s, k);
      continue;
    }
    // Orphan hasanta: attach it (and trailing joiners) to this cluster.
    j = k;
    break;
  }
  return j;
}

std::u32string parse_codepoints(std::string_view field, std::size_t line_no) {
  std::u32string out;
  std::istringstream in{std::string(field)};
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(tok, &used, 16);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || v > 0x10FFFF)
      throw Error("normalization rules line " + std::to_string(line_no) + ": bad code point '" +
                  tok + "'");
    out.push_back(static_cast<char32_t>(v));
  }
  return out;
}

std::string format_codepoints(std::u32string_view cps) {
  std::string out;
  char buf[16];
  for (char32_t c : cps) {
    std::snprintf(buf, sizeof buf, "%04X", static_cast<unsigned>(c));
    if (!out.empty()) out += ' ';
    out += buf;
  }
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::u32string utf8_to_u32(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    auto c = static_cast<unsigned char>(text[i]);
    char32_t cp = 0;
    int extra = 0;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6) {
      cp = c & 0x1F;
      extra = 1;
    } else if ((c >> 4) == 0xE) {
      cp = c & 0x0F;
      extra = 2;
    } else if ((c >> 3) == 0x1E) {
      cp = c & 0x07;
      extra = 3;
    } else {
      throw Error("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    for (int k = 1; k <= extra; ++k) {
      if (i + k >= text.size()) throw Error("truncated UTF-8 sequence at offset " + std::to_string(i));
      auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc >> 6) != 0x2) throw Error("invalid UTF-8 continuation at offset " + std::to_string(i + k));
      cp = (cp << 6) | (cc & 0x3F);
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

std::string u32_to_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size() * 3);
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }
  return out;
}

std::string join_graphemes(std::span<const Grapheme> graphemes) {
  std::string out;
  for (const auto& g : graphemes) out += g.text();
  return out;
}

// --- normalization ---------------------------------------------------------

NormalizationRules::NormalizationRules(std::vector<Rule> rules) : rules_(std::move(rules)) {
  for (const auto& r : rules_) {
    if (r.from.empty()) throw Error("normalization rule with empty source");
    longest_ = std::max(longest_, r.from.size());
  }
  // Longest source first so that the first hit at a position is the longest.
  std::stable_sort(rules_.begin(), rules_.end(),
                   [](const Rule& a, const Rule& b) { return a.from.size() > b.from.size(); });
}

const NormalizationRules& NormalizationRules::bengali_default() {
  static const NormalizationRules rules = parse_tsv(kBengaliNormalizationTsv);
  return rules;
}

NormalizationRules NormalizationRules::parse_tsv(std::string_view text) {
  std::vector<Rule> rules;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2)
      throw Error("normalization rules line " + std::to_string(line_no) + ": expected 2 columns");
    rules.push_back({parse_codepoints(cols[0], line_no), parse_codepoints(cols[1], line_no)});
  }
  return NormalizationRules(std::move(rules));
}

NormalizationRules NormalizationRules::load_tsv(const std::filesystem::path& path) {
  return parse_tsv(read_file(path));
}

std::string NormalizationRules::to_tsv() const {
  std::string out;
  for (const auto& r : rules_) out += format_codepoints(r.from) + '\t' + format_codepoints(r.to) + '\n';
  return out;
}

std::u32string NormalizationRules::apply(std::u32string_view text) const {
  std::u32string cur(text);
  constexpr int kMaxPasses = 16;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    std::u32string next;
    next.reserve(cur.size());
    bool changed = false;
    for (std::size_t i = 0; i < cur.size();) {
      const Rule* hit = nullptr;
      for (const auto& r : rules_) {
        if (r.from.size() <= cur.size() - i &&
            std::u32string_view(cur).substr(i, r.from.size()) == r.from) {
          hit = &r;
          break;
        }
      }
      if (hit) {
        next += hit->to;
        i += hit->from.size();
        changed = true;
      } else {
        next += cur[i++];
      }
    }
    if (!changed) return cur;
    cur = std::move(next);
  }
  throw Error("normalization rules do not reach a fixed point");
}

std::string normalize_text(std::string_view raw) {
  return normalize_text(raw, NormalizationRules::bengali_default());
}

std::string normalize_text(std::string_view raw, const NormalizationRules& rules) {
  return u32_to_utf8(rules.apply(utf8_to_u32(raw)));
}

// --- extraction --------------------------------------------------------------

GraphemeSequence extract_graphemes(std::string_view label) {
  const std::u32string s = utf8_to_u32(label);
  GraphemeSequence out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char32_t c = s[i];
    std::size_t end;
    if (is_consonant(c)) {
      end = cluster_end(s, i);
    } else if ((c == kVirama || is_joiner(c) || c == kNukta) && !out.empty()) {
      // Stray hasanta, joiner or nukta: glue onto the previous grapheme.
      end = i + 1;
      std::u32string prev = out.back().codepoints();
      prev += c;
      out.back() = Grapheme(u32_to_utf8(prev));
      i = end;
      continue;
    } else {
      end = i + 1;
    }
    out.emplace_back(u32_to_utf8(std::u32string_view(s).substr(i, end - i)));
    i = end;
  }
  return out;
}

// --- inventory ---------------------------------------------------------------

bool operator==(const InventoryEntry& a, const InventoryEntry& b) {
  return a.grapheme == b.grapheme && a.index == b.index && a.support == b.support;
}

bool operator==(const GraphemeInventory& a, const GraphemeInventory& b) {
  return a.entries_ == b.entries_;
}

GraphemeInventory GraphemeInventory::from_counts(const std::map<Grapheme, std::uint64_t>& counts,
                                                 std::string source_tag) {
  std::vector<InventoryEntry> entries;
  entries.reserve(counts.size());
  for (const auto& [g, n] : counts) entries.push_back({g, 0, n});
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.support != b.support) return a.support > b.support;
    return a.grapheme < b.grapheme;
  });
  return from_entries(std::move(entries), std::move(source_tag));
}

GraphemeInventory GraphemeInventory::from_entries(std::vector<InventoryEntry> entries,
                                                  std::string source_tag) {
  GraphemeInventory inv;
  inv.source_tag_ = std::move(source_tag);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].grapheme.empty()) throw Error("inventory entry with empty grapheme");
    entries[i].index = i;
    if (!inv.lookup_.emplace(entries[i].grapheme.text(), i).second)
      throw Error("duplicate grapheme in inventory: " + entries[i].grapheme.text());
  }
  inv.entries_ = std::move(entries);
  return inv;
}

std::optional<std::size_t> GraphemeInventory::index_of(const Grapheme& g) const {
  auto it = lookup_.find(g.text());
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t GraphemeInventory::support(const Grapheme& g) const {
  auto idx = index_of(g);
  return idx ? entries_[*idx].support : 0;
}

std::uint64_t GraphemeInventory::max_support() const noexcept {
  std::uint64_t m = 0;
  for (const auto& e : entries_) m = std::max(m, e.support);
  return m;
}

std::uint64_t GraphemeInventory::total_support() const noexcept {
  std::uint64_t t = 0;
  for (const auto& e : entries_) t += e.support;
  return t;
}

std::vector<Grapheme> GraphemeInventory::graphemes() const {
  std::vector<Grapheme> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.grapheme);
  return out;
}

std::vector<int> GraphemeInventory::encode(std::span<const Grapheme> seq) const {
  std::vector<int> out;
  out.reserve(seq.size());
  for (const auto& g : seq) {
    auto idx = index_of(g);
    if (!idx) throw Error("grapheme not in inventory: " + g.text());
    out.push_back(static_cast<int>(*idx));
  }
  return out;
}

GraphemeSequence GraphemeInventory::decode(std::span<const int> indices) const {
  GraphemeSequence out;
  out.reserve(indices.size());
  for (int i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= entries_.size())
      throw Error("class index out of range: " + std::to_string(i));
    out.push_back(entries_[static_cast<std::size_t>(i)].grapheme);
  }
  return out;
}

std::uint64_t GraphemeInventory::fingerprint() const { return fnv1a64(to_tsv()); }

std::string GraphemeInventory::to_tsv() const {
  std::string out;
  for (const auto& e : entries_)
    out += e.grapheme.text() + '\t' + std::to_string(e.index) + '\t' + std::to_string(e.support) + '\n';
  return out;
}

GraphemeInventory GraphemeInventory::parse_tsv(std::string_view text, std::string source_tag) {
  std::vector<InventoryEntry> entries;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3)
      throw Error("inventory line " + std::to_string(line_no) + ": expected 3 columns");
    std::size_t index = 0;
    std::uint64_t support = 0;
    try {
      index = std::stoull(std::string(cols[1]));
      support = std::stoull(std::string(cols[2]));
    } catch (const std::exception&) {
      throw Error("inventory line " + std::to_string(line_no) + ": bad number");
    }
    if (index != entries.size())
      throw Error("inventory line " + std::to_string(line_no) + ": indices must be contiguous from 0");
    entries.push_back({Grapheme(std::string(cols[0])), index, support});
  }
  return from_entries(std::move(entries), std::move(source_tag));
}

void GraphemeInventory::save_tsv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_tsv();
}

GraphemeInventory GraphemeInventory::load_tsv(const std::filesystem::path& path) {
  return parse_tsv(read_file(path), path.filename().string());
}

GraphemeInventory build_inventory(std::span<const std::string> labels, std::string source_tag) {
  std::map<Grapheme, std::uint64_t> counts;
  for (const auto& label : labels)
    for (auto& g : extract_graphemes(label)) ++counts[std::move(g)];
  return GraphemeInventory::from_counts(counts, std::move(source_tag));
}

bool is_minor_support(std::uint64_t support, std::uint64_t max_support) {
  // support < 0.10 * max, in exact integer arithmetic.
  return static_cast<unsigned __int128>(support) * 10 < max_support;
}

MinorMajorSplit split_minor_major(const GraphemeInventory& inv) {
  if (inv.empty()) throw Error("empty inventory");
  const auto max = inv.max_support();
  MinorMajorSplit out;
  for (const auto& e : inv.entries())
    (is_minor_support(e.support, max) ? out.minor : out.major).insert(e.grapheme);
  return out;
}

GraphemeInventory merge_inventories(const GraphemeInventory& a, const GraphemeInventory& b) {
  std::map<Grapheme, std::uint64_t> counts;
  for (const auto& e : a.entries()) counts[e.grapheme] += e.support;
  for (const auto& e : b.entries()) counts[e.grapheme] += e.support;
  std::string tag = a.source_tag();
  if (!b.source_tag().empty()) tag += (tag.empty() ? "" : "+") + b.source_tag();
  return GraphemeInventory::from_counts(counts, std::move(tag));
}

}  // namespace stackkd
