#include "spo/text.hpp"

#include <algorithm>

namespace spo {

bool is_ascii_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::size_t codepoint_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

}  // namespace

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size();) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    // U+2018 / U+2019 / U+00A0
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(text[i + 2]) == 0x98 || static_cast<unsigned char>(text[i + 2]) == 0x99)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back('\'');
      i += 3;
      continue;
    }
    if (c == 0xC2 && i + 1 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0xA0) {
      pending_space = true;
      i += 2;
      continue;
    }
    if (is_space(c)) {
      pending_space = true;
      ++i;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    out.push_back(static_cast<char>(c));
    ++i;
  }
  return out;
}

std::vector<KeywordMatch> find_keywords(std::string_view text, const KeywordLexicon& lexicon,
                                        KeywordScope scope) {
  std::vector<KeywordMatch> all;
  for (const auto& entry : lexicon.entries) {
    if (!entry.usable_for(scope)) continue;
    const std::string& kw = entry.normalized;
    if (kw.empty()) continue;
    const bool word_start = is_ascii_alnum(kw.front());
    const bool word_end = is_ascii_alnum(kw.back());
    std::size_t pos = 0;
    while ((pos = text.find(kw, pos)) != std::string_view::npos) {
      std::size_t end = pos + kw.size();
      bool ok = !(word_start && pos > 0 && is_ascii_alnum(text[pos - 1]));
      if (ok && word_end && end < text.size() && is_ascii_alnum(text[end])) {
        // plural forms
        if (text[end] == 's' && (end + 1 == text.size() || !is_ascii_alnum(text[end + 1]))) {
          end += 1;
        } else if (text.compare(end, 2, "es") == 0 &&
                   (end + 2 == text.size() || !is_ascii_alnum(text[end + 2]))) {
          end += 2;
        } else {
          ok = false;
        }
      }
      if (ok) all.push_back({pos, end, &entry});
      ++pos;
    }
  }
  std::vector<KeywordMatch> kept;
  for (const auto& m : all) {
    bool contained = std::any_of(all.begin(), all.end(), [&](const KeywordMatch& o) {
      return &o != &m && o.begin <= m.begin && m.end <= o.end && (o.end - o.begin) > (m.end - m.begin);
    });
    if (!contained) kept.push_back(m);
  }
  std::sort(kept.begin(), kept.end(), [](const KeywordMatch& a, const KeywordMatch& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    if (a.end != b.end) return a.end > b.end;
    return a.entry->item < b.entry->item;
  });
  // identical spans from distinct entries of the same item collapse
  kept.erase(std::unique(kept.begin(), kept.end(),
                         [](const KeywordMatch& a, const KeywordMatch& b) {
                           return a.begin == b.begin && a.end == b.end && a.entry->item == b.entry->item;
                         }),
             kept.end());
  return kept;
}

ItemSet match_keywords(std::string_view text, const KeywordLexicon& lexicon, KeywordScope scope) {
  ItemSet out;
  const std::string norm = normalize_text(text);
  for (const auto& m : find_keywords(norm, lexicon, scope)) out.insert(m.entry->item);
  return out;
}

std::vector<std::string_view> utf8_codepoints(std::string_view s) {
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t n = std::min(codepoint_length(static_cast<unsigned char>(s[i])), s.size() - i);
    out.push_back(s.substr(i, n));
    i += n;
  }
  return out;
}

bool is_cjk(std::string_view cp) {
  if (cp.size() != 3) return false;
  unsigned c0 = static_cast<unsigned char>(cp[0]);
  unsigned c1 = static_cast<unsigned char>(cp[1]);
  unsigned c2 = static_cast<unsigned char>(cp[2]);
  unsigned code = ((c0 & 0x0F) << 12) | ((c1 & 0x3F) << 6) | (c2 & 0x3F);
  return (code >= 0x4E00 && code <= 0x9FFF) || (code >= 0x3400 && code <= 0x4DBF) ||
         (code >= 0x3000 && code <= 0x303F) || (code >= 0xFF00 && code <= 0xFFEF);
}

}  // namespace spo
