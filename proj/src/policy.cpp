#include "spo/policy.hpp"

#include <algorithm>
#include <array>
#include <optional>

#include "spo/text.hpp"

namespace spo {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Claim: return "claim";
    case Verdict::Negated: return "negated";
    case Verdict::NonCollective: return "non_collective";
  }
  return "claim";
}

namespace {

bool ascii_only(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

bool word_char(char c) { return is_ascii_alnum(c) || c == '\'' || c == '_'; }

bool space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

constexpr std::array<std::string_view, 5> kCjkTerminators = {"。", "！", "？", "；", "…"};
constexpr std::array<std::string_view, 4> kCjkColons = {"：", ":", "∶", "﹕"};
constexpr std::array<std::string_view, 3> kBulletGlyphs = {"•", "·", "●"};

// Length of a list bullet at the start of `s` (0 when none).
std::size_t bullet_at(std::string_view s) {
  if (s.empty()) return 0;
  auto digits = [&](std::size_t from) {
    std::size_t i = from;
    while (i < s.size() && i - from < 3 && s[i] >= '0' && s[i] <= '9') ++i;
    return i - from;
  };
  std::size_t n = 0;
  if (s[0] == '(' && (n = digits(1)) && 1 + n < s.size() && s[1 + n] == ')') return n + 2;
  if (s.starts_with("（") && (n = digits(3)) && s.substr(3 + n).starts_with("）")) return n + 6;
  if ((n = digits(0))) {
    if (n < s.size() && s[n] == ')') return n + 1;
    if (n < s.size() && s[n] == '.' && (n + 1 == s.size() || space(s[n + 1]))) return n + 1;
    if (s.substr(n).starts_with("、")) return n + 3;
    return 0;
  }
  if ((s[0] == '-' || s[0] == '*') && (s.size() == 1 || space(s[1]))) return 1;
  for (auto g : kBulletGlyphs)
    if (s.starts_with(g)) return g.size();
  // circled numbers U+2460..U+2473
  if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xE2 && static_cast<unsigned char>(s[1]) == 0x91 &&
      static_cast<unsigned char>(s[2]) >= 0xA0 && static_cast<unsigned char>(s[2]) <= 0xB3)
    return 3;
  static const std::array<std::string_view, 10> numerals = {"一", "二", "三", "四", "五", "六", "七", "八", "九", "十"};
  std::size_t i = 0;
  while (true) {
    auto it = std::find_if(numerals.begin(), numerals.end(), [&](std::string_view d) { return s.substr(i).starts_with(d); });
    if (it == numerals.end()) break;
    i += it->size();
  }
  if (i > 0 && s.substr(i).starts_with("、")) return i + 3;
  return 0;
}

// Inline bullets: "(2)" or "2)" after whitespace, in the middle of a line.
bool inline_bullet(std::string_view line, std::size_t pos) {
  if (pos == 0 || !space(line[pos - 1])) return false;
  std::string_view rest = line.substr(pos);
  if (rest.empty() || !(rest[0] == '(' || (rest[0] >= '0' && rest[0] <= '9'))) return false;
  std::size_t n = bullet_at(rest);
  return n > 0 && rest[n - 1] == ')' && (n == rest.size() || space(rest[n]));
}

bool ends_with_colon(std::string_view s) {
  s = trim(s);
  return std::any_of(kCjkColons.begin(), kCjkColons.end(), [&](std::string_view c) { return s.ends_with(c); });
}

bool abbreviation_before(std::string_view line, std::size_t dot) {
  static const std::array<std::string_view, 6> abbrevs = {"e.g", "i.e", "etc", "mr", "dr", "vs"};
  std::size_t b = dot;
  while (b > 0 && (is_ascii_alnum(line[b - 1]) || line[b - 1] == '.')) --b;
  std::string word = normalize_text(line.substr(b, dot - b));
  return std::find(abbrevs.begin(), abbrevs.end(), word) != abbrevs.end() && word != "etc";
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  for (std::string_view cp : utf8_codepoints(text)) {
    if (cp.size() == 1 && space(cp[0])) {
      flush();
    } else if (cp.size() == 1 && word_char(cp[0])) {
      word += cp;
    } else if (cp.size() == 1 || is_cjk(cp)) {
      flush();
      out.emplace_back(cp);
    } else {
      word += cp;
    }
  }
  flush();
  return out;
}

std::vector<Sentence> split_sentences(std::string_view text, std::string_view /*locale*/) {
  std::vector<Sentence> out;
  int lead = -1;
  auto emit = [&](std::string_view body, bool bullet) {
    body = trim(body);
    auto toks = tokenize(body);
    bool has_content = std::any_of(toks.begin(), toks.end(), [](const std::string& t) {
      return t.size() > 1 || is_ascii_alnum(t[0]) || static_cast<unsigned char>(t[0]) >= 0x80;
    });
    if (!has_content) return;
    Sentence s;
    s.text = std::string(body);
    s.tokens = std::move(toks);
    s.index = static_cast<int>(out.size());
    if (bullet)
      s.lead = lead;
    else
      lead = ends_with_colon(body) ? s.index : -1;
    out.push_back(std::move(s));
  };

  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t nl = text.find('\n', line_start);
    std::string_view line = text.substr(line_start, nl == std::string_view::npos ? std::string_view::npos : nl - line_start);
    line_start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    std::size_t i = 0;
    while (i < line.size() && space(line[i])) ++i;
    bool bullet = false;
    if (std::size_t b = bullet_at(line.substr(i))) {
      bullet = true;
      i += b;
    }
    std::size_t start = i;
    while (i < line.size()) {
      if (inline_bullet(line, i)) {
        emit(line.substr(start, i - start), bullet);
        bullet = true;
        i += bullet_at(line.substr(i));
        start = i;
        continue;
      }
      char c = line[i];
      std::size_t term = 0;
      if (c == '?' || c == '!') {
        term = 1;
      } else if (c == '.') {
        bool next_ok = i + 1 == line.size() || space(line[i + 1]) || line[i + 1] == '.' || line[i + 1] == '"';
        if (next_ok && !abbreviation_before(line, i)) term = 1;
      } else {
        for (auto t : kCjkTerminators)
          if (line.substr(i).starts_with(t)) term = t.size();
      }
      if (!term) {
        ++i;
        continue;
      }
      std::size_t end = i + term;
      // absorb runs of terminators and closing quotes
      while (end < line.size() && (line[end] == '.' || line[end] == '!' || line[end] == '?' || line[end] == '"' ||
                                   line[end] == ')'))
        ++end;
      emit(line.substr(start, end - start), bullet);
      bullet = false;
      i = end;
      start = i;
    }
    emit(line.substr(start), bullet);
  }
  return out;
}

namespace {

struct Piece {
  std::size_t begin = 0, end = 0;
  int hard = 0;
  bool verb = false;
  bool cue = false;
};

bool contains_term(std::string_view text, std::string_view term) {
  if (term.empty()) return false;
  if (!ascii_only(term)) return text.find(term) != std::string_view::npos;
  std::size_t pos = 0;
  while ((pos = text.find(term, pos)) != std::string_view::npos) {
    std::size_t end = pos + term.size();
    bool left = pos == 0 || !word_char(text[pos - 1]);
    bool right = end == text.size() || !word_char(text[end]);
    if (left && right) return true;
    ++pos;
  }
  return false;
}

bool verb_form(std::string_view word, std::string_view verb) {
  if (word == verb) return true;
  if (word.starts_with(verb)) {
    std::string_view rest = word.substr(verb.size());
    for (std::string_view suf : {"s", "es", "ed", "d", "ing", "ion", "ions"})
      if (rest == suf) return true;
  }
  if (verb.size() > 2 && verb.back() == 'e') {
    std::string_view stem = verb.substr(0, verb.size() - 1);
    if (word.starts_with(stem)) {
      std::string_view rest = word.substr(stem.size());
      if (rest == "ing" || rest == "ion" || rest == "ions") return true;
    }
  }
  return false;
}

bool has_verb(std::string_view text, const std::vector<std::string>& verbs) {
  for (const auto& v : verbs)
    if (!ascii_only(v) && text.find(v) != std::string_view::npos) return true;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!word_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && word_char(text[j])) ++j;
    std::string_view w = text.substr(i, j - i);
    for (const auto& v : verbs)
      if (ascii_only(v) && verb_form(w, v)) return true;
    i = j;
  }
  return false;
}

struct Cut {
  std::size_t at = 0, len = 0;
  bool hard = false;
  bool contrast = false;
};

// Clause boundaries of a normalized sentence, never inside a keyword match.
std::vector<Cut> boundaries(std::string_view s, const PolicyVocabulary& vocab, const std::vector<KeywordMatch>& hits) {
  std::vector<Cut> cuts;
  auto inside_hit = [&](std::size_t a, std::size_t b) {
    return std::any_of(hits.begin(), hits.end(), [&](const KeywordMatch& m) { return a < m.end && m.begin < b; });
  };
  auto add = [&](std::size_t at, std::size_t len, bool hard, bool contrast = false) {
    if (!inside_hit(at, at + len)) cuts.push_back({at, len, hard, contrast});
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == ',' || c == ':' || c == '(' || c == ')') add(i, 1, false);
    if (c == ';') add(i, 1, true);
    for (std::string_view p : {"，", "、", "：", "（", "）"})
      if (s.substr(i).starts_with(p)) add(i, p.size(), false);
    if (s.substr(i).starts_with("；")) add(i, 3, true);
  }
  auto words = [&](const std::vector<std::string>& terms, bool contrast) {
    for (const auto& t : terms) {
      std::string term = normalize_text(t);
      if (term.empty()) continue;
      std::size_t pos = 0;
      while ((pos = s.find(term, pos)) != std::string_view::npos) {
        std::size_t end = pos + term.size();
        bool ok = !ascii_only(term) ||
                  ((pos == 0 || !word_char(s[pos - 1])) && (end == s.size() || !word_char(s[end])));
        if (ok) add(pos, term.size(), contrast, contrast);
        pos = end;
      }
    }
  };
  words(vocab.contrasts, true);
  words({"and", "or", "as well as", "以及", "并且"}, false);
  std::sort(cuts.begin(), cuts.end(), [](const Cut& a, const Cut& b) { return a.at < b.at; });
  return cuts;
}

struct Tail {
  bool governed = false;
  bool negated = false;
};

}  // namespace

PolicyAnalysis analyze_policy_text(std::string_view text, const KeywordLexicon& lexicon, const PolicyVocabulary& vocab,
                                   std::string_view locale) {
  PolicyAnalysis out;
  out.sentences = split_sentences(text, locale);
  std::vector<Tail> tails(out.sentences.size());
  std::map<std::string, bool> only_exact;

  for (const auto& sent : out.sentences) {
    const std::string norm = normalize_text(sent.text);
    auto hits = find_keywords(norm, lexicon, KeywordScope::Policy);
    auto cuts = boundaries(norm, vocab, hits);

    std::vector<Piece> pieces;
    std::vector<bool> after_contrast{false};
    std::size_t from = 0;
    int hard = 0;
    for (const auto& c : cuts) {
      if (c.at < from) continue;
      pieces.push_back({from, c.at, hard});
      if (c.hard) {
        ++hard;
        after_contrast.push_back(c.contrast);
      }
      from = c.at + c.len;
    }
    pieces.push_back({from, norm.size(), hard});
    for (auto& p : pieces) {
      std::string_view body = std::string_view(norm).substr(p.begin, p.end - p.begin);
      p.verb = has_verb(body, vocab.verbs);
      p.cue = std::any_of(vocab.negations.begin(), vocab.negations.end(),
                          [&](const std::string& n) { return contains_term(body, normalize_text(n)); });
    }

    Tail inherit = sent.lead >= 0 ? tails[static_cast<std::size_t>(sent.lead)] : Tail{};
    std::vector<Tail> state(pieces.size());
    Tail seg_prev = inherit;
    for (int h = 0; h <= hard; ++h) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < pieces.size(); ++i)
        if (pieces[i].hard == h) idx.push_back(i);
      bool any_verb = std::any_of(idx.begin(), idx.end(), [&](std::size_t i) { return pieces[i].verb; });
      Tail ctx = h == 0 ? inherit : Tail{seg_prev.governed && after_contrast[static_cast<std::size_t>(h)], false};
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const Piece& p = pieces[idx[k]];
        Tail& st = state[idx[k]];
        if (any_verb) {
          st.governed = true;
          if (p.cue || p.verb) {
            st.negated = p.cue;
          } else {
            // nearest clause with its own verb, preceding first
            std::optional<bool> neg;
            for (std::size_t j = k; j-- > 0 && !neg;)
              if (pieces[idx[j]].verb) neg = pieces[idx[j]].cue;
            for (std::size_t j = k + 1; j < idx.size() && !neg; ++j)
              if (pieces[idx[j]].verb) neg = pieces[idx[j]].cue;
            st.negated = neg.value_or(false);
          }
        } else {
          st.governed = ctx.governed;
          st.negated = p.cue || ctx.negated;
        }
      }
      if (!idx.empty()) seg_prev = state[idx.back()];
      else seg_prev = ctx;
    }
    tails[static_cast<std::size_t>(sent.index)] = seg_prev;

    for (std::size_t i = 0; i < pieces.size(); ++i) {
      ClaimCandidate cand;
      cand.sentence = sent.index;
      cand.clause = std::string(trim(std::string_view(norm).substr(pieces[i].begin, pieces[i].end - pieces[i].begin)));
      for (const auto& m : hits)
        if (m.begin >= pieces[i].begin && m.begin < pieces[i].end)
          cand.matched.push_back({m.entry->keyword, m.entry->item, m.begin, m.end});
      if (cand.matched.empty()) continue;
      cand.verdict = !state[i].governed ? Verdict::NonCollective
                     : state[i].negated ? Verdict::Negated
                                        : Verdict::Claim;
      if (cand.verdict == Verdict::Claim) {
        for (const auto& m : hits) {
          if (!(m.begin >= pieces[i].begin && m.begin < pieces[i].end)) continue;
          const std::string& item = m.entry->item;
          out.claims.items.insert(item);
          auto& ev = out.claims.evidence[item];
          if (ev.empty() || ev.back() != sent.index) ev.push_back(sent.index);
          auto [it, fresh] = only_exact.emplace(item, m.entry->exact);
          if (!fresh) it->second = it->second && m.entry->exact;
        }
      }
      out.candidates.push_back(std::move(cand));
    }
  }
  for (const auto& [item, exact] : only_exact)
    if (exact) out.claims.exact.insert(item);
  return out;
}

ClaimSet extract_claims(const PolicyText& policy, const KeywordLexicon& lexicon, const PolicyVocabulary& vocab,
                        std::string_view locale) {
  if (!policy.valid) throw Error("no valid policy");
  return analyze_policy_text(policy.text, lexicon, vocab, locale).claims;
}

ItemSet claim_coverage(const ClaimSet& claims, const Taxonomy& tax) {
  ItemSet out;
  for (const auto& id : claims.items) {
    if (claims.exact.count(id)) {
      out.insert(id);
      continue;
    }
    const PrivacyItem* item = tax.item(id);
    if (!item) continue;
    ItemSet same = tax.items_named(item->name);
    out.insert(same.begin(), same.end());
  }
  return out;
}

std::string detect_locale(std::string_view text) {
  std::size_t cjk = 0, latin = 0;
  for (std::string_view cp : utf8_codepoints(text)) {
    if (is_cjk(cp)) ++cjk;
    else if (cp.size() == 1 && is_ascii_alnum(cp[0])) ++latin;
  }
  return cjk > latin ? "zh" : "en";
}

}  // namespace spo
