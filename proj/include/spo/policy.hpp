#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spo/common.hpp"
#include "spo/package.hpp"
#include "spo/taxonomy.hpp"

namespace spo {

struct Sentence {
  std::string text;
  std::vector<std::string> tokens;
  int index = 0;
  /// List items point at the sentence that introduces the list (one ending
  /// in a colon); -1 otherwise.
  int lead = -1;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// Rule-based splitting on the locale's terminators (Latin .?!, CJK 。！？；),
/// line breaks and list bullets ("1)", "(2)", "-", "•", "①", "一、").
/// Bullets are not part of the sentence text.
std::vector<Sentence> split_sentences(std::string_view text, std::string_view locale = "en");

/// Word tokens and single punctuation marks; CJK code points stand alone.
std::vector<std::string> tokenize(std::string_view text);

enum class Verdict { Claim, Negated, NonCollective };

std::string_view to_string(Verdict v);

struct KeywordHit {
  std::string keyword;
  std::string item;
  std::size_t begin = 0;  // byte offsets into the normalized sentence
  std::size_t end = 0;

  friend bool operator==(const KeywordHit&, const KeywordHit&) = default;
};

/// One clause of a sentence holding keyword matches.
struct ClaimCandidate {
  int sentence = 0;
  std::string clause;  // normalized clause text
  std::vector<KeywordHit> matched;
  Verdict verdict = Verdict::Claim;

  friend bool operator==(const ClaimCandidate&, const ClaimCandidate&) = default;
};

struct ClaimSet {
  ItemSet items;
  std::map<std::string, std::vector<int>> evidence;  // item -> sentence indices
  /// Items claimed only through category-specific keywords.
  ItemSet exact;

  friend bool operator==(const ClaimSet&, const ClaimSet&) = default;
};

struct PolicyAnalysis {
  std::vector<Sentence> sentences;
  std::vector<ClaimCandidate> candidates;
  ClaimSet claims;
};

/// Claim extraction over arbitrary text, valid or not.
PolicyAnalysis analyze_policy_text(std::string_view text, const KeywordLexicon& lexicon, const PolicyVocabulary& vocab,
                                   std::string_view locale = "en");

/// S_claim of a policy. Throws Error("no valid policy") for invalid texts.
ClaimSet extract_claims(const PolicyText& policy, const KeywordLexicon& lexicon, const PolicyVocabulary& vocab,
                        std::string_view locale = "en");

/// Items covered by a claim set: a claimed item stands for every item
/// sharing its name, unless it was claimed only through exact keywords.
ItemSet claim_coverage(const ClaimSet& claims, const Taxonomy& tax);

/// "zh" when CJK characters outnumber Latin letters, else "en".
std::string detect_locale(std::string_view text);

}  // namespace spo
