#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "spo/common.hpp"
#include "spo/taxonomy.hpp"

namespace spo {

/// Lower-cases ASCII, maps typographic apostrophes to ', collapses
/// whitespace runs to one space and trims.
std::string normalize_text(std::string_view text);

bool is_ascii_alnum(char c);

struct KeywordMatch {
  std::size_t begin = 0;  // byte offsets into the normalized text
  std::size_t end = 0;
  const KeywordEntry* entry = nullptr;
};

/// Finds keyword occurrences in already-normalized text.
///
/// An occurrence must sit on word boundaries when its edge characters are
/// ASCII alphanumerics (CJK keywords match anywhere); a trailing plural
/// "s"/"es" is accepted. Matches strictly contained in a longer match are
/// dropped. Results are ordered by position.
std::vector<KeywordMatch> find_keywords(std::string_view normalized,
                                        const KeywordLexicon& lexicon,
                                        KeywordScope scope);

/// Items whose keywords occur in `text` (normalized internally).
ItemSet match_keywords(std::string_view text, const KeywordLexicon& lexicon,
                       KeywordScope scope = KeywordScope::Ui);

/// Splits a UTF-8 string into code points (each as its own byte string).
std::vector<std::string_view> utf8_codepoints(std::string_view s);

/// True for code points in the common CJK ranges.
bool is_cjk(std::string_view codepoint);

}  // namespace spo
