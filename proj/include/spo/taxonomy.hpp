#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spo/common.hpp"

namespace spo {

enum class PrivacyCategory { Device, Platform, UserInput };

std::string_view to_string(PrivacyCategory c);
/// Single-letter suffix used in item ids: d, p or u.
char category_suffix(PrivacyCategory c);

struct PrivacyItem {
  std::string id;
  std::string name;
  PrivacyCategory category = PrivacyCategory::Device;

  friend bool operator==(const PrivacyItem&, const PrivacyItem&) = default;
};

/// How a privacy-bearing subAPI hands its data back to the caller.
enum class CallbackStyle { SuccessCallback, SyncReturn, EventListener };

std::string_view to_string(CallbackStyle s);

struct SubApiMapping {
  std::string subapi;  // bare name, or Type.method for object members
  ItemSet items;
  CallbackStyle style = CallbackStyle::SuccessCallback;
  std::string permission;  // empty when no permission prompt guards the call

  friend bool operator==(const SubApiMapping&, const SubApiMapping&) = default;
};

enum class KeywordScope { Ui, Policy, Both };

struct KeywordEntry {
  std::string keyword;     // as written in the configuration
  std::string normalized;  // lower-cased, whitespace-collapsed form used for matching
  std::string item;
  KeywordScope scope = KeywordScope::Both;
  /// Claims through this keyword cover only `item`, not every item sharing its name.
  bool exact = false;

  bool usable_for(KeywordScope want) const {
    return scope == KeywordScope::Both || scope == want;
  }
  friend bool operator==(const KeywordEntry&, const KeywordEntry&) = default;
};

struct KeywordLexicon {
  std::string locale;
  std::vector<KeywordEntry> entries;

  friend bool operator==(const KeywordLexicon&, const KeywordLexicon&) = default;
};

enum class SinkKind { Upload, Request };

std::string_view to_string(SinkKind k);

struct SinkApi {
  std::string name;
  SinkKind kind = SinkKind::Request;
  /// Object-argument properties that carry the transmitted payload.
  /// Empty means every argument counts.
  std::vector<std::string> payload;

  friend bool operator==(const SinkApi&, const SinkApi&) = default;
};

enum class ProtectionLevel { NotProtected, PartiallyProtected, FullyProtected };

std::string_view to_string(ProtectionLevel l);

/// Word lists driving claim extraction and policy location for one locale.
struct PolicyVocabulary {
  std::vector<std::string> verbs;
  std::vector<std::string> negations;
  std::vector<std::string> contrasts;
  std::vector<std::string> indicators;

  friend bool operator==(const PolicyVocabulary&, const PolicyVocabulary&) = default;
};

/// Immutable bundle of every data table the analyses consult.
///
/// Built only through `load_taxonomy` / `parse_taxonomy`, which validate
/// closure (every referenced item id exists), id uniqueness and the
/// category constraints of subAPI mappings and UI keywords.
class Taxonomy {
 public:
  int schema_version() const { return schema_version_; }

  const std::vector<PrivacyItem>& items() const { return items_; }
  const PrivacyItem* item(std::string_view id) const;
  /// Ids of every item sharing `name` across categories.
  ItemSet items_named(std::string_view name) const;
  /// Expands ids to all ids sharing their item name.
  ItemSet cover_by_name(const ItemSet& ids) const;

  const std::map<std::string, SubApiMapping>& subapis() const { return subapis_; }
  /// Resolves a call name ("wx.getLocation", "getSystemInfoSync",
  /// "createMapContext.getCenterLocation") to its mapping, or nullptr.
  const SubApiMapping* resolve_subapi(std::string_view name) const;
  ItemSet lookup_subapi(std::string_view name) const;

  /// Object type produced by a factory subAPI (connectSocket -> SocketTask).
  std::optional<std::string> factory_type(std::string_view subapi) const;
  const std::map<std::string, std::string>& factories() const { return factories_; }

  const std::vector<SinkApi>& sinks() const { return sinks_; }
  const SinkApi* sink(std::string_view name) const;

  const std::map<std::string, KeywordLexicon>& lexicons() const { return lexicons_; }
  /// Lexicon for `locale`, falling back to "en".
  const KeywordLexicon& lexicon(std::string_view locale = "en") const;

  const std::map<std::string, ProtectionLevel>& protection_levels() const { return protection_; }
  std::optional<ProtectionLevel> protection(std::string_view item) const;

  const std::map<std::string, PolicyVocabulary>& vocabularies() const { return vocab_; }
  const PolicyVocabulary& vocabulary(std::string_view locale = "en") const;

  friend bool operator==(const Taxonomy&, const Taxonomy&) = default;

 private:
  friend Taxonomy parse_taxonomy(std::string_view);

  int schema_version_ = 1;
  std::vector<PrivacyItem> items_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::map<std::string, SubApiMapping> subapis_;
  std::map<std::string, std::string> factories_;
  std::vector<SinkApi> sinks_;
  std::map<std::string, KeywordLexicon> lexicons_;
  std::map<std::string, ProtectionLevel> protection_;
  std::map<std::string, PolicyVocabulary> vocab_;
};

/// Parses and validates a taxonomy document. Throws LoadError.
Taxonomy parse_taxonomy(std::string_view json_text);
Taxonomy load_taxonomy(const std::filesystem::path& path);
/// Serializes to the same schema `parse_taxonomy` reads.
std::string serialize_taxonomy(const Taxonomy& tax);

/// Path of the taxonomy shipped with the project: $SPO_TAXONOMY when set,
/// else the data directory recorded at build time.
std::filesystem::path default_taxonomy_path();

}  // namespace spo
