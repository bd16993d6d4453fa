#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spo/common.hpp"
#include "spo/taxonomy.hpp"

namespace spo {

/// Parsed page/component configuration (`<route>.json`).
struct PageConfig {
  std::map<std::string, std::string> using_components;  // tag -> component path as written
  bool is_component = false;

  friend bool operator==(const PageConfig&, const PageConfig&) = default;
};

struct Page {
  std::string route;       // "pages/index/index", "pkgA/pages/cart/cart"
  std::string render_doc;  // markup source
  std::string logic_src;   // script source
  PageConfig config;
  bool is_entry = false;

  std::string script_path() const { return route + ".js"; }
  std::string markup_path() const { return route + ".wxml"; }

  friend bool operator==(const Page&, const Page&) = default;
};

struct CodePackage {
  std::string root_path;  // "" for the main package
  std::vector<Page> pages;
  std::map<std::string, PageConfig> config_files;  // route -> config
  std::uint64_t byte_size = 0;

  friend bool operator==(const CodePackage&, const CodePackage&) = default;
};

struct AppMeta {
  std::string developer;
  std::string category;
  std::uint64_t recently_used = 0;

  friend bool operator==(const AppMeta&, const AppMeta&) = default;
};

enum class PolicySource { ExternalFile, InPackageAsset, PageText, RemoteUrl };

std::string_view to_string(PolicySource s);

struct PolicyText {
  PolicySource source = PolicySource::PageText;
  std::string text;
  bool valid = false;
  std::string origin;  // file path, page route or URL the text came from

  friend bool operator==(const PolicyText&, const PolicyText&) = default;
};

enum class PolicyStatus { Valid, Invalid, Missing };

std::string_view to_string(PolicyStatus s);
/// Valid if any text is valid, Invalid if texts exist but none is, else Missing.
PolicyStatus policy_status(const std::vector<PolicyText>& policies);

struct SubAppPackage {
  std::string appid;
  std::filesystem::path dir;
  AppMeta meta;
  CodePackage main_pkg;
  std::vector<CodePackage> sub_pkgs;
  std::vector<PolicyText> policies;  // filled by locate_policies

  PageConfig app_config;  // global usingComponents of app.json
  std::string app_script;
  /// Every text file of the code packages, keyed by '/'-separated path
  /// relative to the package directory (meta.json and policy.txt excluded).
  std::map<std::string, std::string> files;
  std::optional<std::string> external_policy;  // contents of policy.txt
  Diagnostics warnings;

  /// All loaded pages, main package first, in configuration order.
  std::vector<const Page*> pages() const;
  const Page* page(std::string_view route) const;
  const Page* entry_page() const;
  std::uint64_t byte_size() const;

  friend bool operator==(const SubAppPackage&, const SubAppPackage&) = default;
};

/// Loads an extracted sub-app directory. Throws LoadError when app.json is
/// missing or unreadable, when no page can be loaded or when two pages share
/// a route. Pages whose script file is missing are skipped with a warning.
SubAppPackage load_package(const std::filesystem::path& dir);

/// Fetches a remote policy document; nullopt when unavailable.
using PolicyRetriever = std::function<std::optional<std::string>(const std::string& url)>;

struct PolicyLocateOptions {
  std::size_t min_length = 50;  // in characters
  bool fetch_remote = false;
  PolicyRetriever retriever;
};

/// Finds the policy texts of a package.
///
/// An external file (argument, else the package's policy.txt) wins outright.
/// Otherwise render documents are scanned for indicator phrases; a link on
/// the indicator element or one of its two nearest ancestors is followed to
/// a page (PageText) or in-package asset (InPackageAsset); web links are
/// recorded as RemoteUrl and fetched only when enabled. An indicator without
/// a link yields the text of its own page.
std::vector<PolicyText> locate_policies(const SubAppPackage& pkg, const PolicyVocabulary& vocab,
                                        const std::optional<std::filesystem::path>& external = std::nullopt,
                                        const PolicyLocateOptions& opts = {});

/// Character count after trimming, and the validity rule built on it.
std::size_t policy_length(std::string_view text);
bool policy_valid(std::string_view text, std::size_t min_length);

}  // namespace spo
