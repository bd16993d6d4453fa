#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace spo {

/// Base class for every error raised by the toolchain.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration or data file does not satisfy its schema.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Source text (script or markup) could not be parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::uint32_t line, std::uint32_t col)
      : Error(msg + " at " + std::to_string(line) + ":" + std::to_string(col)),
        line_(line),
        col_(col) {}

  std::uint32_t line() const { return line_; }
  std::uint32_t col() const { return col_; }

 private:
  std::uint32_t line_;
  std::uint32_t col_;
};

/// Byte range plus the 1-based line/column of its first byte.
struct Span {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  std::uint32_t line = 1;
  std::uint32_t col = 1;

  bool contains(const Span& other) const {
    return begin <= other.begin && other.end <= end;
  }
  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

/// Span anchored to a file of the package.
struct SourceLocation {
  std::string file;
  Span span;

  friend bool operator==(const SourceLocation&, const SourceLocation&) = default;
  friend auto operator<=>(const SourceLocation&, const SourceLocation&) = default;
};

/// Set of privacy-item ids. Ordered so that every output is stable.
using ItemSet = std::set<std::string>;

/// Non-fatal problem recorded while analysing a sub-app.
struct Diagnostic {
  std::string stage;  // ingest, script, markup, render, flow, policy
  std::string where;  // file or route
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
  friend auto operator<=>(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

}  // namespace spo
