#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "wmw/trace.hpp"

namespace wmw {

enum class ParseErrorKind { no_object_found, malformed, truncated };
std::string_view to_string(ParseErrorKind k);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::size_t offset, const std::string& what)
      : std::runtime_error(what), kind_(kind), offset_(offset) {}

  ParseErrorKind kind() const noexcept { return kind_; }
  /// Byte offset into the input where extraction failed.
  std::size_t offset() const noexcept { return offset_; }

 private:
  ParseErrorKind kind_;
  std::size_t offset_;
};

/// Finds the first balanced top-level `{...}` span that parses as a JSON
/// object, skipping markdown fences and surrounding prose. Throws ParseError.
Json extract_json_object(std::string_view text);

/// Rewrites alias keys, unit spellings, relation-type spellings and numeric
/// strings into the canonical trace layout. Idempotent.
Json canonicalize(const Json& doc);

/// extract_json_object + canonicalize + typed decode.
Trace parse_trace(std::string_view text);

/// Pulls just the answer out of an answer-only reply (`{"answer": {...}}`,
/// `{"value": ...}` or a bare trace). Throws ParseError.
Answer parse_answer_reply(std::string_view text);

}  // namespace wmw
