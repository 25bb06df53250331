#pragma once

#include <span>
#include <string>
#include <vector>

#include "wmw/trace.hpp"

namespace wmw {

struct SchemaError {
  std::string path;
  std::string message;

  bool operator==(const SchemaError&) const = default;
};

struct SchemaReport {
  bool valid = true;
  std::vector<SchemaError> errors;

  void add(std::string path, std::string message) {
    valid = false;
    errors.push_back({std::move(path), std::move(message)});
  }
};

/// The Draft-7 trace schema shipped as data/trace_schema.json.
const Json& trace_schema_document();

/// Strict mode evaluates the Draft-7 schema; lenient mode runs the
/// field-presence checks used for model output. Vocabulary membership
/// (family, relation types) is enforced in both.
SchemaReport validate_document(const Json& doc, bool strict);

/// Validates `trace.document` when the trace was parsed, otherwise its
/// serialized typed fields.
SchemaReport validate_schema(const Trace& trace, bool strict);

/// Ids that occur more than once in a file.
std::vector<std::string> duplicate_ids(std::span<const Trace> traces);

}  // namespace wmw
