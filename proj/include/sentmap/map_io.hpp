#pragma once

#include <string>
#include <vector>

#include "sentmap/core.hpp"

// Scene JSON wire format. The canonical form is byte-stable: object keys
// sorted, 2-space indent, "\n" line endings, trailing newline. Validation
// reports carry JSON-pointer paths that resolve in the offending document
// so an operator can jump straight to the problem.

namespace sentmap {

enum class Severity { Error, Warning };

struct Issue {
  Severity severity;
  std::string path;  // JSON pointer, "" for document-level problems
  std::string message;

  bool operator==(const Issue&) const = default;
};

struct ValidationReport {
  std::vector<Issue> issues;

  size_t error_count() const;
  size_t warning_count() const;
  bool ok() const { return error_count() == 0; }
  std::string to_text() const;
  std::string to_json() const;
};

class SchemaViolation : public Error {
 public:
  explicit SchemaViolation(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

enum class EditOp {
  AddObject,
  RemoveObject,
  SetOwner,
  SetEntityState,
  RenameLabel,
  AddPerson,
  SetPersonLocation,
  SetDescription,
};

const char* to_string(EditOp op);

// One operator correction. Targets are addressed by (node, entity, object)
// names or by person name; `value` is the op's operand as JSON text.
struct EditCommand {
  EditOp op;
  std::string node;
  std::string entity;
  std::string object;
  std::string person;
  std::string value;  // JSON text; "null" clears optional fields

  bool operator==(const EditCommand&) const = default;
};

// Throws MalformedJson (with byte position) on unparseable input and
// SchemaViolation (carrying the report) when the document does not load
// into a valid SentMap. Unknown fields are preserved in attributes maps.
SentMap parse_map(const std::string& doc);

// Canonical serialization; parse_map(serialize_map(m)) == m.
std::string serialize_map(const SentMap& map);

// Never throws: all findings, including a top-level parse failure, are
// returned as report entries.
ValidationReport validate_map(const std::string& doc);

// One semantic payload document (the scene-describer wire form).
// Structural checks only; owner resolution needs the whole map and
// happens when the payload is attached. Throws MalformedJson and
// SchemaViolation.
SemanticPayload parse_payload(const std::string& doc);
std::string serialize_payload(const SemanticPayload& payload);

// Applies one command and revalidates. Throws UnknownTarget when the
// target does not resolve and InvariantBroken when the edited map would
// violate an invariant (message carries the offending json-path).
SentMap apply_edit(SentMap map, const EditCommand& cmd);

// Wire form used by `map edit --ops`: JSON array of command objects.
std::vector<EditCommand> parse_edit_commands(const std::string& doc);
std::string serialize_edit_commands(const std::vector<EditCommand>& cmds);

// RFC 6901 token escaping for building json-paths
std::string json_path_escape(const std::string& token);

}  // namespace sentmap
