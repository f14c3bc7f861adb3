#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sentmap/core.hpp"
#include "sentmap/endpoint.hpp"
#include "sentmap/map_io.hpp"

// Map construction from an operator-guided walkthrough: moves become
// navigation nodes and edges, snapshots at points of interest go through a
// scene describer (recorded fixtures or a live multimodal endpoint) and
// come back as semantic payloads.

namespace sentmap {

struct TraceEvent {
  enum class Kind { MoveTo, Snapshot };

  Kind kind = Kind::MoveTo;
  NodeId node;
  std::string zone;   // move-to
  std::string image;  // snapshot: opaque locator (file path or fixture key)
  std::string hint;   // snapshot: operator free text, may be empty

  bool operator==(const TraceEvent&) const = default;
};

struct WalkthroughTrace {
  std::vector<TraceEvent> events;

  bool operator==(const WalkthroughTrace&) const = default;
};

// Wire form: JSON array of {"move_to": {"node", "zone"}} or
// {"snapshot": {"node", "image", "hint"?}}. Throws InvalidTrace.
WalkthroughTrace parse_trace(const std::string& doc);
std::string serialize_trace(const WalkthroughTrace& trace);

struct Snapshot {
  std::string image;  // non-empty
  std::string hint;

  bool operator==(const Snapshot&) const = default;
};

struct DescriberRequest {
  Snapshot snapshot;
  std::string prompt_template;  // names every semantic-payload field
  std::string hint;

  bool operator==(const DescriberRequest&) const = default;
};

struct DescriberResult {
  SemanticPayload payload;
  std::string raw;  // verbatim describer output, kept for operator audit
};

// The JSON-template prompt sent with every snapshot.
std::string semantic_payload_template();

class SceneDescriber {
 public:
  virtual ~SceneDescriber() = default;
  virtual DescriberResult describe(const DescriberRequest& request) = 0;
};

// Deterministic describer backed by a directory of recorded payloads.
// "kitchen_sink.png" resolves to kitchen_sink.png.json or kitchen_sink.json
// (first hit wins). Throws FixtureMissing; a file that does not parse as a
// payload surfaces as PayloadInvalid.
class FixtureDescriber : public SceneDescriber {
 public:
  explicit FixtureDescriber(std::string dir);
  DescriberResult describe(const DescriberRequest& request) override;

 private:
  std::string dir_;
};

// Live describer: ships the snapshot image (base64 data URL) plus the
// template to a multimodal chat-completions endpoint, extracts the first
// JSON object from the reply, and re-prompts with the validation error up
// to `retries` times. Throws TransportError, NoJsonInReply, PayloadInvalid.
class RemoteDescriber : public SceneDescriber {
 public:
  RemoteDescriber(ChatEndpoint& endpoint, EndpointConfig config,
                  int retries = 2);
  DescriberResult describe(const DescriberRequest& request) override;

 private:
  ChatEndpoint& endpoint_;
  EndpointConfig config_;
  int retries_;
};

struct BuildResult {
  SentMap map;
  std::vector<DescriberResult> describer_results;  // trace order
  std::vector<std::string> warnings;
};

// One node per distinct move-to id, bidirectional edges between
// consecutive distinct moves, one semantic payload per snapshotted node
// (a later snapshot overwrites with a warning). Deterministic with the
// fixture describer. Throws InvalidTrace, DescriberFailure (event index +
// cause), PayloadInvalid (event index + offending path).
BuildResult build_map(const WalkthroughTrace& trace,
                      SceneDescriber& describer);

// Operator review pass: all edits applied in order, atomically — failure
// at edit k leaves the input map untouched and reports k.
// Throws BatchFailed.
SentMap review_and_patch(SentMap map, const std::vector<EditCommand>& edits);

}  // namespace sentmap
