#include "sentmap/builder.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using nlohmann::json;
namespace fs = std::filesystem;

namespace sentmap {

namespace {

std::string trace_err(size_t index, const std::string& what) {
  return "event " + std::to_string(index) + ": " + what;
}

}  // namespace

WalkthroughTrace parse_trace(const std::string& doc) {
  json arr = json::parse(doc, nullptr, false);
  if (arr.is_discarded() || !arr.is_array()) {
    throw Error(ErrKind::InvalidTrace, "trace must be a JSON array of events");
  }
  WalkthroughTrace trace;
  for (size_t i = 0; i < arr.size(); ++i) {
    const json& ev = arr[i];
    if (!ev.is_object() || ev.size() != 1) {
      throw Error(ErrKind::InvalidTrace,
                  trace_err(i, "expected one {\"move_to\": ...} or "
                               "{\"snapshot\": ...} object"));
    }
    TraceEvent event;
    try {
      if (ev.contains("move_to")) {
        const json& m = ev.at("move_to");
        event.kind = TraceEvent::Kind::MoveTo;
        event.node = m.at("node").get<std::string>();
        event.zone = m.at("zone").get<std::string>();
      } else if (ev.contains("snapshot")) {
        const json& s = ev.at("snapshot");
        event.kind = TraceEvent::Kind::Snapshot;
        event.node = s.at("node").get<std::string>();
        event.image = s.at("image").get<std::string>();
        event.hint = s.value("hint", std::string());
        if (event.image.empty()) {
          throw Error(ErrKind::InvalidTrace,
                      trace_err(i, "snapshot image reference is empty"));
        }
      } else {
        throw Error(ErrKind::InvalidTrace,
                    trace_err(i, "unknown event kind '" +
                                     ev.items().begin().key() + "'"));
      }
    } catch (const json::exception& e) {
      throw Error(ErrKind::InvalidTrace, trace_err(i, e.what()));
    }
    if (!is_valid_node_id(event.node)) {
      throw Error(ErrKind::InvalidTrace,
                  trace_err(i, "bad node id '" + event.node + "'"));
    }
    trace.events.push_back(std::move(event));
  }
  if (!trace.events.empty() &&
      trace.events.front().kind != TraceEvent::Kind::MoveTo) {
    throw Error(ErrKind::InvalidTrace,
                "the first event must be a move-to (it establishes the "
                "start node)");
  }
  return trace;
}

std::string serialize_trace(const WalkthroughTrace& trace) {
  json arr = json::array();
  for (const auto& event : trace.events) {
    if (event.kind == TraceEvent::Kind::MoveTo) {
      arr.push_back({{"move_to", {{"node", event.node},
                                  {"zone", event.zone}}}});
    } else {
      json s = {{"node", event.node}, {"image", event.image}};
      if (!event.hint.empty()) s["hint"] = event.hint;
      arr.push_back({{"snapshot", std::move(s)}});
    }
  }
  return arr.dump(2) + "\n";
}

std::string semantic_payload_template() {
  return "Describe this point of interest as one JSON object with exactly "
         "these fields: \"label\" (short human name for the place), "
         "\"description\" (optional sentence), \"entities\" (array of "
         "stationary interactables, each {\"name\", \"kind\", \"state\" "
         "(optional, \"open\" or \"closed\"), \"affordances\" (array drawn "
         "from \"openable\", \"closable\", \"supports-place\", "
         "\"supports-pick\"), \"objects\" (array of movable items, each "
         "{\"name\", \"category\", \"owner\" (optional)})}). Reply with the "
         "JSON object only.";
}

FixtureDescriber::FixtureDescriber(std::string dir) : dir_(std::move(dir)) {}

DescriberResult FixtureDescriber::describe(const DescriberRequest& request) {
  const std::string& ref = request.snapshot.image;
  std::vector<fs::path> candidates = {fs::path(dir_) / (ref + ".json"),
                                      fs::path(dir_) / ref};
  fs::path stem = fs::path(ref).stem();
  if (!stem.empty() && stem.string() != ref) {
    candidates.push_back(fs::path(dir_) / (stem.string() + ".json"));
  }
  for (const auto& path : candidates) {
    std::ifstream in(path, std::ios::binary);
    if (!in) continue;
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string raw = buf.str();
    return {parse_payload(raw), raw};
  }
  throw Error(ErrKind::FixtureMissing,
              "no recorded payload for image '" + ref + "' under " + dir_);
}

namespace {

std::string base64(const std::string& bytes) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 2 < bytes.size()) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                 static_cast<unsigned char>(bytes[i + 2]);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += alphabet[v & 63];
    i += 3;
  }
  if (i + 1 == bytes.size()) {
    unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += "=";
  }
  return out;
}

std::string image_mime(const std::string& ref) {
  std::string ext = fs::path(ref).extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

// first balanced top-level JSON object in the text, or npos pair
std::pair<size_t, size_t> first_json_object(const std::string& text) {
  for (size_t pos = text.find('{'); pos != std::string::npos;
       pos = text.find('{', pos + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = pos; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{' || c == '[') {
        ++depth;
      } else if (c == '}' || c == ']') {
        --depth;
        if (depth == 0) {
          json probe = json::parse(text.substr(pos, i + 1 - pos),
                                   nullptr, false);
          if (!probe.is_discarded() && probe.is_object()) {
            return {pos, i + 1};
          }
          break;
        }
        if (depth < 0) break;
      }
    }
  }
  return {std::string::npos, std::string::npos};
}

}  // namespace

RemoteDescriber::RemoteDescriber(ChatEndpoint& endpoint, EndpointConfig config,
                                 int retries)
    : endpoint_(endpoint), config_(std::move(config)), retries_(retries) {}

DescriberResult RemoteDescriber::describe(const DescriberRequest& request) {
  std::ifstream in(request.snapshot.image, std::ios::binary);
  if (!in) {
    throw Error(ErrKind::ConfigError,
                "cannot read image '" + request.snapshot.image + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string data_url = "data:" + image_mime(request.snapshot.image) +
                         ";base64," + base64(buf.str());

  std::string instructions = request.prompt_template;
  if (!request.hint.empty()) {
    instructions += "\nOperator hint: " + request.hint;
  }
  // multimodal content needs structured parts, so the body is built here
  // rather than through build_chat_request
  json messages = json::array();
  messages.push_back(
      {{"role", "user"},
       {"content",
        json::array(
            {{{"type", "text"}, {"text", instructions}},
             {{"type", "image_url"},
              {"image_url", {{"url", data_url}}}}})}});

  std::string raw;
  for (int attempt = 0; attempt <= retries_; ++attempt) {
    json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    body["messages"] = messages;
    std::string response = endpoint_.complete(body.dump());
    raw = extract_reply(response);

    auto [begin, end] = first_json_object(raw);
    std::string problem;
    if (begin == std::string::npos) {
      if (attempt == retries_) {
        throw Error(ErrKind::NoJsonInReply, raw.substr(0, 200));
      }
      problem = "the reply contained no JSON object";
    } else {
      try {
        SemanticPayload payload =
            parse_payload(raw.substr(begin, end - begin));
        return {std::move(payload), raw};
      } catch (const SchemaViolation& e) {
        if (attempt == retries_) {
          throw Error(ErrKind::PayloadInvalid,
                      std::string(e.what()) + " (after " +
                          std::to_string(retries_ + 1) + " attempt(s))");
        }
        problem = e.report().to_text();
      }
    }
    messages.push_back({{"role", "assistant"}, {"content", raw}});
    messages.push_back(
        {{"role", "user"},
         {"content", "That reply was not a valid semantic payload: " +
                         problem + "\n" + request.prompt_template}});
  }
  throw Error(ErrKind::NoJsonInReply, raw.substr(0, 200));  // unreachable
}

BuildResult build_map(const WalkthroughTrace& trace,
                      SceneDescriber& describer) {
  if (trace.events.empty() ||
      trace.events.front().kind != TraceEvent::Kind::MoveTo) {
    throw Error(ErrKind::InvalidTrace,
                "the first event must be a move-to (it establishes the "
                "start node)");
  }

  BuildResult result;
  SentMap& map = result.map;
  std::optional<NodeId> previous;

  for (size_t i = 0; i < trace.events.size(); ++i) {
    const TraceEvent& event = trace.events[i];
    if (event.kind == TraceEvent::Kind::MoveTo) {
      auto it = map.nodes.find(event.node);
      if (it == map.nodes.end()) {
        NavNode node;
        node.id = event.node;
        node.zone = event.zone;
        map = add_nav_node(std::move(map), std::move(node));
      } else if (it->second.zone != event.zone) {
        result.warnings.push_back(
            trace_err(i, "revisit of '" + event.node + "' declares zone '" +
                             event.zone + "' but it was mapped as '" +
                             it->second.zone + "'; keeping the original"));
      }
      if (previous && *previous != event.node) {
        map = add_edge(std::move(map), *previous, event.node,
                       /*bidirectional=*/true);
      }
      previous = event.node;
    } else {
      if (!map.has_node(event.node)) {
        throw Error(ErrKind::InvalidTrace,
                    trace_err(i, "snapshot references '" + event.node +
                                     "', which no move-to has visited"));
      }
      DescriberResult described;
      try {
        described = describer.describe(
            {{event.image, event.hint}, semantic_payload_template(),
             event.hint});
      } catch (const Error& e) {
        throw Error(ErrKind::DescriberFailure, trace_err(i, e.what()));
      }

      NavNode& node = map.nodes.at(event.node);
      if (node.semantic) {
        result.warnings.push_back(
            trace_err(i, "second snapshot for '" + event.node +
                             "' overwrites the earlier payload"));
      }
      SentMap candidate = map;
      candidate.nodes.at(event.node).semantic = described.payload;
      ValidationReport report = validate_map(serialize_map(candidate));
      if (!report.ok()) {
        std::string first;
        for (const auto& issue : report.issues) {
          if (issue.severity == Severity::Error) {
            first = issue.path + ": " + issue.message;
            break;
          }
        }
        throw Error(ErrKind::PayloadInvalid, trace_err(i, first));
      }
      map = std::move(candidate);
      result.describer_results.push_back(std::move(described));
    }
  }
  return result;
}

SentMap review_and_patch(SentMap map, const std::vector<EditCommand>& edits) {
  SentMap working = std::move(map);
  for (size_t i = 0; i < edits.size(); ++i) {
    try {
      working = apply_edit(std::move(working), edits[i]);
    } catch (const Error& e) {
      // apply_edit only mutates through its value parameter, so the
      // caller's view is still the pre-batch map
      throw Error(ErrKind::BatchFailed,
                  "edit " + std::to_string(i) + " (" +
                      to_string(edits[i].op) + "): " + e.what());
    }
  }
  return working;
}

}  // namespace sentmap
