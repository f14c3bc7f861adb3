#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sentmap/core.hpp"

// Chat-completions client plumbing shared by the planner and the remote
// scene describer: endpoint configuration, request/response transcripts
// for byte-exact replay, and the three endpoint implementations (live
// HTTP, recorded-transcript replay, canned replies for tests).

namespace sentmap {

struct EndpointConfig {
  std::string base_url;     // e.g. "https://api.example.com/v1"
  std::string model;
  std::string api_key_env;  // name of the env var holding the key
  double temperature = 0.0;
  int timeout_s = 60;
  int retries = 2;

  bool operator==(const EndpointConfig&) const = default;
};

// JSON object {base_url, model, api_key_env, temperature, timeout_s,
// retries}; the last three are optional. Throws ConfigError.
EndpointConfig parse_endpoint_config(const std::string& doc);
EndpointConfig load_endpoint_config(const std::string& path);

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

// Deterministic request body for a chat-completions call.
std::string build_chat_request(const EndpointConfig& config,
                               const std::vector<ChatMessage>& messages);

// choices[0].message.content. Throws TransportError when the body is not
// a well-formed chat-completions response.
std::string extract_reply(const std::string& response_body);

// Minimal response body wrapping one assistant reply; the shape
// extract_reply expects.
std::string wrap_reply(const std::string& content);

// FNV-1a over the raw bytes, rendered as 16 lowercase hex digits. Used to
// key transcript turns so replay can detect prompt drift.
std::string fnv1a_hex(const std::string& bytes);

struct TranscriptTurn {
  std::string request_hash;  // fnv1a_hex(request)
  std::string request;       // full request body
  std::string response;      // full response body

  bool operator==(const TranscriptTurn&) const = default;
};

using Transcript = std::vector<TranscriptTurn>;

// Wire form: JSON array of {request_hash, request, response}.
std::string serialize_transcript(const Transcript& transcript);
Transcript parse_transcript(const std::string& doc);  // throws ConfigError
Transcript load_transcript(const std::string& path);
void save_transcript(const Transcript& transcript, const std::string& path);

class ChatEndpoint {
 public:
  virtual ~ChatEndpoint() = default;

  // Takes a full request body, returns the full response body.
  // Throws TransportError on delivery failure.
  virtual std::string complete(const std::string& request_body) = 0;
};

// Live client for a chat-completions-compatible server. The bearer token
// is read from the env var named in the config, never from flags or
// files. Retries transient failures up to config.retries extra attempts.
class HttpChatEndpoint : public ChatEndpoint {
 public:
  explicit HttpChatEndpoint(EndpointConfig config);
  std::string complete(const std::string& request_body) override;

 private:
  EndpointConfig config_;
};

// Replays a recorded transcript in order. Each incoming request must hash
// to the recorded request_hash — a mismatch means the prompt drifted since
// the recording and the replay would be meaningless. Throws ConfigError on
// drift or when the transcript runs out.
class ScriptedEndpoint : public ChatEndpoint {
 public:
  explicit ScriptedEndpoint(Transcript turns);
  std::string complete(const std::string& request_body) override;

  size_t consumed() const { return next_; }
  bool exhausted() const { return next_ == turns_.size(); }

 private:
  Transcript turns_;
  size_t next_ = 0;
};

// Hands out canned assistant replies in order, wrapped as response bodies,
// and records the exchange. Recording new transcript fixtures is exactly:
// run the planner against a ReplyScript, save its transcript.
class ReplyScript : public ChatEndpoint {
 public:
  explicit ReplyScript(std::vector<std::string> replies);
  std::string complete(const std::string& request_body) override;

  const Transcript& transcript() const { return transcript_; }

 private:
  std::vector<std::string> replies_;
  size_t next_ = 0;
  Transcript transcript_;
};

}  // namespace sentmap
