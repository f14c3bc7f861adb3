#include "sentmap/endpoint.hpp"

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

using nlohmann::json;

namespace sentmap {

namespace {

std::string read_file_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrKind::ConfigError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

EndpointConfig parse_endpoint_config(const std::string& doc) {
  json j = json::parse(doc, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrKind::ConfigError, "endpoint config is not a JSON object");
  }
  EndpointConfig cfg;
  try {
    cfg.base_url = j.at("base_url").get<std::string>();
    cfg.model = j.at("model").get<std::string>();
    cfg.api_key_env = j.value("api_key_env", std::string());
    cfg.temperature = j.value("temperature", 0.0);
    cfg.timeout_s = j.value("timeout_s", 60);
    cfg.retries = j.value("retries", 2);
  } catch (const json::exception& e) {
    throw Error(ErrKind::ConfigError,
                std::string("endpoint config: ") + e.what());
  }
  if (cfg.base_url.empty()) {
    throw Error(ErrKind::ConfigError, "endpoint config: base_url is empty");
  }
  if (cfg.timeout_s <= 0 || cfg.retries < 0) {
    throw Error(ErrKind::ConfigError,
                "endpoint config: timeout_s must be positive, retries >= 0");
  }
  return cfg;
}

EndpointConfig load_endpoint_config(const std::string& path) {
  return parse_endpoint_config(read_file_or_throw(path));
}

std::string build_chat_request(const EndpointConfig& config,
                               const std::vector<ChatMessage>& messages) {
  json body;
  body["model"] = config.model;
  body["temperature"] = config.temperature;
  json msgs = json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"role", m.role}, {"content", m.content}});
  }
  body["messages"] = std::move(msgs);
  return body.dump();
}

std::string extract_reply(const std::string& response_body) {
  json j = json::parse(response_body, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrKind::TransportError,
                "response body is not JSON: " + response_body.substr(0, 120));
  }
  try {
    return j.at("choices").at(0).at("message").at("content")
        .get<std::string>();
  } catch (const json::exception&) {
    throw Error(ErrKind::TransportError,
                "response body lacks choices[0].message.content");
  }
}

std::string wrap_reply(const std::string& content) {
  json body;
  body["choices"] =
      json::array({{{"message", {{"role", "assistant"}, {"content", content}}},
                    {"finish_reason", "stop"}}});
  return body.dump();
}

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char out[17];
  snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
  return out;
}

std::string serialize_transcript(const Transcript& transcript) {
  json arr = json::array();
  for (const auto& turn : transcript) {
    arr.push_back({{"request_hash", turn.request_hash},
                   {"request", turn.request},
                   {"response", turn.response}});
  }
  return arr.dump(2) + "\n";
}

Transcript parse_transcript(const std::string& doc) {
  json arr = json::parse(doc, nullptr, false);
  if (arr.is_discarded() || !arr.is_array()) {
    throw Error(ErrKind::ConfigError, "transcript is not a JSON array");
  }
  Transcript transcript;
  for (size_t i = 0; i < arr.size(); ++i) {
    const json& t = arr[i];
    if (!t.is_object() || !t.contains("request") || !t.contains("response")) {
      throw Error(ErrKind::ConfigError,
                  "transcript turn " + std::to_string(i) +
                      " lacks request/response");
    }
    TranscriptTurn turn;
    turn.request = t.at("request").get<std::string>();
    turn.response = t.at("response").get<std::string>();
    turn.request_hash = t.value("request_hash", fnv1a_hex(turn.request));
    if (turn.request_hash != fnv1a_hex(turn.request)) {
      throw Error(ErrKind::ConfigError,
                  "transcript turn " + std::to_string(i) +
                      ": request_hash does not match the stored request");
    }
    transcript.push_back(std::move(turn));
  }
  return transcript;
}

Transcript load_transcript(const std::string& path) {
  return parse_transcript(read_file_or_throw(path));
}

void save_transcript(const Transcript& transcript, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrKind::ConfigError, "cannot write " + path);
  out << serialize_transcript(transcript);
}

HttpChatEndpoint::HttpChatEndpoint(EndpointConfig config)
    : config_(std::move(config)) {}

std::string HttpChatEndpoint::complete(const std::string& request_body) {
  // split base_url into origin and path prefix; accept both ".../v1" style
  // bases and bare origins
  std::string origin = config_.base_url;
  std::string prefix;
  size_t scheme = origin.find("://");
  size_t slash =
      origin.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash != std::string::npos) {
    prefix = origin.substr(slash);
    origin = origin.substr(0, slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  }
  std::string path =
      prefix.empty() ? "/v1/chat/completions" : prefix + "/chat/completions";

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key) {
      throw Error(ErrKind::ConfigError,
                  "environment variable " + config_.api_key_env +
                      " is not set (the endpoint config names it as the "
                      "API-key source)");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_failure;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    httplib::Client client(origin);
    client.set_connection_timeout(config_.timeout_s, 0);
    client.set_read_timeout(config_.timeout_s, 0);
    client.set_write_timeout(config_.timeout_s, 0);
    client.set_follow_location(true);

    auto res = client.Post(path, headers, request_body, "application/json");
    if (!res) {
      last_failure = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status) + ": " +
                     res->body.substr(0, 200);
      continue;  // transient; retry
    }
    if (res->status != 200) {
      throw Error(ErrKind::TransportError,
                  "HTTP " + std::to_string(res->status) + " from " + origin +
                      path + ": " + res->body.substr(0, 200));
    }
    return res->body;
  }
  throw Error(ErrKind::TransportError,
              "giving up on " + origin + path + " after " +
                  std::to_string(config_.retries + 1) + " attempt(s); last: " +
                  last_failure);
}

ScriptedEndpoint::ScriptedEndpoint(Transcript turns)
    : turns_(std::move(turns)) {}

std::string ScriptedEndpoint::complete(const std::string& request_body) {
  if (next_ >= turns_.size()) {
    throw Error(ErrKind::ConfigError,
                "replay transcript exhausted after " +
                    std::to_string(turns_.size()) + " turn(s)");
  }
  const TranscriptTurn& turn = turns_[next_];
  std::string hash = fnv1a_hex(request_body);
  if (hash != turn.request_hash) {
    throw Error(ErrKind::ConfigError,
                "replay turn " + std::to_string(next_) +
                    ": request hash " + hash + " does not match recorded " +
                    turn.request_hash +
                    " — the prompt has drifted since this transcript was "
                    "recorded");
  }
  ++next_;
  return turn.response;
}

ReplyScript::ReplyScript(std::vector<std::string> replies)
    : replies_(std::move(replies)) {}

std::string ReplyScript::complete(const std::string& request_body) {
  if (next_ >= replies_.size()) {
    throw Error(ErrKind::TransportError,
                "scripted replies exhausted after " +
                    std::to_string(replies_.size()) + " turn(s)");
  }
  std::string response = wrap_reply(replies_[next_++]);
  transcript_.push_back({fnv1a_hex(request_body), request_body, response});
  return response;
}

}  // namespace sentmap
