#pragma once

// Single boundary to any vision-language model. Every prompt in the pipeline
// goes through Gateway::complete, which fronts a backend (scripted mock or an
// OpenAI-compatible HTTP server) with an optional on-disk response cache.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "sgvqa/json_io.hpp"

namespace sgvqa {

enum class Stage {
  describe_frame,
  detect_objects,
  extract_actions,
  global_caption,
  verify_action,
  frame_relevance,
  extract_graph,
  final_answer,
  similarity_match,
};

inline constexpr Stage kAllStages[] = {
    Stage::describe_frame,  Stage::detect_objects, Stage::extract_actions,
    Stage::global_caption,  Stage::verify_action,  Stage::frame_relevance,
    Stage::extract_graph,   Stage::final_answer,   Stage::similarity_match};

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);

struct ChatRequest {
  Stage stage = Stage::final_answer;
  std::string prompt;
  std::vector<std::string> image_refs;
  double temperature = 0.5;
  int max_tokens = 512;
  int beam = 1;

  bool operator==(const ChatRequest&) const = default;
};

struct ChatResponse {
  std::string text;
  std::string backend_id;
  bool cached = false;
  std::int64_t latency_ms = 0;
};

void validate(const ChatRequest& req);

/// Cache / identity key of a request: lowercase hex SHA-256 over the compact
/// JSON object
///   {"image_refs":[...],"max_tokens":N,"prompt":"...","stage":"...","temperature":T}
/// with keys in that (sorted) order and nlohmann's shortest round-trip number
/// formatting. Beam is not part of the key.
std::string request_key(const ChatRequest& req);

/// The exact bytes hashed by request_key.
std::string request_key_material(const ChatRequest& req);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Stable identifier; also names the backend's cache partition.
  virtual std::string id() const = 0;
  /// Returns non-empty response text or throws GatewayError.
  virtual std::string complete(const ChatRequest& req) = 0;
};

// --- scripted mock -----------------------------------------------------------------

struct MockRule {
  enum class Match { contains, regex };

  Stage stage = Stage::final_answer;
  Match match = Match::contains;
  std::string pattern;
  /// When nonempty, some image ref of the request must contain it.
  std::string image;
  std::string response;
};

/// Ordered rules, first match wins; otherwise the stage default answers. A
/// rule matches on the prompt ("contains" or "regex", both optional) and,
/// optionally, on a substring of one of the attached image refs ("image").
///
/// JSON form:
///   {"default": "No",                       // optional, fills missing stages
///    "defaults": {"final_answer": "A", ...},
///    "rules": [{"stage": "frame_relevance", "contains": "frame 2", "response": "Yes"},
///              {"stage": "final_answer", "regex": "turn\\?", "response": "D"},
///              {"stage": "describe_frame", "image": "cats/", "response": "..."}]}
struct MockScript {
  std::vector<MockRule> rules;
  std::map<Stage, std::string> defaults;

  /// Every stage has a default and no response is empty.
  void validate() const;

  static MockScript from_json(const json& j);
  static MockScript load(const std::filesystem::path& path);
  json to_json() const;
};

class MockBackend final : public ChatBackend {
 public:
  explicit MockBackend(MockScript script);

  std::string id() const override { return id_; }
  std::string complete(const ChatRequest& req) override;

  std::size_t calls() const { return calls_.load(); }

 private:
  struct CompiledRule {
    MockRule rule;
    std::optional<std::regex> re;
  };

  MockScript script_;
  std::vector<CompiledRule> compiled_;
  std::string id_;
  std::atomic<std::size_t> calls_{0};
};

// --- OpenAI-compatible HTTP -----------------------------------------------------------

struct HttpBackendOptions {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model;
  std::string api_key;  // sent as a Bearer token when non-empty
  double timeout_s = 120.0;
  int max_retries = 3;
  int backoff_base_ms = 500;
  int backoff_cap_ms = 16000;
  /// Injected for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// POSTs to <base_url>/v1/chat/completions and returns
/// choices[0].message.content. Transport failures and 408/429/5xx responses
/// are retried up to max_retries times with exponential backoff
/// (base * 2^attempt, capped); the last failure is rethrown. Malformed bodies
/// are terminal protocol errors. beam > 1 is rejected: the wire format has no
/// beam control.
class HttpBackend final : public ChatBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);

  std::string id() const override;
  std::string complete(const ChatRequest& req) override;

  /// Request body for `req` exactly as it goes on the wire.
  json build_body(const ChatRequest& req) const;
  /// Extracts the first choice's message content; throws GatewayError(protocol).
  static std::string parse_body(std::string_view body);

 private:
  HttpBackendOptions opts_;
  std::string host_;         // scheme://host[:port]
  std::string path_prefix_;  // anything after the authority, without trailing '/'
};

/// Image reference to a chat content URL: http(s) and data: URLs pass
/// through, anything else is read from disk and inlined as a base64 data URL.
std::string image_url_for(const std::string& ref);

// --- cache + gateway ---------------------------------------------------------------------

/// One JSON file per request key under <dir>/<key[0:2]>/<key>.json, written
/// atomically.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> load(const std::string& key) const;
  void store(const std::string& key, const ChatRequest& req, const std::string& text,
             const std::string& backend_id) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;
  std::filesystem::path dir_;
};

struct CallLogEntry {
  Stage stage;
  std::string key;
  bool cached;
};

/// Thread-safe. Duplicate concurrent requests may both reach the backend.
class Gateway {
 public:
  /// With a cache root, responses live under <cache_root>/<backend id>/.
  explicit Gateway(std::shared_ptr<ChatBackend> backend,
                   std::optional<std::filesystem::path> cache_root = std::nullopt);

  ChatResponse complete(const ChatRequest& req);

  const std::string& backend_id() const { return backend_id_; }
  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::vector<CallLogEntry> call_log() const;
  std::size_t count_stage(Stage s) const;

 private:
  std::shared_ptr<ChatBackend> backend_;
  std::string backend_id_;
  std::optional<ResponseCache> cache_;
  std::atomic<std::size_t> backend_calls_{0};
  mutable std::mutex log_mu_;
  std::vector<CallLogEntry> log_;
};

/// Backend from configuration; reads the API key from the configured
/// environment variable.
std::shared_ptr<ChatBackend> make_backend(const BackendConfig& cfg);
std::shared_ptr<Gateway> make_gateway(const BackendConfig& cfg);

}  // namespace sgvqa
