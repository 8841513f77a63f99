#include "sgvqa/gateway.hpp"

#include <algorithm>
#include <cstdlib>

#include "sgvqa/errors.hpp"
#include "sgvqa/text.hpp"

namespace sgvqa {

namespace {

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::describe_frame, "describe_frame"},   {Stage::detect_objects, "detect_objects"},
    {Stage::extract_actions, "extract_actions"}, {Stage::global_caption, "global_caption"},
    {Stage::verify_action, "verify_action"},     {Stage::frame_relevance, "frame_relevance"},
    {Stage::extract_graph, "extract_graph"},     {Stage::final_answer, "final_answer"},
    {Stage::similarity_match, "similarity_match"}};

std::string sanitize_for_path(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out;
}

}  // namespace

std::string_view to_string(Stage s) {
  for (const auto& [stage, name] : kStageNames) {
    if (stage == s) return name;
  }
  return "?";
}

Stage stage_from_string(std::string_view s) {
  for (const auto& [stage, name] : kStageNames) {
    if (name == s) return stage;
  }
  throw ValidationError("unknown stage '" + std::string(s) + "'");
}

void validate(const ChatRequest& req) {
  if (req.prompt.empty()) throw ValidationError("chat request prompt must be nonempty");
  if (!(req.temperature >= 0.0)) throw ValidationError("chat request temperature must be >= 0");
  if (req.max_tokens <= 0) throw ValidationError("chat request max_tokens must be positive");
  if (req.beam <= 0) throw ValidationError("chat request beam must be positive");
}

std::string request_key_material(const ChatRequest& req) {
  const json material{{"stage", to_string(req.stage)},
                      {"prompt", req.prompt},
                      {"image_refs", req.image_refs},
                      {"temperature", req.temperature},
                      {"max_tokens", req.max_tokens}};
  return material.dump();
}

std::string request_key(const ChatRequest& req) { return sha256_hex(request_key_material(req)); }

// --- mock -------------------------------------------------------------------------

void MockScript::validate() const {
  for (Stage s : kAllStages) {
    auto it = defaults.find(s);
    if (it == defaults.end()) {
      throw ValidationError("mock script has no default for stage " + std::string(to_string(s)));
    }
    if (it->second.empty()) {
      throw ValidationError("mock script default for " + std::string(to_string(s)) + " is empty");
    }
  }
  for (const auto& r : rules) {
    if (r.response.empty()) throw ValidationError("mock rule '" + r.pattern + "' has an empty response");
  }
}

MockScript MockScript::from_json(const json& j) {
  MockScript script;
  try {
    if (auto it = j.find("defaults"); it != j.end()) {
      for (const auto& [name, text] : it->items()) {
        script.defaults[stage_from_string(name)] = text.get<std::string>();
      }
    }
    if (auto it = j.find("default"); it != j.end()) {
      const auto fallback = it->get<std::string>();
      for (Stage s : kAllStages) script.defaults.emplace(s, fallback);
    }
    for (const auto& r : j.value("rules", json::array())) {
      MockRule rule;
      rule.stage = stage_from_string(r.at("stage").get<std::string>());
      if (r.contains("regex")) {
        rule.match = MockRule::Match::regex;
        rule.pattern = r.at("regex").get<std::string>();
      } else {
        rule.match = MockRule::Match::contains;
        rule.pattern = r.value("contains", std::string());
      }
      rule.image = r.value("image", std::string());
      rule.response = r.at("response").get<std::string>();
      script.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("mock script: ") + e.what());
  }
  script.validate();
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

json MockScript::to_json() const {
  json defaults_json = json::object();
  for (const auto& [stage, text] : defaults) defaults_json[std::string(sgvqa::to_string(stage))] = text;
  json rules_json = json::array();
  for (const auto& r : rules) {
    json rule{{"stage", sgvqa::to_string(r.stage)},
              {r.match == MockRule::Match::regex ? "regex" : "contains", r.pattern},
              {"response", r.response}};
    if (!r.image.empty()) rule["image"] = r.image;
    rules_json.push_back(std::move(rule));
  }
  return json{{"defaults", defaults_json}, {"rules", rules_json}};
}

MockBackend::MockBackend(MockScript script) : script_(std::move(script)) {
  script_.validate();
  for (const auto& rule : script_.rules) {
    CompiledRule c{rule, std::nullopt};
    if (rule.match == MockRule::Match::regex) {
      try {
        c.re.emplace(rule.pattern, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw ValidationError("mock rule regex '" + rule.pattern + "': " + e.what());
      }
    }
    compiled_.push_back(std::move(c));
  }
  id_ = "mock-" + sha256_hex(script_.to_json().dump()).substr(0, 12);
}

std::string MockBackend::complete(const ChatRequest& req) {
  ++calls_;
  for (const auto& c : compiled_) {
    if (c.rule.stage != req.stage) continue;
    if (!c.rule.image.empty() &&
        std::none_of(req.image_refs.begin(), req.image_refs.end(), [&](const std::string& ref) {
          return ref.find(c.rule.image) != std::string::npos;
        })) {
      continue;
    }
    const bool hit = c.re ? std::regex_search(req.prompt, *c.re)
                          : req.prompt.find(c.rule.pattern) != std::string::npos;
    if (hit) return c.rule.response;
  }
  return script_.defaults.at(req.stage);
}

// --- cache ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::load(const std::string& key) const {
  const auto path = path_for(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    const auto entry = read_json_file(path);
    if (entry.at("key").get<std::string>() != key) return std::nullopt;
    auto text = entry.at("text").get<std::string>();
    if (text.empty()) return std::nullopt;
    return text;
  } catch (const std::exception&) {
    // Unreadable entries are recomputed and overwritten.
    return std::nullopt;
  }
}

void ResponseCache::store(const std::string& key, const ChatRequest& req, const std::string& text,
                          const std::string& backend_id) const {
  const json entry{{"key", key},
                   {"stage", to_string(req.stage)},
                   {"backend_id", backend_id},
                   {"text", text}};
  write_file_atomic(path_for(key), to_pretty(entry));
}

// --- gateway -----------------------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<ChatBackend> backend,
                 std::optional<std::filesystem::path> cache_root)
    : backend_(std::move(backend)) {
  if (!backend_) throw GatewayError(GatewayError::Kind::config, "gateway needs a backend");
  backend_id_ = backend_->id();
  if (cache_root) cache_.emplace(*cache_root / sanitize_for_path(backend_id_));
}

ChatResponse Gateway::complete(const ChatRequest& req) {
  validate(req);
  const auto start = std::chrono::steady_clock::now();
  const auto key = request_key(req);

  ChatResponse resp;
  resp.backend_id = backend_id_;
  std::optional<std::string> hit;
  if (cache_) hit = cache_->load(key);
  if (hit) {
    resp.text = std::move(*hit);
    resp.cached = true;
  } else {
    ++backend_calls_;
    resp.text = backend_->complete(req);
    if (resp.text.empty()) {
      throw GatewayError(GatewayError::Kind::protocol, "backend returned an empty response");
    }
    if (cache_) cache_->store(key, req, resp.text, backend_id_);
  }
  resp.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  {
    std::lock_guard lock(log_mu_);
    log_.push_back(CallLogEntry{req.stage, key, resp.cached});
  }
  return resp;
}

std::vector<CallLogEntry> Gateway::call_log() const {
  std::lock_guard lock(log_mu_);
  return log_;
}

std::size_t Gateway::count_stage(Stage s) const {
  std::lock_guard lock(log_mu_);
  std::size_t n = 0;
  for (const auto& e : log_) n += e.stage == s ? 1 : 0;
  return n;
}

std::shared_ptr<ChatBackend> make_backend(const BackendConfig& cfg) {
  if (cfg.kind == BackendKind::mock) {
    if (cfg.mock_script.empty()) {
      throw GatewayError(GatewayError::Kind::config, "mock backend needs a script (--mock-script)");
    }
    return std::make_shared<MockBackend>(MockScript::load(cfg.mock_script));
  }
  HttpBackendOptions opts;
  opts.base_url = cfg.base_url;
  opts.model = cfg.model;
  if (const char* key = std::getenv(cfg.api_key_env.c_str())) opts.api_key = key;
  opts.timeout_s = cfg.timeout_s;
  opts.max_retries = cfg.max_retries;
  opts.backoff_base_ms = cfg.backoff_base_ms;
  return std::make_shared<HttpBackend>(std::move(opts));
}

std::shared_ptr<Gateway> make_gateway(const BackendConfig& cfg) {
  std::optional<std::filesystem::path> cache;
  if (!cfg.cache_dir.empty()) cache = cfg.cache_dir;
  return std::make_shared<Gateway>(make_backend(cfg), cache);
}

}  // namespace sgvqa
