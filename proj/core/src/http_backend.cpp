#include <httplib.h>
#include <openssl/evp.h>

#include <algorithm>
#include <thread>

#include "sgvqa/errors.hpp"
#include "sgvqa/gateway.hpp"
#include "sgvqa/text.hpp"

namespace sgvqa {

namespace {

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

std::string base64(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string mime_for(const std::filesystem::path& p) {
  const auto ext = to_lower(p.extension().string());
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".webp") return "image/webp";
  if (ext == ".gif") return "image/gif";
  return "application/octet-stream";
}

bool has_prefix(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace

std::string image_url_for(const std::string& ref) {
  if (has_prefix(ref, "http://") || has_prefix(ref, "https://") || has_prefix(ref, "data:")) {
    return ref;
  }
  std::string bytes;
  try {
    bytes = read_text_file(ref);
  } catch (const std::exception&) {
    throw GatewayError(GatewayError::Kind::config, "cannot read image " + ref);
  }
  return "data:" + mime_for(ref) + ";base64," + base64(bytes);
}

HttpBackend::HttpBackend(HttpBackendOptions options) : opts_(std::move(options)) {
  if (opts_.model.empty()) throw GatewayError(GatewayError::Kind::config, "http backend needs a model");
  if (opts_.max_retries < 0) {
    throw GatewayError(GatewayError::Kind::config, "max_retries must be non-negative");
  }
  const auto scheme_end = opts_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw GatewayError(GatewayError::Kind::config, "base url needs a scheme: " + opts_.base_url);
  }
  const auto path_start = opts_.base_url.find('/', scheme_end + 3);
  host_ = opts_.base_url.substr(0, path_start);
  if (path_start != std::string::npos) path_prefix_ = opts_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (!opts_.sleep) {
    opts_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

std::string HttpBackend::id() const { return "openai-" + opts_.model; }

json HttpBackend::build_body(const ChatRequest& req) const {
  json content;
  if (req.image_refs.empty()) {
    content = req.prompt;
  } else {
    content = json::array();
    content.push_back({{"type", "text"}, {"text", req.prompt}});
    for (const auto& ref : req.image_refs) {
      content.push_back({{"type", "image_url"}, {"image_url", {{"url", image_url_for(ref)}}}});
    }
  }
  return json{{"model", opts_.model},
              {"messages", json::array({json{{"role", "user"}, {"content", std::move(content)}}})},
              {"temperature", req.temperature},
              {"max_tokens", req.max_tokens}};
}

std::string HttpBackend::parse_body(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw GatewayError(GatewayError::Kind::protocol, std::string("response is not JSON: ") + e.what());
  }
  const auto* choices = j.is_object() && j.contains("choices") ? &j["choices"] : nullptr;
  if (!choices || !choices->is_array() || choices->empty()) {
    throw GatewayError(GatewayError::Kind::protocol, "response has no choices");
  }
  const auto& msg = (*choices)[0].value("message", json::object());
  const auto it = msg.find("content");
  std::string text;
  if (it != msg.end() && it->is_string()) {
    text = it->get<std::string>();
  } else if (it != msg.end() && it->is_array()) {
    // Some servers answer with content parts.
    for (const auto& part : *it) {
      if (part.value("type", "") == "text") text += part.value("text", "");
    }
  } else {
    throw GatewayError(GatewayError::Kind::protocol, "choices[0].message.content missing");
  }
  if (text.empty()) throw GatewayError(GatewayError::Kind::protocol, "empty message content");
  return text;
}

std::string HttpBackend::complete(const ChatRequest& req) {
  if (req.beam > 1) {
    throw GatewayError(GatewayError::Kind::config,
                       "beam > 1 is not supported by the chat completions wire format");
  }
  const std::string body = build_body(req).dump();
  const std::string path = path_prefix_ + "/v1/chat/completions";
  httplib::Headers headers;
  if (!opts_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opts_.api_key);

  const auto timeout_us = static_cast<std::int64_t>(opts_.timeout_s * 1e6);
  const auto sec = static_cast<time_t>(timeout_us / 1000000);
  const auto usec = static_cast<time_t>(timeout_us % 1000000);

  for (int attempt = 0;; ++attempt) {
    httplib::Client cli(host_);
    cli.set_connection_timeout(sec, usec);
    cli.set_read_timeout(sec, usec);
    cli.set_write_timeout(sec, usec);

    std::optional<GatewayError> failure;
    auto res = cli.Post(path, headers, body, "application/json");
    if (!res) {
      failure.emplace(GatewayError::Kind::transport,
                      "POST " + host_ + path + " failed: " + httplib::to_string(res.error()));
    } else if (res->status == 200) {
      return parse_body(res->body);
    } else if (retryable_status(res->status)) {
      failure.emplace(GatewayError::Kind::transport,
                      "POST " + host_ + path + " returned HTTP " + std::to_string(res->status));
    } else {
      throw GatewayError(GatewayError::Kind::http_status,
                         "POST " + host_ + path + " returned HTTP " + std::to_string(res->status) +
                             ": " + res->body.substr(0, 200));
    }

    if (attempt >= opts_.max_retries) {
      throw GatewayError(failure->kind(), std::string(failure->what()) + " (after " +
                                              std::to_string(attempt) + " retries)");
    }
    const auto shift = std::min(attempt, 20);
    const auto delay = std::min<std::int64_t>(static_cast<std::int64_t>(opts_.backoff_base_ms) << shift,
                                              opts_.backoff_cap_ms);
    opts_.sleep(std::chrono::milliseconds(delay));
  }
}

}  // namespace sgvqa
