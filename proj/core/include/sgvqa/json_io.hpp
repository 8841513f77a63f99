#pragma once

// JSON / JSONL encoding for the domain types. Field names follow the type
// definitions in model.hpp; boxes, positions and intervals are arrays.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgvqa/errors.hpp"
#include "sgvqa/model.hpp"

namespace sgvqa {

using json = nlohmann::json;

void to_json(json& j, const Fps& v);
void from_json(const json& j, Fps& v);
void to_json(json& j, const FrameDigest& v);
void from_json(const json& j, FrameDigest& v);
void to_json(json& j, const VideoRecord& v);
void from_json(const json& j, VideoRecord& v);
void to_json(json& j, const Box2d& v);
void from_json(const json& j, Box2d& v);
void to_json(json& j, const Vec3& v);
void from_json(const json& j, Vec3& v);
void to_json(json& j, const Extent2& v);
void from_json(const json& j, Extent2& v);
void to_json(json& j, const ObjectEntity& v);
void from_json(const json& j, ObjectEntity& v);
void to_json(json& j, const SpatialRelation& v);
void from_json(const json& j, SpatialRelation& v);
void to_json(json& j, const ActionTriple& v);
void from_json(const json& j, ActionTriple& v);
void to_json(json& j, const FrameSceneGraph& v);
void from_json(const json& j, FrameSceneGraph& v);
void to_json(json& j, const Interval& v);
void from_json(const json& j, Interval& v);
void to_json(json& j, const TemporalActionMap& v);
void from_json(const json& j, TemporalActionMap& v);
void to_json(json& j, const VideoSceneGraph& v);
void from_json(const json& j, VideoSceneGraph& v);
void to_json(json& j, const Question& v);
void from_json(const json& j, Question& v);
void to_json(json& j, const SgVariantConfig& v);
void from_json(const json& j, SgVariantConfig& v);
void to_json(json& j, const GeometryThresholds& v);
void to_json(json& j, const BackendConfig& v);
void to_json(json& j, const PipelineConfig& v);
void to_json(json& j, const AnswerRecord& v);
void from_json(const json& j, AnswerRecord& v);

template <typename T>
concept Validatable = requires(const T& t) { validate(t); };

/// Structural decode followed by the type's validator, if it has one.
/// Library exceptions surface as ValidationError.
template <typename T>
T decode(const json& j) {
  T value;
  try {
    value = j.get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(e.what());
  }
  if constexpr (Validatable<T>) validate(value);
  return value;
}

template <typename T>
T decode_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(e.what());
  }
  return decode<T>(j);
}

/// Pretty JSON with a trailing newline; byte-stable for equal values.
std::string to_pretty(const json& j);

std::string read_text_file(const std::filesystem::path& path);
json read_json_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Non-blank lines of a JSONL file, each decoded as T. Errors carry the
/// 1-based line number.
template <typename T>
std::vector<T> read_jsonl(const std::filesystem::path& path);

template <typename T>
std::string to_jsonl(const std::vector<T>& values) {
  std::string out;
  for (const auto& v : values) {
    out += json(v).dump();
    out += '\n';
  }
  return out;
}

std::vector<std::pair<std::size_t, std::string>> jsonl_rows(std::string_view text);

template <typename T>
std::vector<T> read_jsonl(const std::filesystem::path& path) {
  std::vector<T> out;
  for (const auto& [line_no, row] : jsonl_rows(read_text_file(path))) {
    try {
      out.push_back(decode_text<T>(row));
    } catch (const std::exception& e) {
      throw DatasetError(line_no, e.what());
    }
  }
  return out;
}

/// Hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

}  // namespace sgvqa
