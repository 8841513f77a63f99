#include "sgvqa/json_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "sgvqa/text.hpp"

namespace sgvqa {

namespace {

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace

void to_json(json& j, const Fps& v) {
  if (v.den == 1) {
    j = v.num;
  } else {
    j = std::to_string(v.num) + "/" + std::to_string(v.den);
  }
}

void from_json(const json& j, Fps& v) {
  if (j.is_number_integer()) {
    v = Fps{j.get<std::int64_t>(), 1};
    return;
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    const auto slash = s.find('/');
    if (slash == std::string::npos) throw ValidationError("fps must look like \"num/den\"");
    try {
      v = Fps{std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1))};
    } catch (const std::exception&) {
      throw ValidationError("fps must look like \"num/den\"");
    }
    return;
  }
  throw ValidationError("fps must be an integer or a \"num/den\" string");
}

void to_json(json& j, const FrameDigest& v) {
  j = json{{"frame_index", v.frame_index}, {"features", v.features}};
}

void from_json(const json& j, FrameDigest& v) {
  j.at("frame_index").get_to(v.frame_index);
  j.at("features").get_to(v.features);
}

void to_json(json& j, const VideoRecord& v) {
  j = json{{"video_id", v.video_id},
           {"total_frames", v.total_frames},
           {"fps", v.fps},
           {"frame_refs", v.frame_refs}};
  put_optional(j, "digests", v.digests);
}

void from_json(const json& j, VideoRecord& v) {
  j.at("video_id").get_to(v.video_id);
  j.at("total_frames").get_to(v.total_frames);
  j.at("fps").get_to(v.fps);
  j.at("frame_refs").get_to(v.frame_refs);
  v.digests = get_optional<std::vector<FrameDigest>>(j, "digests");
}

void to_json(json& j, const Box2d& v) { j = json::array({v.x_min, v.y_min, v.x_max, v.y_max}); }

void from_json(const json& j, Box2d& v) {
  if (!j.is_array() || j.size() != 4) throw ValidationError("box2d must be a 4-element array");
  v = Box2d{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

void to_json(json& j, const Vec3& v) { j = json::array({v.x, v.y, v.z}); }

void from_json(const json& j, Vec3& v) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("position3d must be a 3-element array");
  v = Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(json& j, const Extent2& v) { j = json::array({v.width, v.height}); }

void from_json(const json& j, Extent2& v) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("extent3d must be a 2-element array");
  v = Extent2{j[0].get<double>(), j[1].get<double>()};
}

void to_json(json& j, const ObjectEntity& v) {
  j = json{{"object_id", v.object_id},
           {"label", v.label},
           {"confidence", v.confidence},
           {"box2d", v.box2d},
           {"role", to_string(v.role)}};
  put_optional(j, "position3d", v.position3d);
  put_optional(j, "extent3d", v.extent3d);
}

void from_json(const json& j, ObjectEntity& v) {
  j.at("object_id").get_to(v.object_id);
  j.at("label").get_to(v.label);
  j.at("confidence").get_to(v.confidence);
  j.at("box2d").get_to(v.box2d);
  v.role = role_from_string(j.at("role").get<std::string>());
  v.position3d = get_optional<Vec3>(j, "position3d");
  v.extent3d = get_optional<Extent2>(j, "extent3d");
}

void to_json(json& j, const SpatialRelation& v) {
  j = json{{"subject_id", v.subject_id},
           {"predicate", to_string(v.predicate)},
           {"target_id", v.target_id},
           {"frame_index", v.frame_index}};
}

void from_json(const json& j, SpatialRelation& v) {
  j.at("subject_id").get_to(v.subject_id);
  v.predicate = predicate_from_string(j.at("predicate").get<std::string>());
  j.at("target_id").get_to(v.target_id);
  j.at("frame_index").get_to(v.frame_index);
}

void to_json(json& j, const ActionTriple& v) {
  j = json{{"subject", v.subject}, {"relation", v.relation}, {"target", v.target}};
  put_optional(j, "frame_index", v.frame_index);
}

void from_json(const json& j, ActionTriple& v) {
  j.at("subject").get_to(v.subject);
  j.at("relation").get_to(v.relation);
  v.target = j.value("target", std::string{});
  v.frame_index = get_optional<int>(j, "frame_index");
}

void to_json(json& j, const FrameSceneGraph& v) {
  j = json{{"frame_index", v.frame_index},
           {"objects", v.objects},
           {"spatial_relations", v.spatial_relations},
           {"action_triples", v.action_triples}};
}

void from_json(const json& j, FrameSceneGraph& v) {
  j.at("frame_index").get_to(v.frame_index);
  v.objects = j.value("objects", std::vector<ObjectEntity>{});
  v.spatial_relations = j.value("spatial_relations", std::vector<SpatialRelation>{});
  v.action_triples = j.value("action_triples", std::vector<ActionTriple>{});
}

void to_json(json& j, const Interval& v) { j = json::array({v.start, v.end}); }

void from_json(const json& j, Interval& v) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("interval must be a 2-element array");
  v = Interval{j[0].get<int>(), j[1].get<int>()};
}

void to_json(json& j, const TemporalActionMap& v) {
  json entries = json::array();
  for (const auto& [triple, intervals] : v.entries) {
    json e = triple;
    e["intervals"] = intervals;
    entries.push_back(std::move(e));
  }
  j = json{{"entries", std::move(entries)}};
}

void from_json(const json& j, TemporalActionMap& v) {
  v.entries.clear();
  for (const auto& e : j.at("entries")) {
    auto triple = e.get<ActionTriple>();
    if (!v.entries.emplace(triple, e.at("intervals").get<std::vector<Interval>>()).second) {
      throw ValidationError("duplicate temporal map entry");
    }
  }
}

void to_json(json& j, const VideoSceneGraph& v) {
  j = json{{"video_id", v.video_id},
           {"sampled_indices", v.sampled_indices},
           {"frame_graphs", v.frame_graphs},
           {"main_objects", v.main_objects},
           {"temporal_map", v.temporal_map}};
}

void from_json(const json& j, VideoSceneGraph& v) {
  j.at("video_id").get_to(v.video_id);
  j.at("sampled_indices").get_to(v.sampled_indices);
  j.at("frame_graphs").get_to(v.frame_graphs);
  j.at("main_objects").get_to(v.main_objects);
  j.at("temporal_map").get_to(v.temporal_map);
}

void to_json(json& j, const Question& v) {
  j = json{{"question_id", v.question_id},
           {"video_id", v.video_id},
           {"text", v.text},
           {"options", v.options}};
  if (const int* idx = std::get_if<int>(&v.gold)) {
    j["gold"] = *idx;
  } else {
    j["gold"] = std::get<std::vector<std::string>>(v.gold);
  }
  if (v.qtype) j["qtype"] = to_string(*v.qtype);
}

void from_json(const json& j, Question& v) {
  j.at("question_id").get_to(v.question_id);
  j.at("video_id").get_to(v.video_id);
  j.at("text").get_to(v.text);
  v.options = j.value("options", std::vector<std::string>{});
  const auto& gold = j.at("gold");
  if (gold.is_number_integer()) {
    v.gold = gold.get<int>();
  } else if (gold.is_array()) {
    v.gold = gold.get<std::vector<std::string>>();
  } else {
    throw ValidationError("gold must be an option index or a list of answers");
  }
  if (auto t = get_optional<std::string>(j, "qtype")) {
    v.qtype = qtype_from_string(*t);
  } else {
    v.qtype.reset();
  }
}

void to_json(json& j, const SgVariantConfig& v) {
  j = json{{"variant", to_string(v.variant)},
           {"range_window", v.range_window},
           {"window_mode", to_string(v.window_mode)}};
}

void from_json(const json& j, SgVariantConfig& v) {
  v.variant = variant_from_string(j.at("variant").get<std::string>());
  v.range_window = j.value("range_window", 3);
  v.window_mode = window_mode_from_string(j.value("window_mode", std::string("symmetric")));
}

void to_json(json& j, const GeometryThresholds& v) {
  j = json{{"on_vertical", v.on_vertical},
           {"vertical", v.vertical},
           {"depth", v.depth},
           {"proximity", v.proximity}};
}

void to_json(json& j, const BackendConfig& v) {
  // The API key itself is never serialized, only the variable it comes from.
  // cache_dir is left out: it never changes results.
  j = json{{"kind", to_string(v.kind)},          {"mock_script", v.mock_script},
           {"base_url", v.base_url},             {"model", v.model},
           {"api_key_env", v.api_key_env},       {"timeout_s", v.timeout_s},
           {"max_retries", v.max_retries},       {"backoff_base_ms", v.backoff_base_ms},
           {"max_tokens", v.max_tokens}};
}

void to_json(json& j, const PipelineConfig& v) {
  j = json{{"sample_count", v.sample_count},
           {"sampler", to_string(v.sampler)},
           {"main_freq_threshold", v.main_freq_threshold},
           {"det_conf_threshold", v.det_conf_threshold},
           {"track_window", v.track_window},
           {"temperature", v.temperature},
           {"beam", v.beam},
           {"variant", v.variant},
           {"geometry", v.geometry},
           {"reuse_built_graphs", v.reuse_built_graphs},
           {"attach_images", v.attach_images},
           {"backend", v.backend}};
}

void to_json(json& j, const AnswerRecord& v) {
  j = json{{"question_id", v.question_id},
           {"variant", to_string(v.variant)},
           {"prompt_hash", v.prompt_hash},
           {"latency_ms", v.latency_ms},
           {"parse_failure", v.parse_failure},
           {"raw_response", v.raw_response}};
  if (v.predicted) {
    if (const int* idx = std::get_if<int>(&*v.predicted)) {
      j["predicted"] = *idx;
    } else {
      j["predicted"] = std::get<std::string>(*v.predicted);
    }
  }
  put_optional(j, "correct", v.correct);
  put_optional(j, "error", v.error);
}

void from_json(const json& j, AnswerRecord& v) {
  j.at("question_id").get_to(v.question_id);
  v.variant = variant_from_string(j.at("variant").get<std::string>());
  v.prompt_hash = j.value("prompt_hash", std::string{});
  v.latency_ms = j.value("latency_ms", std::int64_t{0});
  v.parse_failure = j.value("parse_failure", false);
  v.raw_response = j.value("raw_response", std::string{});
  v.predicted.reset();
  if (auto it = j.find("predicted"); it != j.end() && !it->is_null()) {
    if (it->is_number_integer()) {
      v.predicted = it->get<int>();
    } else {
      v.predicted = it->get<std::string>();
    }
  }
  v.correct = get_optional<bool>(j, "correct");
  v.error = get_optional<std::string>(j, "error");
}

// --- files ---------------------------------------------------------------------

std::string to_pretty(const json& j) { return j.dump(2) + "\n"; }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  // Unique per writer thread so concurrent writers of the same key never share a temp.
  auto tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::pair<std::size_t, std::string>> jsonl_rows(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string>> rows;
  std::size_t line_no = 0;
  for (auto& line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    rows.emplace_back(line_no, std::move(line));
  }
  return rows;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace sgvqa
