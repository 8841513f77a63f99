#pragma once

// Shared domain types for the scene-graph VideoQA pipeline. Every value is
// plain data: immutable once built, freely copyable across threads.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sgvqa {

struct Fps {
  std::int64_t num = 30;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Fps&) const = default;
};

struct FrameDigest {
  int frame_index = 0;
  /// Downscaled grayscale intensities in [0, 1].
  std::vector<double> features;

  bool operator==(const FrameDigest&) const = default;
};

struct VideoRecord {
  std::string video_id;
  int total_frames = 0;
  Fps fps;
  std::vector<std::string> frame_refs;
  std::optional<std::vector<FrameDigest>> digests;

  bool operator==(const VideoRecord&) const = default;
};

struct Box2d {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;

  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool operator==(const Box2d&) const = default;
};

/// Camera coordinates in meters: +x right, +y down, +z forward.
struct Vec3 {
  double x = 0;
  double y = 0;
  double z = 0;
  bool operator==(const Vec3&) const = default;
};

struct Extent2 {
  double width = 0;
  double height = 0;
  bool operator==(const Extent2&) const = default;
};

enum class ObjectRole { main, context };

struct ObjectEntity {
  std::string object_id;
  std::string label;
  double confidence = 1.0;
  Box2d box2d;
  std::optional<Vec3> position3d;
  std::optional<Extent2> extent3d;
  ObjectRole role = ObjectRole::context;

  bool operator==(const ObjectEntity&) const = default;
};

enum class Predicate { on, above, below, behind, in_front_of, next_to };

struct SpatialRelation {
  std::string subject_id;
  Predicate predicate = Predicate::next_to;
  std::string target_id;
  int frame_index = 0;

  bool operator==(const SpatialRelation&) const = default;
  auto operator<=>(const SpatialRelation&) const = default;
};

/// [subject, relation, object]. `target` is empty for intransitive actions.
struct ActionTriple {
  std::string subject;
  std::string relation;
  std::string target;
  std::optional<int> frame_index;

  bool operator==(const ActionTriple&) const = default;
  auto operator<=>(const ActionTriple&) const = default;
};

struct FrameSceneGraph {
  int frame_index = 0;
  std::vector<ObjectEntity> objects;
  std::vector<SpatialRelation> spatial_relations;
  std::vector<ActionTriple> action_triples;

  bool operator==(const FrameSceneGraph&) const = default;
};

/// Closed interval of sampled-frame positions.
struct Interval {
  int start = 0;
  int end = 0;
  bool operator==(const Interval&) const = default;
  auto operator<=>(const Interval&) const = default;
};

struct TemporalActionMap {
  /// Keys carry no frame_index. Interval lists are sorted, disjoint and
  /// non-adjacent.
  std::map<ActionTriple, std::vector<Interval>> entries;

  bool operator==(const TemporalActionMap&) const = default;
};

struct VideoSceneGraph {
  std::string video_id;
  /// Original frame indices, strictly increasing.
  std::vector<int> sampled_indices;
  /// Aligned with sampled_indices.
  std::vector<FrameSceneGraph> frame_graphs;
  std::set<std::string> main_objects;
  TemporalActionMap temporal_map;

  bool operator==(const VideoSceneGraph&) const = default;
};

enum class QType { CH, CW, DC, DL, DO, TC, TN, TP, OTHER };

/// Either an option index (multiple choice) or accepted free-form answers.
using Gold = std::variant<int, std::vector<std::string>>;

struct Question {
  std::string question_id;
  std::string video_id;
  std::string text;
  std::vector<std::string> options;
  Gold gold = 0;
  std::optional<QType> qtype;

  bool is_multiple_choice() const { return !options.empty(); }
  bool operator==(const Question&) const = default;
};

enum class SgVariant { NoSG, Full, FrameSel, RangeSel, Summary, Action };

/// How the RangeSel window is read. `symmetric`: r - m_w .. r + m_w.
/// `total_width`: m_w frames in total, centred on r (left-biased when even).
enum class RangeWindowMode { symmetric, total_width };

struct SgVariantConfig {
  SgVariant variant = SgVariant::FrameSel;
  int range_window = 3;
  RangeWindowMode window_mode = RangeWindowMode::symmetric;

  bool operator==(const SgVariantConfig&) const = default;
};

enum class SamplerKind { uniform, difference };
enum class BackendKind { mock, http };

/// Multiples of the pair scale s used by the spatial predicate rules.
struct GeometryThresholds {
  double on_vertical = 0.25;
  double vertical = 0.5;
  double depth = 1.0;
  double proximity = 1.5;

  bool operator==(const GeometryThresholds&) const = default;
};

struct BackendConfig {
  BackendKind kind = BackendKind::mock;
  std::string mock_script;
  std::string base_url = "http://127.0.0.1:8000";
  std::string model = "Qwen/Qwen2.5-VL-7B-Instruct";
  std::string api_key_env = "SGVQA_API_KEY";
  double timeout_s = 120.0;
  int max_retries = 3;
  int backoff_base_ms = 500;
  int max_tokens = 512;
  std::string cache_dir;  // empty disables the response cache

  bool operator==(const BackendConfig&) const = default;
};

struct PipelineConfig {
  int sample_count = 16;
  SamplerKind sampler = SamplerKind::uniform;
  double main_freq_threshold = 0.6;  // p1
  double det_conf_threshold = 0.4;   // p2
  int track_window = 4;              // k2
  double temperature = 0.5;
  int beam = 1;
  SgVariantConfig variant;
  GeometryThresholds geometry;
  bool reuse_built_graphs = false;
  bool attach_images = true;
  int workers = 1;
  BackendConfig backend;

  bool operator==(const PipelineConfig&) const = default;
};

using Prediction = std::variant<int, std::string>;

struct AnswerRecord {
  std::string question_id;
  std::optional<Prediction> predicted;
  std::optional<bool> correct;
  SgVariant variant = SgVariant::NoSG;
  std::string prompt_hash;
  std::int64_t latency_ms = 0;
  std::optional<std::string> error;
  bool parse_failure = false;
  std::string raw_response;

  bool operator==(const AnswerRecord&) const = default;
};

// --- enum names -----------------------------------------------------------

std::string_view to_string(ObjectRole r);
std::string_view to_string(Predicate p);
std::string_view to_string(QType t);
std::string_view to_string(SgVariant v);
std::string_view to_string(RangeWindowMode m);
std::string_view to_string(SamplerKind s);
std::string_view to_string(BackendKind b);

// Throw ValidationError on an unknown name.
ObjectRole role_from_string(std::string_view s);
Predicate predicate_from_string(std::string_view s);
QType qtype_from_string(std::string_view s);
SgVariant variant_from_string(std::string_view s);
RangeWindowMode window_mode_from_string(std::string_view s);
SamplerKind sampler_from_string(std::string_view s);
BackendKind backend_from_string(std::string_view s);

/// Predicate as English words ("in front of").
std::string_view predicate_phrase(Predicate p);

inline constexpr QType kAllQTypes[] = {QType::CH, QType::CW, QType::DC, QType::DL, QType::DO,
                                       QType::TC, QType::TN, QType::TP, QType::OTHER};
inline constexpr SgVariant kAllVariants[] = {SgVariant::NoSG,     SgVariant::Full,
                                             SgVariant::FrameSel, SgVariant::RangeSel,
                                             SgVariant::Summary,  SgVariant::Action};

// --- validation -------------------------------------------------------------
// Each validator throws ValidationError describing the first violated invariant.

void validate(const FrameDigest& d);
void validate(const VideoRecord& v);
void validate(const ObjectEntity& o);
void validate(const ActionTriple& t);
void validate(const FrameSceneGraph& g);
void validate(const TemporalActionMap& m, int num_frames);
void validate(const VideoSceneGraph& g);
void validate(const Question& q);
void validate(const SgVariantConfig& c);
void validate(const PipelineConfig& c);

/// Sorts objects by id, relations by (subject, predicate, target) and triples
/// by (subject, relation, target); exact duplicates are dropped. Throws
/// ValidationError("unresolved endpoint <id>") on a dangling relation and on
/// duplicate object ids.
FrameSceneGraph canonicalize(FrameSceneGraph graph);

/// Normalizes the three string fields of a triple; empty target allowed.
ActionTriple make_triple(std::string_view subject, std::string_view relation,
                         std::string_view target, std::optional<int> frame_index = std::nullopt);

}  // namespace sgvqa
