#pragma once

// Builds a VideoSceneGraph from perception output and VLM responses: object
// mentions -> main/context partition, geometric spatial relations, per-frame
// action triples, and sliding-window temporal action tracking.

#include <functional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgvqa/gateway.hpp"
#include "sgvqa/geometry.hpp"
#include "sgvqa/model.hpp"

namespace sgvqa {

/// Decoding parameters shared by every request a stage issues.
struct RequestOptions {
  double temperature = 0.5;
  int max_tokens = 512;
  int beam = 1;
  bool attach_images = true;
  int workers = 1;

  static RequestOptions from(const PipelineConfig& cfg);
};

/// Labels from "- <label>" bullet lines (also "* " and "• "), normalized and
/// deduplicated in first-occurrence order. Other lines are ignored.
std::vector<std::string> extract_object_mentions(std::string_view description);

struct MainContextPartition {
  std::set<std::string> main;
  std::vector<std::set<std::string>> context;  // per frame: labels minus main
};

/// A label is main iff (frames containing it) / (frame count) >= p1.
MainContextPartition partition_main_context(std::span<const std::set<std::string>> per_frame_labels,
                                            double p1);

/// Keeps detections with confidence >= p2, order preserved.
std::vector<Detection> filter_detections(std::span<const Detection> detections, double p2);

struct TripleParse {
  std::vector<ActionTriple> triples;
  int malformed_lines = 0;
};

/// Lenient, total parser for "[subject, relation, object]" lines. A leading
/// bullet or list number and a trailing ",", ";" or "." are tolerated; the
/// object may be empty or omitted. Non-blank lines that do not fit are
/// counted in `malformed_lines`. Triples are normalized and deduplicated.
TripleParse parse_action_triples(std::string_view text, std::optional<int> frame_index);

struct FrameBuild {
  FrameSceneGraph graph;
  /// One entry per relation dropped because an endpoint is not among the objects.
  std::vector<std::string> dropped_relations;
};

/// Assembles a canonical frame graph. Relations whose endpoints were filtered
/// out are dropped and reported; triples are stamped with frame_index.
/// Throws ValidationError on duplicate object ids.
FrameBuild build_frame_graph(int frame_index, std::vector<ObjectEntity> objects,
                             std::vector<SpatialRelation> relations,
                             std::vector<ActionTriple> triples);

/// verifier(window, candidate) -> present in that window?
using WindowVerifier = std::function<bool(const Interval&, const ActionTriple&)>;

/// Windows [t, t + k2 - 1] for t = 0..k-k2 are checked per candidate; frames
/// covered by any positive window are merged into maximal intervals. Every
/// candidate gets an entry, possibly with no intervals. Verifier calls may run
/// concurrently on `workers` threads. Throws InvalidArgumentError unless
/// k >= k2 >= 1.
TemporalActionMap track_actions(std::span<const ActionTriple> candidates,
                                const WindowVerifier& verifier, int k, int k2, int workers = 1);

struct CandidateActions {
  std::vector<ActionTriple> triples;
  std::string caption;
  int malformed_lines = 0;
};

/// global_caption request over the sampled frames, then extract_actions over
/// the caption. Returned triples carry no frame_index. Gateway errors propagate.
CandidateActions propose_candidate_actions(std::span<const std::string> sampled_frame_refs,
                                           Gateway& gateway, const RequestOptions& opts);

/// Verifier that asks the gateway one verify_action question per window.
WindowVerifier gateway_verifier(Gateway& gateway, std::span<const std::string> sampled_frame_refs,
                                const RequestOptions& opts);

struct BuildDiagnostics {
  std::string video_id;
  int malformed_action_lines = 0;
  int filtered_detections = 0;
  int effective_track_window = 0;
  std::vector<std::string> dropped_relations;
  std::vector<int> frames_without_perception;
  std::vector<std::vector<std::string>> frame_mentions;
  std::string caption;
};

void to_json(json& j, const BuildDiagnostics& d);

struct VideoBuild {
  VideoSceneGraph graph;
  BuildDiagnostics diagnostics;
};

/// End-to-end graph construction for one video over the given sampled frame
/// indices. The track window is clamped to the number of sampled frames.
VideoBuild build_video_scene_graph(const VideoRecord& video, std::span<const int> sampled_indices,
                                   const PerceptionFile& perception, Gateway& gateway,
                                   const PipelineConfig& cfg);

}  // namespace sgvqa
