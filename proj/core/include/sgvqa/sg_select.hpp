#pragma once

// Question-aware frame selection and the six scene-graph integration variants.

#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgvqa/gateway.hpp"
#include "sgvqa/model.hpp"
#include "sgvqa/sg_builder.hpp"

namespace sgvqa {

struct SelectionResult {
  /// Sampled-frame positions judged relevant, strictly increasing.
  std::vector<int> relevant_indices;
  /// Graph extracted for each relevant position.
  std::vector<FrameSceneGraph> extracted_graphs;

  bool operator==(const SelectionResult&) const = default;
};

void validate(const SelectionResult& s, int num_frames);
void to_json(json& j, const SelectionResult& v);
void from_json(const json& j, SelectionResult& v);

/// Thrown when a gateway call fails part-way through selection. `completed`
/// holds the result for every frame before the first failing one.
class PartialSelectionError : public std::runtime_error {
 public:
  PartialSelectionError(SelectionResult completed, int failed_position, const std::string& cause);

  const SelectionResult& completed() const noexcept { return completed_; }
  int failed_position() const noexcept { return failed_position_; }

 private:
  SelectionResult completed_;
  int failed_position_;
};

struct SelectOptions {
  RequestOptions request;
  /// Use the prebuilt frame graph instead of an extract_graph request.
  bool reuse_built_graphs = false;
};

/// Parses an extract_graph response against the prebuilt graph of the same
/// frame: mentioned labels keep their grounded objects (all objects when the
/// response lists none), spatial relations survive between kept objects, and
/// the response's triples become the frame's actions.
FrameSceneGraph graph_from_extraction(const FrameSceneGraph& prebuilt, std::string_view response);

/// For each sampled frame in order: a frame_relevance request; on a "yes"
/// answer the position is appended to R and its graph (extract_graph request,
/// or the prebuilt graph when reuse_built_graphs) to G. Relevance requests
/// may run concurrently; the result matches the sequential loop. Answer
/// options are never shown to the selector.
SelectionResult select_frames(const VideoSceneGraph& video_sg, const Question& question,
                              std::span<const std::string> sampled_frame_refs, Gateway& gateway,
                              const SelectOptions& opts);

struct VariantPayload {
  SgVariant variant = SgVariant::NoSG;
  /// Sampled-frame positions of `graphs`, strictly increasing.
  std::vector<int> positions;
  std::vector<FrameSceneGraph> graphs;
  /// Summary only: union of object labels over all sampled frames.
  std::set<std::string> labels;

  bool operator==(const VariantPayload&) const = default;
};

void to_json(json& j, const VariantPayload& v);
void from_json(const json& j, VariantPayload& v);

/// Positions covered by the RangeSel windows around each relevant position,
/// clipped to [0, k-1], deduplicated and sorted.
std::vector<int> range_window_positions(std::span<const int> relevant, int k,
                                        const SgVariantConfig& cfg);

/// NoSG: empty. Full: every frame graph. FrameSel: the selection's graphs at
/// R. RangeSel: graphs over the windows around R, with the selection's graph
/// at positions in R and the prebuilt graph elsewhere. Summary: label union
/// only. Action: every frame stripped to its action triples. Throws
/// InvalidArgumentError when FrameSel/RangeSel have no selection.
VariantPayload build_variant(const VideoSceneGraph& video_sg, const SelectionResult* selection,
                             const SgVariantConfig& cfg);

inline bool needs_selection(SgVariant v) {
  return v == SgVariant::FrameSel || v == SgVariant::RangeSel;
}

}  // namespace sgvqa
