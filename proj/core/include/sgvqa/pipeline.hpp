#pragma once
// Stage orchestration over a work directory. Each command reads the previous
// stage's files and writes its own atomically, so stages can run as separate
// processes and a failed run can be resumed:
//
//   <work>/samples/<video>.json                 sampled frame indices
//   <work>/graphs/<video>.json                  VideoSceneGraph
//   <work>/graphs/<video>.diagnostics.json
//   <work>/selections/<video>/<question>.json   frame selection
//   <work>/answers.jsonl                        one AnswerRecord per question
//   <work>/answers.manifest.json                run manifest
//   <work>/report.json                          EvalReport

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgvqa/eval.hpp"
#include "sgvqa/gateway.hpp"
#include "sgvqa/geometry.hpp"
#include "sgvqa/model.hpp"
#include "sgvqa/sg_select.hpp"

namespace sgvqa {

std::string_view version_string();

class Workspace {
 public:
  explicit Workspace(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path sample_path(const std::string& video_id) const;
  std::filesystem::path graph_path(const std::string& video_id) const;
  std::filesystem::path diagnostics_path(const std::string& video_id) const;
  std::filesystem::path selection_path(const std::string& video_id,
                                       const std::string& question_id) const;
  std::filesystem::path answers_path() const { return root_ / "answers.jsonl"; }
  std::filesystem::path manifest_path() const { return root_ / "answers.manifest.json"; }
  std::filesystem::path report_path() const { return root_ / "report.json"; }

 private:
  std::filesystem::path root_;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Videos from a JSONL manifest. A record without inline digests picks them
/// up from `<digests_dir>/<video_id>.digests.jsonl` when that file exists.
std::vector<VideoRecord> load_video_manifest(const std::filesystem::path& path,
                                             const std::optional<std::filesystem::path>& digests_dir = {});

struct SampleFile {
  std::string video_id;
  SamplerKind sampler = SamplerKind::uniform;
  int sample_count = 0;
  std::vector<int> sampled_indices;
  bool operator==(const SampleFile&) const = default;
};

void to_json(json& j, const SampleFile& v);
void from_json(const json& j, SampleFile& v);

/// Indices for one video under cfg. Throws ValidationError when the
/// difference sampler has no digests to work with.
SampleFile sample_video(const VideoRecord& video, const PipelineConfig& cfg);

/// Writes samples/<video>.json for every video.
std::vector<SampleFile> cmd_sample(const std::vector<VideoRecord>& videos, const PipelineConfig& cfg,
                                   const Workspace& ws, const ProgressFn& progress = {});

/// Builds and persists one graph per video from `<perception_dir>/<video>.json`.
/// Existing sample files produced with the same sampler settings are reused.
/// Each finished video is written before the next starts; with a response
/// cache, a rerun after a gateway failure replays the completed work.
std::vector<VideoSceneGraph> cmd_build_sg(const std::vector<VideoRecord>& videos,
                                          const std::filesystem::path& perception_dir,
                                          const PipelineConfig& cfg, Gateway& gateway,
                                          const Workspace& ws, const ProgressFn& progress = {});

struct StoredSelection {
  std::string question_id;
  std::string video_id;
  bool reuse_built_graphs = false;
  SelectionResult selection;
};

void to_json(json& j, const StoredSelection& v);
void from_json(const json& j, StoredSelection& v);

/// Runs frame selection for every question against the persisted graphs.
/// A question whose selection fails is reported through `progress` and
/// skipped; the return value counts those failures.
int cmd_select(const std::vector<Question>& questions, const std::vector<VideoRecord>& videos,
               const PipelineConfig& cfg, Gateway& gateway, const Workspace& ws,
               const ProgressFn& progress = {});

struct RunInputs {
  std::filesystem::path questions;
  std::filesystem::path videos;
};

/// One AnswerRecord per question, in question order, written to answers.jsonl
/// together with a run manifest. Per-question failures (missing graph,
/// selection or gateway errors) become error records and the run continues.
/// Variants without selection issue no selection requests.
std::vector<AnswerRecord> cmd_answer(const std::vector<Question>& questions,
                                     const std::vector<VideoRecord>& videos,
                                     const PipelineConfig& cfg, Gateway& gateway,
                                     const Workspace& ws, const RunInputs& inputs,
                                     const ProgressFn& progress = {});

/// Scores answers against questions and writes report.json. Throws
/// ValidationError for answers that reference unknown questions.
EvalReport cmd_eval(const std::vector<Question>& questions, std::vector<AnswerRecord> answers,
                    Matcher matcher, Gateway* gateway, const PipelineConfig& cfg,
                    const Workspace& ws);

/// The manifest written next to answers.jsonl.
json run_manifest(const PipelineConfig& cfg, const RunInputs& inputs, std::string_view backend_id);

}  // namespace sgvqa
