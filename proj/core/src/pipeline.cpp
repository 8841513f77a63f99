#include "sgvqa/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <map>
#include <unordered_map>

#include "sgvqa/errors.hpp"
#include "sgvqa/frame_sampler.hpp"
#include "sgvqa/qa_engine.hpp"
#include "sgvqa/sg_builder.hpp"

#ifndef SGVQA_VERSION_STRING
#define SGVQA_VERSION_STRING "0.1.0"
#endif

namespace fs = std::filesystem;

namespace sgvqa {

namespace {

void report(const ProgressFn& progress, const std::string& msg) {
  if (progress) progress(msg);
}

std::vector<std::string> refs_at(const VideoRecord& video, std::span<const int> indices) {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(video.frame_refs.at(static_cast<std::size_t>(i)));
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string file_digest(const fs::path& path) {
  if (path.empty() || !fs::exists(path)) return {};
  return sha256_hex(read_text_file(path));
}

SampleFile samples_for(const VideoRecord& video, const PipelineConfig& cfg, const Workspace& ws) {
  const auto path = ws.sample_path(video.video_id);
  if (fs::exists(path)) {
    auto stored = decode<SampleFile>(read_json_file(path));
    if (stored.sampler == cfg.sampler && stored.sample_count == cfg.sample_count) return stored;
  }
  auto fresh = sample_video(video, cfg);
  write_file_atomic(path, to_pretty(json(fresh)));
  return fresh;
}

AnswerRecord error_record(const Question& q, SgVariant variant, std::string message) {
  AnswerRecord rec;
  rec.question_id = q.question_id;
  rec.variant = variant;
  rec.error = std::move(message);
  return rec;
}

// Lazily loaded per-video state shared by select and answer.
class VideoIndex {
 public:
  VideoIndex(const std::vector<VideoRecord>& videos, const Workspace& ws) : ws_(ws) {
    for (const auto& v : videos) videos_.emplace(v.video_id, &v);
  }

  const VideoRecord& video(const std::string& id) const {
    auto it = videos_.find(id);
    if (it == videos_.end()) throw ValidationError("unknown video_id " + id);
    return *it->second;
  }

  const VideoSceneGraph& graph(const std::string& id) {
    auto it = graphs_.find(id);
    if (it == graphs_.end()) {
      const auto path = ws_.graph_path(id);
      if (!fs::exists(path)) throw ValidationError("no scene graph for video " + id);
      it = graphs_.emplace(id, decode<VideoSceneGraph>(read_json_file(path))).first;
    }
    return it->second;
  }

  bool has_graph(const std::string& id) const {
    return graphs_.count(id) > 0 || fs::exists(ws_.graph_path(id));
  }

 private:
  const Workspace& ws_;
  std::unordered_map<std::string, const VideoRecord*> videos_;
  std::map<std::string, VideoSceneGraph> graphs_;
};

SelectionResult selection_for(const Question& q, const VideoSceneGraph& graph,
                              const VideoRecord& video, const PipelineConfig& cfg, Gateway& gateway,
                              const Workspace& ws) {
  const auto path = ws.selection_path(q.video_id, q.question_id);
  const int k = static_cast<int>(graph.frame_graphs.size());
  if (fs::exists(path)) {
    auto stored = decode<StoredSelection>(read_json_file(path));
    if (stored.reuse_built_graphs == cfg.reuse_built_graphs) {
      validate(stored.selection, k);
      return stored.selection;
    }
  }
  SelectOptions opts{RequestOptions::from(cfg), cfg.reuse_built_graphs};
  const auto refs = refs_at(video, graph.sampled_indices);
  StoredSelection stored{q.question_id, q.video_id, cfg.reuse_built_graphs,
                         select_frames(graph, q, refs, gateway, opts)};
  write_file_atomic(path, to_pretty(json(stored)));
  return stored.selection;
}

}  // namespace

std::string_view version_string() { return SGVQA_VERSION_STRING; }

fs::path Workspace::sample_path(const std::string& video_id) const {
  return root_ / "samples" / (video_id + ".json");
}

fs::path Workspace::graph_path(const std::string& video_id) const {
  return root_ / "graphs" / (video_id + ".json");
}

fs::path Workspace::diagnostics_path(const std::string& video_id) const {
  return root_ / "graphs" / (video_id + ".diagnostics.json");
}

fs::path Workspace::selection_path(const std::string& video_id, const std::string& question_id) const {
  return root_ / "selections" / video_id / (question_id + ".json");
}

std::vector<VideoRecord> load_video_manifest(const fs::path& path,
                                             const std::optional<fs::path>& digests_dir) {
  std::vector<VideoRecord> out;
  for (const auto& [line_no, row] : jsonl_rows(read_text_file(path))) {
    try {
      auto v = json::parse(row).get<VideoRecord>();
      if (!v.digests && digests_dir) {
        const auto sidecar = *digests_dir / (v.video_id + ".digests.jsonl");
        if (fs::exists(sidecar)) v.digests = read_jsonl<FrameDigest>(sidecar);
      }
      validate(v);
      out.push_back(std::move(v));
    } catch (const DatasetError& e) {
      throw ValidationError(std::string("video manifest line ") + std::to_string(line_no) +
                            ": digests: " + e.what());
    } catch (const std::exception& e) {
      throw DatasetError(line_no, e.what());
    }
  }
  return out;
}

void to_json(json& j, const SampleFile& v) {
  j = json{{"video_id", v.video_id},
           {"sampler", to_string(v.sampler)},
           {"sample_count", v.sample_count},
           {"sampled_indices", v.sampled_indices}};
}

void from_json(const json& j, SampleFile& v) {
  j.at("video_id").get_to(v.video_id);
  v.sampler = sampler_from_string(j.at("sampler").get<std::string>());
  j.at("sample_count").get_to(v.sample_count);
  j.at("sampled_indices").get_to(v.sampled_indices);
}

SampleFile sample_video(const VideoRecord& video, const PipelineConfig& cfg) {
  SampleFile out{video.video_id, cfg.sampler, cfg.sample_count, {}};
  if (cfg.sampler == SamplerKind::uniform) {
    out.sampled_indices = sample_uniform(video.total_frames, cfg.sample_count);
  } else {
    if (!video.digests) {
      throw ValidationError("video " + video.video_id + ": difference sampling needs frame digests");
    }
    out.sampled_indices = sample_by_difference(*video.digests, cfg.sample_count);
  }
  return out;
}

std::vector<SampleFile> cmd_sample(const std::vector<VideoRecord>& videos, const PipelineConfig& cfg,
                                   const Workspace& ws, const ProgressFn& progress) {
  validate(cfg);
  std::vector<SampleFile> out;
  for (const auto& v : videos) {
    auto s = sample_video(v, cfg);
    write_file_atomic(ws.sample_path(v.video_id), to_pretty(json(s)));
    report(progress, "sampled " + v.video_id + ": " + std::to_string(s.sampled_indices.size()) +
                         " frames");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<VideoSceneGraph> cmd_build_sg(const std::vector<VideoRecord>& videos,
                                          const fs::path& perception_dir, const PipelineConfig& cfg,
                                          Gateway& gateway, const Workspace& ws,
                                          const ProgressFn& progress) {
  validate(cfg);
  std::vector<VideoSceneGraph> out;
  for (const auto& v : videos) {
    const auto samples = samples_for(v, cfg, ws);
    const auto perception_path = perception_dir / (v.video_id + ".json");
    if (!fs::exists(perception_path)) {
      throw ValidationError("no perception file for video " + v.video_id + " at " +
                            perception_path.string());
    }
    const auto perception = decode<PerceptionFile>(read_json_file(perception_path));
    if (perception.video_id != v.video_id) {
      throw ValidationError("perception file " + perception_path.string() + " is for video " +
                            perception.video_id);
    }
    auto built = build_video_scene_graph(v, samples.sampled_indices, perception, gateway, cfg);
    write_file_atomic(ws.graph_path(v.video_id), to_pretty(json(built.graph)));
    write_file_atomic(ws.diagnostics_path(v.video_id), to_pretty(json(built.diagnostics)));
    report(progress, "built scene graph for " + v.video_id);
    out.push_back(std::move(built.graph));
  }
  return out;
}

void to_json(json& j, const StoredSelection& v) {
  j = json{{"question_id", v.question_id},
           {"video_id", v.video_id},
           {"reuse_built_graphs", v.reuse_built_graphs},
           {"selection", v.selection}};
}

void from_json(const json& j, StoredSelection& v) {
  j.at("question_id").get_to(v.question_id);
  j.at("video_id").get_to(v.video_id);
  j.at("reuse_built_graphs").get_to(v.reuse_built_graphs);
  j.at("selection").get_to(v.selection);
}

int cmd_select(const std::vector<Question>& questions, const std::vector<VideoRecord>& videos,
               const PipelineConfig& cfg, Gateway& gateway, const Workspace& ws,
               const ProgressFn& progress) {
  validate(cfg);
  VideoIndex index(videos, ws);
  int failures = 0;
  for (const auto& q : questions) {
    try {
      const auto& sel = selection_for(q, index.graph(q.video_id), index.video(q.video_id), cfg,
                                      gateway, ws);
      report(progress, "selected " + std::to_string(sel.relevant_indices.size()) + " frames for " +
                           q.question_id);
    } catch (const std::exception& e) {
      ++failures;
      report(progress, "selection failed for " + q.question_id + ": " + e.what());
    }
  }
  return failures;
}

json run_manifest(const PipelineConfig& cfg, const RunInputs& inputs, std::string_view backend_id) {
  json in = {{"questions", {{"path", inputs.questions.string()},
                            {"sha256", file_digest(inputs.questions)}}},
             {"videos", {{"path", inputs.videos.string()}, {"sha256", file_digest(inputs.videos)}}}};
  if (cfg.backend.kind == BackendKind::mock && !cfg.backend.mock_script.empty()) {
    in["mock_script"] = {{"path", cfg.backend.mock_script},
                         {"sha256", file_digest(cfg.backend.mock_script)}};
  }
  return json{{"version", version_string()},
              {"created_at", utc_timestamp()},
              {"backend_id", backend_id},
              {"config", cfg},
              {"inputs", std::move(in)}};
}

std::vector<AnswerRecord> cmd_answer(const std::vector<Question>& questions,
                                     const std::vector<VideoRecord>& videos,
                                     const PipelineConfig& cfg, Gateway& gateway,
                                     const Workspace& ws, const RunInputs& inputs,
                                     const ProgressFn& progress) {
  validate(cfg);
  VideoIndex index(videos, ws);
  const auto variant = cfg.variant.variant;
  const auto opts = RequestOptions::from(cfg);
  std::vector<AnswerRecord> records;
  records.reserve(questions.size());

  for (const auto& q : questions) {
    AnswerRecord rec;
    try {
      const auto& video = index.video(q.video_id);
      if (variant == SgVariant::NoSG) {
        // Only the frames are needed; take them from the graph when one exists.
        const auto indices = index.has_graph(q.video_id)
                                 ? index.graph(q.video_id).sampled_indices
                                 : samples_for(video, cfg, ws).sampled_indices;
        rec = answer(q, build_variant(VideoSceneGraph{}, nullptr, cfg.variant),
                     refs_at(video, indices), gateway, opts);
      } else {
        const auto& graph = index.graph(q.video_id);
        std::optional<SelectionResult> selection;
        if (needs_selection(variant)) {
          selection = selection_for(q, graph, video, cfg, gateway, ws);
        }
        const auto payload =
            build_variant(graph, selection ? &*selection : nullptr, cfg.variant);
        rec = answer(q, payload, refs_at(video, graph.sampled_indices), gateway, opts);
      }
    } catch (const std::exception& e) {
      rec = error_record(q, variant, e.what());
    }
    report(progress, "answered " + q.question_id + (rec.error ? " (error: " + *rec.error + ")" : ""));
    records.push_back(std::move(rec));
  }

  write_file_atomic(ws.answers_path(), to_jsonl(records));
  write_file_atomic(ws.manifest_path(), to_pretty(run_manifest(cfg, inputs, gateway.backend_id())));
  return records;
}

EvalReport cmd_eval(const std::vector<Question>& questions, std::vector<AnswerRecord> answers,
                    Matcher matcher, Gateway* gateway, const PipelineConfig& cfg,
                    const Workspace& ws) {
  auto result = score_records(answers, questions, matcher, gateway, RequestOptions::from(cfg));
  write_file_atomic(ws.report_path(), to_pretty(json(result)));
  return result;
}

}  // namespace sgvqa
