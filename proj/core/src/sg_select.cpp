#include "sgvqa/sg_select.hpp"

#include <algorithm>
#include <exception>

#include "sgvqa/errors.hpp"
#include "sgvqa/parallel.hpp"
#include "sgvqa/prompts.hpp"
#include "sgvqa/text.hpp"

namespace sgvqa {

namespace {

ChatRequest frame_request(Stage stage, std::string prompt, std::span<const std::string> refs,
                          std::size_t position, const RequestOptions& opts) {
  ChatRequest req;
  req.stage = stage;
  req.prompt = std::move(prompt);
  if (opts.attach_images && position < refs.size()) req.image_refs = {refs[position]};
  req.temperature = opts.temperature;
  req.max_tokens = opts.max_tokens;
  req.beam = opts.beam;
  return req;
}

std::string what_of(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

}  // namespace

void validate(const SelectionResult& s, int num_frames) {
  if (s.relevant_indices.size() != s.extracted_graphs.size()) {
    throw ValidationError("selection: |R| != |G|");
  }
  for (std::size_t i = 0; i < s.relevant_indices.size(); ++i) {
    const int r = s.relevant_indices[i];
    if (r < 0 || r >= num_frames) throw ValidationError("selection position outside sampled frames");
    if (i > 0 && r <= s.relevant_indices[i - 1]) {
      throw ValidationError("selection positions not strictly increasing");
    }
  }
}

void to_json(json& j, const SelectionResult& v) {
  j = json{{"relevant_indices", v.relevant_indices}, {"extracted_graphs", v.extracted_graphs}};
}

void from_json(const json& j, SelectionResult& v) {
  j.at("relevant_indices").get_to(v.relevant_indices);
  j.at("extracted_graphs").get_to(v.extracted_graphs);
}

PartialSelectionError::PartialSelectionError(SelectionResult completed, int failed_position,
                                             const std::string& cause)
    : std::runtime_error("frame selection failed at position " + std::to_string(failed_position) +
                         ": " + cause),
      completed_(std::move(completed)),
      failed_position_(failed_position) {}

FrameSceneGraph graph_from_extraction(const FrameSceneGraph& prebuilt, std::string_view response) {
  const auto mentions = extract_object_mentions(response);
  const std::set<std::string> wanted(mentions.begin(), mentions.end());
  std::vector<ObjectEntity> objects;
  for (const auto& o : prebuilt.objects) {
    if (wanted.empty() || wanted.count(o.label)) objects.push_back(o);
  }
  auto parsed = parse_action_triples(response, prebuilt.frame_index);
  return build_frame_graph(prebuilt.frame_index, std::move(objects), prebuilt.spatial_relations,
                           std::move(parsed.triples))
      .graph;
}

SelectionResult select_frames(const VideoSceneGraph& video_sg, const Question& question,
                              std::span<const std::string> sampled_frame_refs, Gateway& gateway,
                              const SelectOptions& opts) {
  const auto k = video_sg.frame_graphs.size();
  if (k == 0) throw InvalidArgumentError("select_frames: video has no sampled frames");
  if (!sampled_frame_refs.empty() && sampled_frame_refs.size() != k) {
    throw InvalidArgumentError("select_frames: frame refs not aligned with sampled frames");
  }
  const int kk = static_cast<int>(k);
  const auto& ro = opts.request;

  std::vector<char> relevant(k, 0);
  std::vector<std::exception_ptr> relevance_error(k);
  parallel_for(k, ro.workers, [&](std::size_t p) {
    try {
      const auto resp = gateway.complete(
          frame_request(Stage::frame_relevance,
                        prompts::frame_relevance(question.text, static_cast<int>(p), kk),
                        sampled_frame_refs, p, ro));
      relevant[p] = is_affirmative(resp.text) ? 1 : 0;
    } catch (...) {
      relevance_error[p] = std::current_exception();
    }
  });

  const auto first_failure = static_cast<std::size_t>(
      std::find_if(relevance_error.begin(), relevance_error.end(), [](const auto& e) { return bool(e); }) -
      relevance_error.begin());

  std::vector<FrameSceneGraph> graphs(k);
  std::vector<std::exception_ptr> extract_error(k);
  parallel_for(first_failure, ro.workers, [&](std::size_t p) {
    if (!relevant[p]) return;
    if (opts.reuse_built_graphs) {
      graphs[p] = video_sg.frame_graphs[p];
      return;
    }
    try {
      const auto resp = gateway.complete(
          frame_request(Stage::extract_graph,
                        prompts::extract_graph(question.text, static_cast<int>(p), kk),
                        sampled_frame_refs, p, ro));
      graphs[p] = graph_from_extraction(video_sg.frame_graphs[p], resp.text);
    } catch (...) {
      extract_error[p] = std::current_exception();
    }
  });

  SelectionResult out;
  for (std::size_t p = 0; p < k; ++p) {
    if (relevance_error[p]) {
      throw PartialSelectionError(std::move(out), static_cast<int>(p), what_of(relevance_error[p]));
    }
    if (extract_error[p]) {
      throw PartialSelectionError(std::move(out), static_cast<int>(p), what_of(extract_error[p]));
    }
    if (!relevant[p]) continue;
    out.relevant_indices.push_back(static_cast<int>(p));
    out.extracted_graphs.push_back(std::move(graphs[p]));
  }
  return out;
}

void to_json(json& j, const VariantPayload& v) {
  j = json{{"variant", to_string(v.variant)},
           {"positions", v.positions},
           {"graphs", v.graphs},
           {"labels", v.labels}};
}

void from_json(const json& j, VariantPayload& v) {
  v.variant = variant_from_string(j.at("variant").get<std::string>());
  j.at("positions").get_to(v.positions);
  j.at("graphs").get_to(v.graphs);
  j.at("labels").get_to(v.labels);
}

std::vector<int> range_window_positions(std::span<const int> relevant, int k,
                                        const SgVariantConfig& cfg) {
  int before = cfg.range_window;
  int after = cfg.range_window;
  if (cfg.window_mode == RangeWindowMode::total_width) {
    const int width = std::max(cfg.range_window, 1);
    before = width / 2;
    after = width - 1 - before;
  }
  std::vector<char> covered(static_cast<std::size_t>(std::max(k, 0)), 0);
  for (int r : relevant) {
    const int lo = std::max(0, r - before);
    const int hi = std::min(k - 1, r + after);
    for (int p = lo; p <= hi; ++p) covered[static_cast<std::size_t>(p)] = 1;
  }
  std::vector<int> out;
  for (int p = 0; p < k; ++p) {
    if (covered[static_cast<std::size_t>(p)]) out.push_back(p);
  }
  return out;
}

VariantPayload build_variant(const VideoSceneGraph& video_sg, const SelectionResult* selection,
                             const SgVariantConfig& cfg) {
  validate(cfg);
  const int k = static_cast<int>(video_sg.frame_graphs.size());
  VariantPayload out;
  out.variant = cfg.variant;

  if (needs_selection(cfg.variant)) {
    if (selection == nullptr) {
      throw InvalidArgumentError(std::string(to_string(cfg.variant)) + " needs a frame selection");
    }
    validate(*selection, k);
  }

  switch (cfg.variant) {
    case SgVariant::NoSG:
      break;
    case SgVariant::Full:
      for (int p = 0; p < k; ++p) out.positions.push_back(p);
      out.graphs = video_sg.frame_graphs;
      break;
    case SgVariant::FrameSel:
      out.positions = selection->relevant_indices;
      out.graphs = selection->extracted_graphs;
      break;
    case SgVariant::RangeSel: {
      out.positions = range_window_positions(selection->relevant_indices, k, cfg);
      const auto& r = selection->relevant_indices;
      for (int p : out.positions) {
        const auto it = std::lower_bound(r.begin(), r.end(), p);
        if (it != r.end() && *it == p) {
          out.graphs.push_back(selection->extracted_graphs[static_cast<std::size_t>(it - r.begin())]);
        } else {
          out.graphs.push_back(video_sg.frame_graphs[static_cast<std::size_t>(p)]);
        }
      }
      break;
    }
    case SgVariant::Summary:
      for (const auto& g : video_sg.frame_graphs) {
        for (const auto& o : g.objects) out.labels.insert(o.label);
      }
      break;
    case SgVariant::Action:
      for (int p = 0; p < k; ++p) {
        const auto& src = video_sg.frame_graphs[static_cast<std::size_t>(p)];
        FrameSceneGraph g;
        g.frame_index = src.frame_index;
        g.action_triples = src.action_triples;
        out.positions.push_back(p);
        out.graphs.push_back(std::move(g));
      }
      break;
  }
  return out;
}

}  // namespace sgvqa
