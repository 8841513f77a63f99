#include "sgvqa/sg_builder.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_set>

#include "sgvqa/errors.hpp"
#include "sgvqa/parallel.hpp"
#include "sgvqa/prompts.hpp"
#include "sgvqa/text.hpp"

namespace sgvqa {

namespace {

bool has_alnum(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); });
}

/// Strips "- ", "* ", "• ", "1. ", "1) " list prefixes. Returns true if one was found.
bool strip_list_marker(std::string& line) {
  static constexpr std::string_view kBullet = "\xE2\x80\xA2";
  if (!line.empty() && (line[0] == '-' || line[0] == '*')) {
    line = trim(std::string_view(line).substr(1));
    return true;
  }
  if (line.rfind(kBullet, 0) == 0) {
    line = trim(std::string_view(line).substr(kBullet.size()));
    return true;
  }
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
    line = trim(std::string_view(line).substr(i + 1));
    return true;
  }
  return false;
}

std::string strip_quotes(std::string_view s) {
  std::string out = trim(s);
  while (!out.empty() && (out.front() == '"' || out.front() == '\'' || out.front() == '`')) {
    out.erase(out.begin());
  }
  while (!out.empty() && (out.back() == '"' || out.back() == '\'' || out.back() == '`')) {
    out.pop_back();
  }
  return out;
}

std::optional<ActionTriple> parse_triple_line(std::string line, std::optional<int> frame_index) {
  strip_list_marker(line);
  while (!line.empty() && (line.back() == ',' || line.back() == ';' || line.back() == '.')) {
    line.pop_back();
  }
  line = trim(line);
  if (line.size() < 2 || line.front() != '[' || line.back() != ']') return std::nullopt;

  const std::string_view inner = std::string_view(line).substr(1, line.size() - 2);
  if (inner.find('[') != std::string_view::npos || inner.find(']') != std::string_view::npos) {
    return std::nullopt;
  }
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = inner.find(',', start);
    fields.push_back(strip_quotes(inner.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (fields.size() == 2) fields.emplace_back();
  if (fields.size() != 3) return std::nullopt;

  auto triple = make_triple(fields[0], fields[1], fields[2], frame_index);
  if (triple.subject.empty() || triple.relation.empty()) return std::nullopt;
  return triple;
}

ChatRequest make_request(Stage stage, std::string prompt, std::vector<std::string> images,
                         const RequestOptions& opts) {
  ChatRequest req;
  req.stage = stage;
  req.prompt = std::move(prompt);
  if (opts.attach_images) req.image_refs = std::move(images);
  req.temperature = opts.temperature;
  req.max_tokens = opts.max_tokens;
  req.beam = opts.beam;
  return req;
}

}  // namespace

RequestOptions RequestOptions::from(const PipelineConfig& cfg) {
  return RequestOptions{cfg.temperature, cfg.backend.max_tokens, cfg.beam, cfg.attach_images,
                        cfg.workers};
}

std::vector<std::string> extract_object_mentions(std::string_view description) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto line : split_lines(description)) {
    line = trim(line);
    if (!strip_list_marker(line)) continue;
    if (!line.empty() && line[0] == '[') continue;  // a triple, not a mention
    auto label = normalize_label(strip_quotes(line));
    if (label.empty() || !has_alnum(label)) continue;
    if (seen.insert(label).second) out.push_back(std::move(label));
  }
  return out;
}

MainContextPartition partition_main_context(std::span<const std::set<std::string>> per_frame_labels,
                                            double p1) {
  MainContextPartition out;
  if (per_frame_labels.empty()) return out;

  std::map<std::string, int> frequency;
  for (const auto& frame : per_frame_labels) {
    for (const auto& label : frame) ++frequency[label];
  }
  const auto frames = static_cast<double>(per_frame_labels.size());
  for (const auto& [label, count] : frequency) {
    if (static_cast<double>(count) / frames >= p1) out.main.insert(label);
  }
  out.context.reserve(per_frame_labels.size());
  for (const auto& frame : per_frame_labels) {
    std::set<std::string> ctx;
    std::set_difference(frame.begin(), frame.end(), out.main.begin(), out.main.end(),
                        std::inserter(ctx, ctx.end()));
    out.context.push_back(std::move(ctx));
  }
  return out;
}

std::vector<Detection> filter_detections(std::span<const Detection> detections, double p2) {
  std::vector<Detection> out;
  std::copy_if(detections.begin(), detections.end(), std::back_inserter(out),
               [p2](const Detection& d) { return d.confidence >= p2; });
  return out;
}

TripleParse parse_action_triples(std::string_view text, std::optional<int> frame_index) {
  TripleParse out;
  std::set<ActionTriple> seen;
  for (const auto& raw : split_lines(text)) {
    const auto line = trim(raw);
    if (line.empty()) continue;
    auto triple = parse_triple_line(line, frame_index);
    if (!triple) {
      ++out.malformed_lines;
      continue;
    }
    if (seen.insert(*triple).second) out.triples.push_back(std::move(*triple));
  }
  return out;
}

FrameBuild build_frame_graph(int frame_index, std::vector<ObjectEntity> objects,
                             std::vector<SpatialRelation> relations,
                             std::vector<ActionTriple> triples) {
  FrameBuild out;
  std::unordered_set<std::string> ids;
  for (const auto& o : objects) {
    if (!ids.insert(o.object_id).second) {
      throw ValidationError("duplicate object_id " + o.object_id + " in frame " +
                            std::to_string(frame_index));
    }
  }

  out.graph.frame_index = frame_index;
  out.graph.objects = std::move(objects);
  for (auto& r : relations) {
    const bool subject_ok = ids.count(r.subject_id) != 0;
    const bool target_ok = ids.count(r.target_id) != 0;
    if (!subject_ok || !target_ok) {
      out.dropped_relations.push_back("frame " + std::to_string(frame_index) + ": (" +
                                      r.subject_id + ", " + std::string(to_string(r.predicate)) +
                                      ", " + r.target_id + ") missing " +
                                      (subject_ok ? r.target_id : r.subject_id));
      continue;
    }
    r.frame_index = frame_index;
    out.graph.spatial_relations.push_back(std::move(r));
  }
  for (auto& t : triples) {
    t.frame_index = frame_index;
    out.graph.action_triples.push_back(std::move(t));
  }
  out.graph = canonicalize(std::move(out.graph));
  return out;
}

TemporalActionMap track_actions(std::span<const ActionTriple> candidates,
                                const WindowVerifier& verifier, int k, int k2, int workers) {
  if (k2 < 1) throw InvalidArgumentError("track_actions: window k2 must be >= 1");
  if (k < k2) {
    throw InvalidArgumentError("track_actions: k (" + std::to_string(k) + ") < k2 (" +
                               std::to_string(k2) + ")");
  }

  // Unique candidates, keyed without frame index.
  std::vector<ActionTriple> unique;
  {
    std::set<ActionTriple> seen;
    for (auto c : candidates) {
      c.frame_index.reset();
      if (seen.insert(c).second) unique.push_back(std::move(c));
    }
  }

  const int windows = k - k2 + 1;
  const std::size_t jobs = unique.size() * static_cast<std::size_t>(windows);
  std::vector<char> positive(jobs, 0);
  parallel_for(jobs, workers, [&](std::size_t job) {
    const auto& cand = unique[job / static_cast<std::size_t>(windows)];
    const int t = static_cast<int>(job % static_cast<std::size_t>(windows));
    positive[job] = verifier(Interval{t, t + k2 - 1}, cand) ? 1 : 0;
  });

  TemporalActionMap out;
  for (std::size_t c = 0; c < unique.size(); ++c) {
    // Difference array: +1 at window start, -1 one past its end.
    std::vector<int> delta(static_cast<std::size_t>(k) + 1, 0);
    for (int t = 0; t < windows; ++t) {
      if (!positive[c * static_cast<std::size_t>(windows) + static_cast<std::size_t>(t)]) continue;
      ++delta[static_cast<std::size_t>(t)];
      --delta[static_cast<std::size_t>(t + k2)];
    }
    std::vector<Interval> intervals;
    int depth = 0;
    for (int f = 0; f < k; ++f) {
      const bool was_covered = depth > 0;
      depth += delta[static_cast<std::size_t>(f)];
      const bool covered = depth > 0;
      if (covered && !was_covered) intervals.push_back(Interval{f, f});
      if (covered) intervals.back().end = f;
    }
    out.entries.emplace(unique[c], std::move(intervals));
  }
  return out;
}

CandidateActions propose_candidate_actions(std::span<const std::string> sampled_frame_refs,
                                           Gateway& gateway, const RequestOptions& opts) {
  CandidateActions out;
  const int k = static_cast<int>(sampled_frame_refs.size());
  out.caption = gateway
                    .complete(make_request(Stage::global_caption, prompts::global_caption(k),
                                           {sampled_frame_refs.begin(), sampled_frame_refs.end()},
                                           opts))
                    .text;
  const auto extracted = gateway.complete(
      make_request(Stage::extract_actions, prompts::caption_actions(out.caption), {}, opts));
  auto parsed = parse_action_triples(extracted.text, std::nullopt);
  out.triples = std::move(parsed.triples);
  out.malformed_lines = parsed.malformed_lines;
  return out;
}

WindowVerifier gateway_verifier(Gateway& gateway, std::span<const std::string> sampled_frame_refs,
                                const RequestOptions& opts) {
  const int k = static_cast<int>(sampled_frame_refs.size());
  return [&gateway, sampled_frame_refs, opts, k](const Interval& w, const ActionTriple& t) {
    std::vector<std::string> images(sampled_frame_refs.begin() + w.start,
                                    sampled_frame_refs.begin() + w.end + 1);
    const auto resp = gateway.complete(
        make_request(Stage::verify_action, prompts::verify_action(t, w, k), std::move(images), opts));
    return is_affirmative(resp.text);
  };
}

void to_json(json& j, const BuildDiagnostics& d) {
  j = json{{"video_id", d.video_id},
           {"malformed_action_lines", d.malformed_action_lines},
           {"filtered_detections", d.filtered_detections},
           {"effective_track_window", d.effective_track_window},
           {"dropped_relations", d.dropped_relations},
           {"frames_without_perception", d.frames_without_perception},
           {"frame_mentions", d.frame_mentions},
           {"caption", d.caption}};
}

VideoBuild build_video_scene_graph(const VideoRecord& video, std::span<const int> sampled_indices,
                                   const PerceptionFile& perception, Gateway& gateway,
                                   const PipelineConfig& cfg) {
  validate(video);
  validate(perception);
  const auto opts = RequestOptions::from(cfg);
  const int k = static_cast<int>(sampled_indices.size());
  if (k == 0) throw InvalidArgumentError("build_video_scene_graph: no sampled frames");

  std::vector<std::string> refs;
  refs.reserve(sampled_indices.size());
  for (int idx : sampled_indices) {
    if (idx < 0 || idx >= video.total_frames) {
      throw InvalidArgumentError("sampled index " + std::to_string(idx) + " outside video " +
                                 video.video_id);
    }
    refs.push_back(video.frame_refs[static_cast<std::size_t>(idx)]);
  }

  VideoBuild out;
  auto& diag = out.diagnostics;
  diag.video_id = video.video_id;

  // Object identification: description, then bullet list of mentions.
  std::vector<std::vector<std::string>> mentions(refs.size());
  parallel_for(refs.size(), cfg.workers, [&](std::size_t p) {
    const int pos = static_cast<int>(p);
    const auto description = gateway.complete(
        make_request(Stage::describe_frame, prompts::describe_frame(pos, k), {refs[p]}, opts));
    const auto listed = gateway.complete(make_request(
        Stage::detect_objects, prompts::detect_objects(pos, k, description.text), {}, opts));
    mentions[p] = extract_object_mentions(listed.text);
  });
  std::vector<std::set<std::string>> label_sets;
  for (const auto& m : mentions) label_sets.emplace_back(m.begin(), m.end());
  const auto partition = partition_main_context(label_sets, cfg.main_freq_threshold);
  diag.frame_mentions = mentions;

  // Grounded objects, spatial relations and per-frame actions.
  std::vector<FrameBuild> frames(refs.size());
  std::vector<int> malformed(refs.size(), 0);
  std::vector<int> filtered(refs.size(), 0);
  parallel_for(refs.size(), cfg.workers, [&](std::size_t p) {
    const int pos = static_cast<int>(p);
    const int frame_index = sampled_indices[p];
    std::vector<ObjectEntity> objects;
    if (const auto* pf = perception.frame(frame_index)) {
      const auto kept = filter_detections(pf->detections, cfg.det_conf_threshold);
      filtered[p] = static_cast<int>(pf->detections.size() - kept.size());
      for (const auto& d : kept) {
        const auto placed = backproject(d.box2d, d.depth_z, perception.camera);
        ObjectEntity o;
        o.object_id = d.object_id;
        o.label = normalize_label(d.label);
        o.confidence = d.confidence;
        o.box2d = d.box2d;
        o.position3d = placed.position;
        o.extent3d = placed.extent;
        o.role = partition.main.count(o.label) ? ObjectRole::main : ObjectRole::context;
        objects.push_back(std::move(o));
      }
    }
    auto relations = assign_spatial_predicates(objects, frame_index, cfg.geometry);
    const auto actions = gateway.complete(make_request(
        Stage::extract_actions, prompts::frame_actions(pos, k, objects), {refs[p]}, opts));
    auto parsed = parse_action_triples(actions.text, frame_index);
    malformed[p] = parsed.malformed_lines;
    frames[p] = build_frame_graph(frame_index, std::move(objects), std::move(relations),
                                  std::move(parsed.triples));
  });

  for (std::size_t p = 0; p < refs.size(); ++p) {
    if (!perception.frame(sampled_indices[p])) diag.frames_without_perception.push_back(sampled_indices[p]);
    diag.malformed_action_lines += malformed[p];
    diag.filtered_detections += filtered[p];
    for (auto& d : frames[p].dropped_relations) diag.dropped_relations.push_back(std::move(d));
  }

  // Temporal action tracking over sampled positions.
  const auto candidates = propose_candidate_actions(refs, gateway, opts);
  diag.caption = candidates.caption;
  diag.malformed_action_lines += candidates.malformed_lines;
  diag.effective_track_window = std::min(cfg.track_window, k);
  auto temporal = track_actions(candidates.triples, gateway_verifier(gateway, refs, opts), k,
                                diag.effective_track_window, cfg.workers);

  auto& g = out.graph;
  g.video_id = video.video_id;
  g.sampled_indices.assign(sampled_indices.begin(), sampled_indices.end());
  for (auto& f : frames) g.frame_graphs.push_back(std::move(f.graph));
  g.main_objects = partition.main;
  g.temporal_map = std::move(temporal);
  validate(g);
  return out;
}

}  // namespace sgvqa
