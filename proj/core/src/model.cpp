#include "sgvqa/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "sgvqa/errors.hpp"
#include "sgvqa/text.hpp"

namespace sgvqa {

namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<ObjectRole, 2> kRoleNames{{{ObjectRole::main, "main"},
                                               {ObjectRole::context, "context"}}};

constexpr NameTable<Predicate, 6> kPredicateNames{{{Predicate::on, "on"},
                                                   {Predicate::above, "above"},
                                                   {Predicate::below, "below"},
                                                   {Predicate::behind, "behind"},
                                                   {Predicate::in_front_of, "in_front_of"},
                                                   {Predicate::next_to, "next_to"}}};

constexpr NameTable<QType, 9> kQTypeNames{{{QType::CH, "CH"},
                                           {QType::CW, "CW"},
                                           {QType::DC, "DC"},
                                           {QType::DL, "DL"},
                                           {QType::DO, "DO"},
                                           {QType::TC, "TC"},
                                           {QType::TN, "TN"},
                                           {QType::TP, "TP"},
                                           {QType::OTHER, "OTHER"}}};

constexpr NameTable<SgVariant, 6> kVariantNames{{{SgVariant::NoSG, "NoSG"},
                                                 {SgVariant::Full, "Full"},
                                                 {SgVariant::FrameSel, "FrameSel"},
                                                 {SgVariant::RangeSel, "RangeSel"},
                                                 {SgVariant::Summary, "Summary"},
                                                 {SgVariant::Action, "Action"}}};

constexpr NameTable<RangeWindowMode, 2> kWindowModeNames{
    {{RangeWindowMode::symmetric, "symmetric"}, {RangeWindowMode::total_width, "total_width"}}};

constexpr NameTable<SamplerKind, 2> kSamplerNames{
    {{SamplerKind::uniform, "uniform"}, {SamplerKind::difference, "difference"}}};

constexpr NameTable<BackendKind, 2> kBackendNames{
    {{BackendKind::mock, "mock"}, {BackendKind::http, "http"}}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
E value_of(const NameTable<E, N>& table, std::string_view name, std::string_view what) {
  for (const auto& [e, n] : table) {
    if (n == name) return e;
  }
  throw ValidationError("unknown " + std::string(what) + " '" + std::string(name) + "'");
}

void require(bool cond, const std::string& message) {
  if (!cond) throw ValidationError(message);
}

bool is_normalized(const std::string& s) { return normalize_label(s) == s; }

}  // namespace

std::string_view to_string(ObjectRole r) { return name_of(kRoleNames, r); }
std::string_view to_string(Predicate p) { return name_of(kPredicateNames, p); }
std::string_view to_string(QType t) { return name_of(kQTypeNames, t); }
std::string_view to_string(SgVariant v) { return name_of(kVariantNames, v); }
std::string_view to_string(RangeWindowMode m) { return name_of(kWindowModeNames, m); }
std::string_view to_string(SamplerKind s) { return name_of(kSamplerNames, s); }
std::string_view to_string(BackendKind b) { return name_of(kBackendNames, b); }

ObjectRole role_from_string(std::string_view s) { return value_of(kRoleNames, s, "object role"); }
Predicate predicate_from_string(std::string_view s) {
  return value_of(kPredicateNames, s, "predicate");
}
QType qtype_from_string(std::string_view s) { return value_of(kQTypeNames, s, "question type"); }
SgVariant variant_from_string(std::string_view s) {
  return value_of(kVariantNames, s, "scene graph variant");
}
RangeWindowMode window_mode_from_string(std::string_view s) {
  return value_of(kWindowModeNames, s, "range window mode");
}
SamplerKind sampler_from_string(std::string_view s) { return value_of(kSamplerNames, s, "sampler"); }
BackendKind backend_from_string(std::string_view s) { return value_of(kBackendNames, s, "backend"); }

std::string_view predicate_phrase(Predicate p) {
  switch (p) {
    case Predicate::on: return "on";
    case Predicate::above: return "above";
    case Predicate::below: return "below";
    case Predicate::behind: return "behind";
    case Predicate::in_front_of: return "in front of";
    case Predicate::next_to: return "next to";
  }
  return "?";
}

ActionTriple make_triple(std::string_view subject, std::string_view relation,
                         std::string_view target, std::optional<int> frame_index) {
  return ActionTriple{normalize_label(subject), normalize_label(relation), normalize_label(target),
                      frame_index};
}

// --- validators ---------------------------------------------------------------

void validate(const FrameDigest& d) {
  require(d.frame_index >= 0, "digest frame_index must be non-negative");
  require(!d.features.empty(), "digest " + std::to_string(d.frame_index) + " has no features");
  for (double f : d.features) {
    require(std::isfinite(f) && f >= 0.0 && f <= 1.0,
            "digest " + std::to_string(d.frame_index) + " has a feature outside [0,1]");
  }
}

void validate(const VideoRecord& v) {
  require(!v.video_id.empty(), "video_id must be nonempty");
  require(v.total_frames > 0, "video " + v.video_id + ": total_frames must be positive");
  require(v.fps.num > 0 && v.fps.den > 0, "video " + v.video_id + ": fps must be positive");
  require(v.frame_refs.size() == static_cast<std::size_t>(v.total_frames),
          "video " + v.video_id + ": frame_refs length != total_frames");
  if (!v.digests) return;
  require(v.digests->size() == static_cast<std::size_t>(v.total_frames),
          "video " + v.video_id + ": digests length != total_frames");
  for (std::size_t i = 0; i < v.digests->size(); ++i) {
    const auto& d = (*v.digests)[i];
    validate(d);
    require(d.frame_index == static_cast<int>(i),
            "video " + v.video_id + ": digest " + std::to_string(i) + " out of order");
    require(d.features.size() == v.digests->front().features.size(),
            "video " + v.video_id + ": digests differ in feature length");
  }
}

void validate(const ObjectEntity& o) {
  require(!o.object_id.empty(), "object_id must be nonempty");
  const std::string who = "object " + o.object_id;
  require(!o.label.empty() && is_normalized(o.label), who + ": label must be nonempty lowercase");
  require(std::isfinite(o.confidence) && o.confidence >= 0.0 && o.confidence <= 1.0,
          who + ": confidence outside [0,1]");
  require(o.box2d.x_min < o.box2d.x_max && o.box2d.y_min < o.box2d.y_max,
          who + ": degenerate box2d");
  if (o.position3d) {
    require(std::isfinite(o.position3d->x) && std::isfinite(o.position3d->y) &&
                std::isfinite(o.position3d->z),
            who + ": non-finite position3d");
    require(o.position3d->z > 0.0, who + ": position3d.z must be positive");
  }
  if (o.extent3d) {
    require(o.extent3d->width >= 0.0 && o.extent3d->height >= 0.0, who + ": negative extent3d");
  }
}

void validate(const ActionTriple& t) {
  require(!t.subject.empty() && !t.relation.empty(), "action triple needs subject and relation");
  require(is_normalized(t.subject) && is_normalized(t.relation) && is_normalized(t.target),
          "action triple [" + t.subject + ", " + t.relation + ", " + t.target +
              "] is not normalized");
}

void validate(const FrameSceneGraph& g) {
  require(g.frame_index >= 0, "frame_index must be non-negative");
  std::unordered_set<std::string> ids;
  for (const auto& o : g.objects) {
    validate(o);
    require(ids.insert(o.object_id).second, "duplicate object_id " + o.object_id);
  }
  for (const auto& r : g.spatial_relations) {
    require(r.subject_id != r.target_id, "self relation on " + r.subject_id);
    require(ids.count(r.subject_id) != 0, "unresolved endpoint " + r.subject_id);
    require(ids.count(r.target_id) != 0, "unresolved endpoint " + r.target_id);
    require(r.frame_index == g.frame_index, "relation frame_index mismatch");
  }
  for (const auto& t : g.action_triples) {
    validate(t);
    require(!t.frame_index || *t.frame_index == g.frame_index, "triple frame_index mismatch");
  }
}

void validate(const TemporalActionMap& m, int num_frames) {
  for (const auto& [triple, intervals] : m.entries) {
    validate(triple);
    require(!triple.frame_index, "temporal map keys carry no frame_index");
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      const auto& iv = intervals[i];
      require(iv.start <= iv.end, "interval start > end");
      require(iv.start >= 0 && iv.end < num_frames, "interval outside [0, k)");
      if (i > 0) {
        require(iv.start > intervals[i - 1].end + 1, "intervals overlap or touch");
      }
    }
  }
}

void validate(const VideoSceneGraph& g) {
  require(!g.video_id.empty(), "video_id must be nonempty");
  require(g.frame_graphs.size() == g.sampled_indices.size(),
          "frame_graphs not aligned with sampled_indices");
  for (std::size_t i = 0; i < g.sampled_indices.size(); ++i) {
    require(g.sampled_indices[i] >= 0, "negative sampled index");
    if (i > 0) {
      require(g.sampled_indices[i] > g.sampled_indices[i - 1],
              "sampled_indices not strictly increasing");
    }
    require(g.frame_graphs[i].frame_index == g.sampled_indices[i],
            "frame graph " + std::to_string(i) + " has the wrong frame_index");
    validate(g.frame_graphs[i]);
  }
  for (const auto& label : g.main_objects) {
    require(!label.empty() && is_normalized(label), "main object label not normalized");
  }
  validate(g.temporal_map, static_cast<int>(g.sampled_indices.size()));
}

void validate(const Question& q) {
  require(!q.question_id.empty(), "question_id must be nonempty");
  require(!q.video_id.empty(), "question " + q.question_id + ": video_id must be nonempty");
  require(!trim(q.text).empty(), "question " + q.question_id + ": text must be nonempty");
  require(q.options.empty() || q.options.size() == 5,
          "question " + q.question_id + ": expected 0 or 5 options, got " +
              std::to_string(q.options.size()));
  if (q.is_multiple_choice()) {
    const int* gold = std::get_if<int>(&q.gold);
    require(gold != nullptr && *gold >= 0 && *gold < 5,
            "question " + q.question_id + ": gold must be an option index in [0,5)");
  } else {
    const auto* golds = std::get_if<std::vector<std::string>>(&q.gold);
    require(golds != nullptr && !golds->empty(),
            "question " + q.question_id + ": open-ended gold must be a nonempty list");
    for (const auto& g : *golds) {
      require(!trim(g).empty(), "question " + q.question_id + ": empty gold answer");
    }
  }
}

void validate(const SgVariantConfig& c) {
  require(c.range_window >= 0, "range_window must be non-negative");
}

void validate(const PipelineConfig& c) {
  require(c.sample_count > 0, "sample_count k must be positive");
  require(c.main_freq_threshold > 0.0 && c.main_freq_threshold <= 1.0, "p1 must lie in (0,1]");
  require(c.det_conf_threshold >= 0.0 && c.det_conf_threshold < 1.0, "p2 must lie in [0,1)");
  require(c.track_window > 0, "track window k2 must be positive");
  require(c.temperature >= 0.0, "temperature must be non-negative");
  require(c.beam > 0, "beam must be positive");
  require(c.workers > 0, "workers must be positive");
  validate(c.variant);
  const auto& g = c.geometry;
  require(g.on_vertical > 0 && g.vertical > 0 && g.depth > 0 && g.proximity > 0,
          "geometry thresholds must be positive");
  require(c.backend.max_retries >= 0, "max_retries must be non-negative");
  require(c.backend.timeout_s > 0, "timeout must be positive");
  require(c.backend.max_tokens > 0, "max_tokens must be positive");
}

FrameSceneGraph canonicalize(FrameSceneGraph graph) {
  std::unordered_set<std::string> ids;
  for (const auto& o : graph.objects) {
    require(ids.insert(o.object_id).second, "duplicate object_id " + o.object_id);
  }
  for (const auto& r : graph.spatial_relations) {
    require(ids.count(r.subject_id) != 0, "unresolved endpoint " + r.subject_id);
    require(ids.count(r.target_id) != 0, "unresolved endpoint " + r.target_id);
  }

  std::sort(graph.objects.begin(), graph.objects.end(),
            [](const ObjectEntity& a, const ObjectEntity& b) { return a.object_id < b.object_id; });

  auto& rel = graph.spatial_relations;
  std::sort(rel.begin(), rel.end());
  rel.erase(std::unique(rel.begin(), rel.end()), rel.end());

  auto& tri = graph.action_triples;
  std::sort(tri.begin(), tri.end());
  tri.erase(std::unique(tri.begin(), tri.end()), tri.end());
  return graph;
}

}  // namespace sgvqa
